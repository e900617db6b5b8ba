#include "axlab/experiments.hpp"

#include <png.h>

#include "json.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "axlab/genealogy.hpp"
#include "axlab/parallel.hpp"
#include "axlab/trajectory_io.hpp"
#include "axlab/walks.hpp"

namespace axlab {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

RunOptions run_options(const ExperimentOptions& o, LogPolicy log)
{
    RunOptions r;
    r.horizon = o.horizon;
    r.event_cap = o.event_cap;
    r.log = log;
    return r;
}

TrackOptions light_tracking()
{
    TrackOptions t;
    t.audit_interval = 0;
    t.keep_moves = false;
    t.keep_zeta = false;
    return t;
}

void add_mean(ExperimentReport& report, const std::string& name, const RunningStats& s)
{
    report.aggregates.push_back({name, s.count() ? s.mean() : std::nan(""), s.standard_error()});
}

ExperimentReport new_report(std::string name, const ModelParams& params, std::uint64_t replicas, Seed seed)
{
    ExperimentReport r;
    r.experiment = std::move(name);
    r.params = params;
    r.replicas = replicas;
    r.seed = seed;
    return r;
}

}  // namespace

ReplicaSeeds replica_seeds(Seed base, std::uint64_t replica)
{
    const Seed s = replica_seed(base, replica);
    return {replica_seed(s, 0), replica_seed(s, 1)};
}

const Aggregate& ExperimentReport::aggregate(const std::string& name) const
{
    for (const auto& a : aggregates)
        if (a.name == name) return a;
    throw std::out_of_range("no aggregate named '" + name + "' in " + experiment);
}

std::vector<double> ExperimentReport::column(const std::string& name) const
{
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw std::out_of_range("no column named '" + name + "' in " + experiment);
    const auto k = static_cast<std::size_t>(it - columns.begin());
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& row : records) out.push_back(row[k]);
    return out;
}

void write_report_csv(std::ostream& os, const ExperimentReport& r)
{
    os << "# axelrod-lab report v1 experiment=" << r.experiment << ' ' << describe(r.params)
       << " replicas=" << r.replicas << " seed=" << r.seed.value << " wall_seconds=" << format_real(r.wall_seconds)
       << '\n';
    os << "replica";
    for (const auto& c : r.columns) os << ',' << c;
    os << '\n';
    for (std::size_t k = 0; k < r.records.size(); ++k) {
        os << k;
        for (double v : r.records[k]) os << ',' << format_real(v);
        os << '\n';
    }
    for (const auto& a : r.aggregates)
        os << "# aggregate," << a.name << ',' << format_real(a.value) << ',' << format_real(a.standard_error) << '\n';
    for (const auto& n : r.notes) os << "# note " << n << '\n';
}

std::string report_summary_json(const ExperimentReport& r)
{
    nlohmann::ordered_json j;
    j["experiment"] = r.experiment;
    j["params"] = {{"F", r.params.F}, {"q", r.params.q}, {"L", r.params.L},
                   {"topology", std::string(to_string(r.params.topology))}};
    j["replicas"] = r.replicas;
    j["seed"] = r.seed.value;
    j["wall_seconds"] = r.wall_seconds;
    auto& agg = j["aggregates"];
    agg = nlohmann::ordered_json::object();
    for (const auto& a : r.aggregates) agg[a.name] = {{"value", a.value}, {"standard_error", a.standard_error}};
    j["notes"] = r.notes;
    return j.dump(2);
}

// ---------------------------------------------------------------------------------------
// Fixation

namespace {

struct FixationRecord {
    bool absorbed = false;
    double end_time = 0.0;
    double blockade_density = 0.0;
    int domains = 0;
    double particle_density = 0.0;
    std::uint64_t effective_events = 0;
};

FixationRecord fixation_replica(const Configuration& initial, Seed dynamics, const ExperimentOptions& options)
{
    // The tracker re-derives the walk system along the run, so every replica also checks
    // the particle invariants (monotone per-feature counts, no coalescence for q = 2).
    ParticleTracker tracker(initial, light_tracking());
    const auto t = run_engine(options.engine, initial, run_options(options, LogPolicy::none), dynamics,
                              [&](const ArrowRecord& a, const Configuration&) { tracker.observe(a); });
    if (!(tracker.configuration() == t.final)) throw TrackingError("fixation run: tracked state diverged");
    const auto tracked = tracker.finish();
    for (std::size_t i = 0; i < tracked.final_per_feature.size(); ++i)
        if (tracked.final_per_feature[i] > tracked.initial_per_feature[i])
            throw TrackingError("particle count increased on a feature");

    const ModelParams& p = initial.params();
    const auto field = derive_particles(t.final);
    FixationRecord rec;
    rec.absorbed = t.absorbed;
    rec.end_time = t.end_time;
    rec.blockade_density = static_cast<double>(field.blockades()) / p.edge_count();
    rec.domains = domain_count(t.final);
    rec.particle_density = static_cast<double>(field.total()) / (static_cast<double>(p.edge_count()) * p.F);
    rec.effective_events = t.effective_events;
    return rec;
}

ExperimentReport fixation_report(const ModelParams& params, std::uint64_t replicas, Seed seed,
                                 const ExperimentOptions& options, const Configuration* fixed)
{
    params.validate();
    const auto start = Clock::now();
    std::vector<FixationRecord> recs(replicas);
    parallel_for(replicas, options.threads, [&](std::uint64_t r) {
        const auto seeds = replica_seeds(seed, r);
        recs[r] = fixation_replica(fixed ? *fixed : sample_pi0(params, seeds.initial), seeds.dynamics, options);
    });

    auto report = new_report(fixed ? "fixation_from" : "fixation", params, replicas, seed);
    report.columns = {"absorbed", "end_time", "blockade_density", "domains", "domain_density", "particle_density",
                      "effective_events"};
    RunningStats absorbed, time, blockade, domains, domain_density, particles;
    std::uint64_t censored = 0;
    for (const auto& r : recs) {
        const double dd = static_cast<double>(r.domains) / params.L;
        report.records.push_back({r.absorbed ? 1.0 : 0.0, r.end_time, r.blockade_density, static_cast<double>(r.domains),
                                  dd, r.particle_density, static_cast<double>(r.effective_events)});
        absorbed.add(r.absorbed);
        if (r.absorbed) time.add(r.end_time);
        else ++censored;
        blockade.add(r.blockade_density);
        domains.add(r.domains);
        domain_density.add(dd);
        particles.add(r.particle_density);
    }
    add_mean(report, "absorbed_fraction", absorbed);
    report.aggregates.push_back({"censored", static_cast<double>(censored), 0.0});
    add_mean(report, "absorption_time", time);
    add_mean(report, "blockade_density", blockade);
    add_mean(report, "domains", domains);
    add_mean(report, "domain_density", domain_density);
    add_mean(report, "particle_density", particles);
    if (censored > 0)
        report.notes.push_back(std::to_string(censored) +
                               " replicas stopped before absorption; absorption_time covers absorbed replicas only");
    report.wall_seconds = seconds_since(start);
    return report;
}

}  // namespace

ExperimentReport fixation_run(const ModelParams& params, std::uint64_t replicas, Seed seed,
                              const ExperimentOptions& options)
{
    return fixation_report(params, replicas, seed, options, nullptr);
}

ExperimentReport fixation_run_from(const Configuration& initial, std::uint64_t replicas, Seed seed,
                                   const ExperimentOptions& options)
{
    return fixation_report(initial.params(), replicas, seed, options, &initial);
}

// ---------------------------------------------------------------------------------------
// Density curves

std::vector<double> uniform_grid(double horizon, int n)
{
    if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("grid horizon must be finite and >= 0");
    if (n < 1) throw std::invalid_argument("grid needs at least one interval");
    std::vector<double> g;
    for (int k = 0; k <= n; ++k) g.push_back(horizon * k / n);
    return g;
}

DensityCurve density_curve(const ModelParams& params, const std::vector<double>& snapshots, std::uint64_t replicas,
                           Seed seed, const ExperimentOptions& options)
{
    params.validate();
    if (snapshots.empty()) throw std::invalid_argument("density_curve: empty snapshot grid");
    if (snapshots.front() < 0.0 || !std::is_sorted(snapshots.begin(), snapshots.end()))
        throw std::invalid_argument("density_curve: snapshot times must be non-negative and non-decreasing");
    if (snapshots.back() > options.horizon)
        throw std::invalid_argument("density_curve: snapshot grid extends past the horizon");

    const std::size_t n = snapshots.size();
    const double edges = params.edge_count();
    struct Row {
        std::vector<double> particles, blockades;
        std::size_t valid = 0;
        bool censored = false;
    };
    std::vector<Row> rows(replicas);

    parallel_for(replicas, options.threads, [&](std::uint64_t r) {
        const auto seeds = replica_seeds(seed, r);
        const auto initial = sample_pi0(params, seeds.initial);
        ParticleTracker tracker(initial, light_tracking());
        Row& row = rows[r];
        auto record = [&] {
            const auto& f = tracker.field();
            row.particles.push_back(static_cast<double>(f.total()) / (edges * params.F));
            row.blockades.push_back(f.blockades() / edges);
        };
        std::size_t k = 0;
        ExperimentOptions o = options;
        o.horizon = snapshots.back();
        Trajectory t;
        if (o.horizon > 0.0) {
            t = run_engine(options.engine, initial, run_options(o, LogPolicy::none), seeds.dynamics,
                           [&](const ArrowRecord& a, const Configuration&) {
                               while (k < n && snapshots[k] < a.time) {
                                   record();
                                   ++k;
                               }
                               tracker.observe(a);
                           });
        } else {
            t.absorbed = is_absorbed(initial);
            t.stop = StopReason::horizon;
        }
        // Absorbed and horizon-stopped runs hold their last state to the end of the grid.
        row.censored = t.stop == StopReason::event_cap;
        while (k < n && (!row.censored || snapshots[k] <= t.end_time)) {
            record();
            ++k;
        }
        row.valid = k;
    });

    DensityCurve c;
    c.times = snapshots;
    c.replicas = replicas;
    for (const auto& row : rows) c.censored += row.censored;
    for (std::size_t k = 0; k < n; ++k) {
        RunningStats p, b;
        for (const auto& row : rows) {
            if (k >= row.valid) continue;
            p.add(row.particles[k]);
            b.add(row.blockades[k]);
        }
        c.particle_density.push_back(p.mean());
        c.particle_se.push_back(p.standard_error());
        c.blockade_density.push_back(b.mean());
        c.blockade_se.push_back(b.standard_error());
        c.agreement.push_back(1.0 - p.mean());
        c.samples.push_back(p.count());
    }
    return c;
}

void write_density_csv(std::ostream& os, const DensityCurve& c)
{
    os << "# axelrod-lab density v1 replicas=" << c.replicas << " censored=" << c.censored << '\n';
    os << "time,particle_density,particle_se,blockade_density,blockade_se,agreement,samples\n";
    for (std::size_t k = 0; k < c.times.size(); ++k)
        os << format_real(c.times[k]) << ',' << format_real(c.particle_density[k]) << ','
           << format_real(c.particle_se[k]) << ',' << format_real(c.blockade_density[k]) << ','
           << format_real(c.blockade_se[k]) << ',' << format_real(c.agreement[k]) << ',' << c.samples[k] << '\n';
}

// ---------------------------------------------------------------------------------------
// Collision outcomes

ExperimentReport collision_outcome_experiment(const ModelParams& params, std::uint64_t min_collisions, Seed seed,
                                              const CollisionOptions& options)
{
    params.validate();
    if (options.batch < 1) throw std::invalid_argument("collision experiment: batch must be >= 1");
    const auto start = Clock::now();
    // Columns: collisions, annihilations, coalescences, annihilations on blockades,
    // coalescences on blockades.
    std::vector<std::array<std::uint64_t, 5>> recs;
    std::uint64_t total = 0;
    while (total < min_collisions && recs.size() < options.max_replicas) {
        const std::uint64_t first = recs.size();
        const std::uint64_t count = std::min(options.batch, options.max_replicas - first);
        recs.resize(first + count);
        parallel_for(count, options.run.threads, [&](std::uint64_t k) {
            const auto seeds = replica_seeds(seed, first + k);
            const auto initial = sample_pi0(params, seeds.initial);
            ParticleTracker tracker(initial, light_tracking());
            run_engine(options.run.engine, initial, run_options(options.run, LogPolicy::none), seeds.dynamics,
                       [&](const ArrowRecord& a, const Configuration&) { tracker.observe(a); });
            const auto s = collision_stats(tracker.finish().collisions);
            recs[first + k] = {s.collisions, s.annihilations, s.coalescences, s.annihilations_on_blockade,
                               s.coalescences_on_blockade};
        });
        for (std::uint64_t k = first; k < recs.size(); ++k) total += recs[k][0];
    }

    auto report = new_report("collisions", params, recs.size(), seed);
    report.columns = {"collisions", "annihilations", "coalescences", "annihilations_on_blockade",
                      "coalescences_on_blockade"};
    std::array<std::uint64_t, 5> sum{};
    for (const auto& r : recs) {
        report.records.push_back({});
        for (std::size_t c = 0; c < 5; ++c) {
            report.records.back().push_back(static_cast<double>(r[c]));
            sum[c] += r[c];
        }
    }
    const double n = static_cast<double>(sum[0]);
    const auto wilson = wilson_interval(sum[1], sum[0]);
    report.aggregates.push_back({"collisions", n, 0.0});
    report.aggregates.push_back({"annihilations", static_cast<double>(sum[1]), 0.0});
    report.aggregates.push_back({"coalescences", static_cast<double>(sum[2]), 0.0});
    report.aggregates.push_back({"annihilation_fraction", sum[0] ? sum[1] / n : std::nan(""),
                                 binomial_standard_error(sum[1], sum[0])});
    report.aggregates.push_back({"wilson_low", wilson.low, 0.0});
    report.aggregates.push_back({"wilson_high", wilson.high, 0.0});
    report.aggregates.push_back({"target_expected", 1.0 / (params.q - 1), 0.0});
    // Outcome against whether the destination edge was a blockade.
    const std::uint64_t ann_free = sum[1] - sum[3], coal_free = sum[2] - sum[4];
    const auto chi = chi_square_2x2(sum[3], sum[4], ann_free, coal_free);
    report.aggregates.push_back({"chi_square", chi.statistic, 0.0});
    report.aggregates.push_back({"chi_square_p", chi.p_value, 0.0});
    if (chi.degenerate) report.notes.push_back("independence test not applicable: a margin of the 2x2 table is zero");
    if (total < min_collisions)
        report.notes.push_back("shortfall: " + std::to_string(total) + " collisions after " +
                               std::to_string(recs.size()) + " replicas, " + std::to_string(min_collisions) +
                               " requested");
    report.wall_seconds = seconds_since(start);
    return report;
}

// ---------------------------------------------------------------------------------------
// Martingale

double martingale_boundary_margin(double time)
{
    // A descendant set grows by at most one vertex per arrow on each side, and arrows
    // arrive at rate at most one; four standard deviations past the mean leaves a wide gap.
    return time + 4.0 * std::sqrt(time) + 1.0;
}

ExperimentReport martingale_experiment(const ModelParams& params, double time, int site, std::uint64_t replicas,
                                       Seed seed, unsigned threads)
{
    params.validate();
    if (!(time >= 0.0) || !std::isfinite(time)) throw std::invalid_argument("martingale: time must be finite and >= 0");
    if (site < 0 || site >= params.L) throw std::invalid_argument("martingale: site outside 0..L-1");
    const auto start = Clock::now();
    std::vector<std::vector<int>> counts(replicas);
    parallel_for(replicas, threads, [&](std::uint64_t r) {
        auto& out = counts[r];
        out.assign(static_cast<std::size_t>(params.F), 1);
        if (time == 0.0) return;
        const auto seeds = replica_seeds(seed, r);
        RunOptions o;
        o.horizon = time;
        o.log = LogPolicy::effective;
        const auto t = run_harris(sample_pi0(params, seeds.initial), o, seeds.dynamics);
        for (int i = 0; i < params.F; ++i) out[static_cast<std::size_t>(i)] = descendants(t, site, i, time).count;
    });

    auto report = new_report("martingale", params, replicas, seed);
    for (int i = 0; i < params.F; ++i) report.columns.push_back("M_" + std::to_string(i));
    std::vector<RunningStats> stats(static_cast<std::size_t>(params.F));
    for (const auto& row : counts) {
        report.records.emplace_back(row.begin(), row.end());
        for (std::size_t i = 0; i < row.size(); ++i) stats[i].add(row[i]);
    }
    for (int i = 0; i < params.F; ++i) {
        const auto& s = stats[static_cast<std::size_t>(i)];
        add_mean(report, "mean_" + std::to_string(i), s);
        report.aggregates.push_back({"variance_" + std::to_string(i), s.variance(), 0.0});
    }
    report.aggregates.push_back({"time", time, 0.0});
    report.aggregates.push_back({"site", static_cast<double>(site), 0.0});
    if (params.topology == Topology::interval) {
        const int distance = std::min(site, params.L - 1 - site);
        if (distance < martingale_boundary_margin(time))
            report.notes.push_back("warning: site " + std::to_string(site) + " is " + std::to_string(distance) +
                                   " vertices from an interval end; boundary effects may bias the mean");
    }
    report.wall_seconds = seconds_since(start);
    return report;
}

// ---------------------------------------------------------------------------------------
// Six-arrow race

SixArrowOutcome six_arrow_trial(int q, Rng& rng)
{
    if (q < 3) throw std::invalid_argument("six_arrow_race requires q >= 3 (got " + std::to_string(q) + ")");
    // Window a-1, a, b, c, c+1 = 0..4; the pair sits on edges u = (a, b) and u + 1 = (b, c).
    const ModelParams p{2, q, 5, Topology::interval};
    constexpr int a = 1, b = 2, c = 3, u = 1, v = 2;
    Configuration window(p);
    do {
        window = sample_pi0(p, rng);
    } while (shared_features(window, a, b) != 1 || shared_features(window, b, c) != 1);

    // Six independent rate-1/4 clocks; only the identity of the first matters.
    constexpr std::array<std::array<int, 2>, 6> arrows{{{a, b}, {c, b}, {b, a}, {b, c}, {a - 1, a}, {c + 1, c}}};
    SixArrowOutcome out;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 6; ++k) {
        const double t = rng.exponential(0.25);
        if (t < best) {
            best = t;
            out.first = k;
        }
    }
    out.inner = out.first < 2;
    if (!out.inner) return out;

    const int source = arrows[static_cast<std::size_t>(out.first)][0];
    const int from_edge = source == a ? u : v;
    const int to_edge = source == a ? v : u;
    const int feature = window.state(source, 0) != window.state(b, 0) ? 0 : 1;
    const auto before = derive_particles(window);
    apply_update_in_place(window, b, source, feature);
    const auto after = derive_particles(window);
    if (after.occupied(from_edge, feature)) throw std::logic_error("six_arrow_trial: particle did not leave its edge");
    out.collided = before.occupied(to_edge, feature);
    out.blockade = after.is_blockade(to_edge);
    return out;
}

ExperimentReport six_arrow_race(int q, std::uint64_t replicas, Seed seed)
{
    const auto start = Clock::now();
    Rng rng(seed);
    auto report = new_report("six_arrow_race", ModelParams{2, q, 5, Topology::interval}, replicas, seed);
    report.columns = {"first", "inner", "collided", "blockade"};
    std::array<std::uint64_t, 6> first{};
    std::uint64_t inner = 0, collided = 0, blockade = 0, either = 0;
    for (std::uint64_t r = 0; r < replicas; ++r) {
        const auto o = six_arrow_trial(q, rng);
        report.records.push_back({static_cast<double>(o.first), o.inner ? 1.0 : 0.0, o.collided ? 1.0 : 0.0,
                                  o.blockade ? 1.0 : 0.0});
        ++first[static_cast<std::size_t>(o.first)];
        inner += o.inner;
        collided += o.collided;
        blockade += o.blockade;
        either += o.inner && (o.collided || o.blockade);
    }
    const auto wilson = wilson_interval(inner, replicas);
    report.aggregates.push_back({"inner_first", replicas ? static_cast<double>(inner) / replicas : std::nan(""),
                                 binomial_standard_error(inner, replicas)});
    report.aggregates.push_back({"wilson_low", wilson.low, 0.0});
    report.aggregates.push_back({"wilson_high", wilson.high, 0.0});
    report.aggregates.push_back({"inner_count", static_cast<double>(inner), 0.0});
    report.aggregates.push_back(
        {"collide_or_blockade_rate", inner ? static_cast<double>(either) / inner : std::nan(""), 0.0});
    report.aggregates.push_back({"collisions", static_cast<double>(collided), 0.0});
    report.aggregates.push_back({"blockades", static_cast<double>(blockade), 0.0});
    for (std::size_t k = 0; k < 6; ++k)
        report.aggregates.push_back(
            {"arrow_" + std::to_string(k), replicas ? static_cast<double>(first[k]) / replicas : 0.0, 0.0});
    report.wall_seconds = seconds_since(start);
    return report;
}

// ---------------------------------------------------------------------------------------
// Sweeps

void write_file_atomic(const std::filesystem::path& path, const std::string& content)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
    }
    std::filesystem::rename(tmp, path);
}

Seed sweep_cell_seed(Seed base, const ModelParams& p)
{
    const std::uint64_t key = (static_cast<std::uint64_t>(p.F) << 42) ^ (static_cast<std::uint64_t>(p.q) << 21) ^
                              static_cast<std::uint64_t>(p.L) ^ (p.topology == Topology::ring ? 1ULL << 63 : 0ULL);
    return replica_seed(base, key);
}

namespace {

std::string cell_tag(const ModelParams& p, Seed cell_seed, const SweepOptions& o)
{
    std::ostringstream os;
    os << "# axelrod-lab sweep-cell v1 " << describe(p) << " seed=" << cell_seed.value << " replicas=" << o.replicas
       << " engine=" << to_string(o.run.engine) << " horizon=" << format_real(o.run.horizon)
       << " event_cap=" << o.run.event_cap;
    return os.str();
}

std::filesystem::path cell_path(const std::filesystem::path& dir, const ModelParams& p)
{
    return dir / ("cell_F" + std::to_string(p.F) + "_q" + std::to_string(p.q) + "_L" + std::to_string(p.L) + "_" +
                  std::string(to_string(p.topology)) + ".csv");
}

/// Replica rows and the aggregate row of one cell.
std::pair<std::string, std::string> run_cell(const ModelParams& p, Seed cell_seed, const SweepOptions& o)
{
    const auto report = fixation_run(p, o.replicas, cell_seed, o.run);
    const std::string prefix =
        std::to_string(p.F) + ',' + std::to_string(p.q) + ',' + std::to_string(p.L) + ',';
    std::ostringstream rows;
    for (std::size_t r = 0; r < report.records.size(); ++r) {
        const auto& v = report.records[r];
        rows << "replica," << prefix << r << ',' << format_real(v[0]) << ',' << format_real(v[1]) << ','
             << format_real(v[2]) << ',' << format_real(v[3]) << ',' << format_real(v[5]) << '\n';
    }
    RunningStats end_time;
    for (const auto& v : report.records) end_time.add(v[1]);
    std::ostringstream agg;
    agg << "aggregate," << prefix << report.records.size() << ',' << format_real(report.value("absorbed_fraction"))
        << ',' << format_real(end_time.mean()) << ',' << format_real(report.value("blockade_density")) << ','
        << format_real(report.value("domains")) << ',' << format_real(report.value("particle_density")) << '\n';
    return {rows.str(), agg.str()};
}

}  // namespace

SweepResult sweep(const std::vector<SweepCell>& grid, Seed seed, const SweepOptions& options)
{
    SweepResult result;
    std::string rows, aggregates;
    for (const auto& cell : grid) {
        try {
            const ModelParams p{cell.F, cell.q, options.L, options.topology};
            p.validate();
            const Seed cs = sweep_cell_seed(seed, p);
            const std::string tag = cell_tag(p, cs, options);
            std::string cell_rows, cell_agg;
            bool reused = false;
            if (options.directory) {
                std::ifstream in(cell_path(*options.directory, p));
                std::string line;
                if (in && std::getline(in, line) && line == tag) {
                    while (std::getline(in, line)) {
                        if (line.rfind("aggregate,", 0) == 0) cell_agg += line + '\n';
                        else if (!line.empty()) cell_rows += line + '\n';
                    }
                    reused = !cell_agg.empty();
                }
            }
            if (!reused) {
                std::tie(cell_rows, cell_agg) = run_cell(p, cs, options);
                if (options.directory)
                    write_file_atomic(cell_path(*options.directory, p), tag + '\n' + cell_rows + cell_agg);
                ++result.cells_run;
            } else {
                ++result.cells_reused;
            }
            rows += cell_rows;
            aggregates += cell_agg;
        } catch (const std::exception& e) {
            result.failures.push_back({cell, e.what()});
        }
    }
    result.csv = "# axelrod-lab sweep v1 seed=" + std::to_string(seed.value) + "\n" + sweep_header + "\n" + rows +
                 aggregates;
    return result;
}

// ---------------------------------------------------------------------------------------
// Space-time export

SpacetimeField spacetime_field(const Trajectory& t, int rows)
{
    if (rows < 1) throw std::invalid_argument("spacetime_field: rows must be >= 1");
    if (t.options.log == LogPolicy::none && t.effective_events > 0)
        throw ContractError("spacetime_field: trajectory was recorded without an event log");
    const double end = std::isfinite(t.options.horizon) ? t.options.horizon : t.end_time;
    SpacetimeField f;
    f.params = t.params;
    for (int k = 0; k < rows; ++k) f.times.push_back(rows == 1 ? 0.0 : end * k / (rows - 1));
    ParticleTracker tracker(t.initial, light_tracking());
    std::size_t k = 0;
    for (const auto& e : t.events) {
        while (k < f.times.size() && f.times[k] < e.time) {
            f.zeta.push_back(tracker.field().counts());
            ++k;
        }
        tracker.observe(e);
    }
    for (; k < f.times.size(); ++k) f.zeta.push_back(tracker.field().counts());
    return f;
}

void write_spacetime_png(const std::filesystem::path& path, const SpacetimeField& field)
{
    if (field.zeta.empty()) throw std::invalid_argument("write_spacetime_png: empty field");
    const auto width = static_cast<png_uint_32>(field.zeta.front().size());
    const auto height = static_cast<png_uint_32>(field.zeta.size());
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());

    std::unique_ptr<std::FILE, int (*)(std::FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
    if (!file) throw std::runtime_error("cannot open " + path.string() + " for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("png_create_info_struct failed");
    }
    std::vector<png_byte> row(width);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("libpng failed while writing " + path.string());
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const int F = field.params.F;
    for (const auto& z : field.zeta) {
        for (png_uint_32 x = 0; x < width; ++x) row[x] = static_cast<png_byte>(255 - (255 * z[x]) / F);
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

SpacetimeExport spacetime_export(const ModelParams& params, double horizon, Seed seed,
                                 const std::filesystem::path& stem, int rows, bool render)
{
    params.validate();
    const auto seeds = replica_seeds(seed, 0);
    RunOptions o;
    o.horizon = horizon;
    o.log = LogPolicy::effective;
    const auto t = run_gillespie(sample_pi0(params, seeds.initial), o, seeds.dynamics);

    SpacetimeExport out;
    out.trajectory = stem;
    out.trajectory += ".log";
    out.zeta = stem;
    out.zeta += ".zeta.csv";
    {
        std::ostringstream os;
        write_trajectory(os, t);
        write_file_atomic(out.trajectory, os.str());
    }
    {
        TrackOptions to;
        to.keep_moves = false;
        std::ostringstream os;
        write_zeta_stream(os, track(t, to));
        write_file_atomic(out.zeta, os.str());
    }
    out.field = spacetime_field(t, rows);
    if (render) {
        auto png = stem;
        png += ".png";
        write_spacetime_png(png, out.field);
        out.image = png;
    }
    return out;
}

}  // namespace axlab
