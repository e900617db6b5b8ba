// axelrod_lab: command-line front end for simulations, experiments, theory tables and
// the verification suites.
//
// Exit codes: 0 success, 1 a verification or replay check failed, 2 invalid
// configuration or usage, 3 runtime failure (I/O, internal error, failed sweep cells).

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "axlab/experiments.hpp"
#include "axlab/theory.hpp"
#include "axlab/trajectory_io.hpp"
#include "axlab/verify.hpp"
#include "axlab/walks.hpp"

namespace fs = std::filesystem;
using namespace axlab;

namespace {

enum Exit { ok = 0, check_failed = 1, invalid = 2, runtime = 3 };

/// Raised for invalid combinations of options that CLI11 itself cannot see.
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct Settings {
    int F = 2;
    int q = 3;
    int L = 100;
    std::string topology = "interval";
    bool ring = false;
    std::string engine = "gillespie";
    double horizon = std::numeric_limits<double>::infinity();
    std::uint64_t event_cap = default_event_cap;
    std::optional<std::uint64_t> replicas;
    std::uint64_t seed = 1;
    int snapshots = 100;
    std::string out = "axelrod_lab_out";
    unsigned parallel = 1;

    ModelParams params() const
    {
        ModelParams p{F, q, L, ring ? Topology::ring : parse_topology(topology)};
        p.validate();
        return p;
    }
    EngineKind engine_kind() const { return parse_engine(engine); }
    ExperimentOptions experiment() const
    {
        ExperimentOptions o;
        o.engine = engine_kind();
        o.horizon = horizon;
        o.event_cap = event_cap;
        o.threads = parallel;
        return o;
    }
    fs::path dir(const std::string& sub) const
    {
        const fs::path d = fs::path(out) / sub;
        fs::create_directories(d);
        return d;
    }
};

std::string slurp_stream(const std::function<void(std::ostream&)>& write)
{
    std::ostringstream os;
    write(os);
    return os.str();
}

std::string toml_value(const CLI::Option* opt)
{
    std::string v;
    if (opt->count() > 0) {
        for (const auto& r : opt->results()) v += (v.empty() ? "" : ",") + r;
    } else {
        v = opt->get_default_str();
    }
    if (v.empty()) return v;
    if (opt->get_expected_max() == 0) return v == "-1" || v == "false" ? "false" : "true";
    char* end = nullptr;
    std::strtod(v.c_str(), &end);
    if (*end == '\0' || v == "true" || v == "false") return v;
    return '"' + v + '"';
}

void echo_options(std::ostream& os, const CLI::App& app)
{
    for (const auto* opt : app.get_options()) {
        if (opt->get_lnames().empty() || opt->get_positional() || !opt->get_configurable()) continue;
        const auto& name = opt->get_lnames().front();
        if (name == "help" || name == "config") continue;
        if (opt->get_expected_max() == 0 && opt->count() == 0) continue;
        const auto v = toml_value(opt);
        if (!v.empty()) os << name << " = " << v << '\n';
    }
}

/// Settings of the run as a config file that reproduces it through --config. Positional
/// arguments are left out.
void echo_config(const CLI::App& app, const fs::path& dir, const std::string& command)
{
    std::ostringstream os;
    os << "# axelrod_lab " << command << '\n';
    echo_options(os, app);
    std::ostringstream sub;
    echo_options(sub, *app.get_subcommand(command));
    if (!sub.str().empty()) os << '[' << command << "]\n" << sub.str();
    write_file_atomic(dir / "config.toml", os.str());
}

void write_report(const fs::path& dir, const ExperimentReport& r)
{
    write_file_atomic(dir / (r.experiment + ".csv"), slurp_stream([&](std::ostream& os) { write_report_csv(os, r); }));
    write_file_atomic(dir / (r.experiment + ".json"), report_summary_json(r) + "\n");
    std::cout << report_summary_json(r) << '\n';
}

// ---------------------------------------------------------------------------------------

int cmd_simulate(const CLI::App& app, const Settings& s, const std::string& log_policy)
{
    const auto params = s.params();
    const auto dir = s.dir("simulate");
    const fs::path marker = dir / "INCOMPLETE";
    write_file_atomic(marker, "run in progress or interrupted\n");
    RunOptions o;
    o.horizon = s.horizon;
    o.event_cap = s.event_cap;
    o.log = parse_log_policy(log_policy);
    const std::uint64_t n = s.replicas.value_or(1);
    std::ostringstream summary;
    summary << "# axelrod-lab simulate v1 " << describe(params) << " engine=" << s.engine << " seed=" << s.seed << '\n';
    summary << "replica,absorbed,stop,end_time,effective_events,blockades,domains,log\n";
    for (std::uint64_t r = 0; r < n; ++r) {
        const auto seeds = replica_seeds(Seed{s.seed}, r);
        const auto t = run_engine(s.engine_kind(), sample_pi0(params, seeds.initial), o, seeds.dynamics);
        const std::string name = "trajectory_" + std::to_string(r) + ".log";
        write_file_atomic(dir / name, slurp_stream([&](std::ostream& os) { write_trajectory(os, t); }));
        summary << r << ',' << (t.absorbed ? 1 : 0) << ',' << to_string(t.stop) << ',' << format_real(t.end_time)
                << ',' << t.effective_events << ',' << blockade_count(t.final) << ',' << domain_count(t.final) << ','
                << name << '\n';
    }
    write_file_atomic(dir / "summary.csv", summary.str());
    echo_config(app, dir, "simulate");
    fs::remove(marker);
    std::cout << summary.str();
    return ok;
}

int cmd_replay(const std::string& path, bool walks)
{
    const auto t = load_trajectory(path);
    try {
        const auto final = replay(t);
        if (!(final == t.final)) {
            std::cout << "FAIL replay: final configuration differs from the logged one\n";
            return check_failed;
        }
        std::cout << "ok   replay: " << t.events.size() << " events, " << t.effective_events << " effective, "
                  << describe(t.params) << ", engine=" << to_string(t.engine) << '\n';
        if (walks) {
            const auto r = track(t);
            const auto c = collision_stats(r.collisions);
            std::cout << "ok   walks: " << c.collisions << " collisions (" << c.annihilations << " annihilations), "
                      << r.blockade_events.size() << " blockade events, " << r.exits << " exits\n";
        }
    } catch (const ReplayError& e) {
        std::cout << "FAIL replay at event " << e.event_index() << ": " << e.what() << '\n';
        return check_failed;
    } catch (const TrackingError& e) {
        std::cout << "FAIL walks: " << e.what() << '\n';
        return check_failed;
    }
    return ok;
}

std::string phase_svg(const PhaseGrid& g)
{
    const int cell = 6, margin = 40;
    const int w = margin * 2 + cell * (g.q_max - 1), h = margin * 2 + cell * (g.F_max - 1);
    auto x = [&](double q) { return margin + (q - 2) * cell + cell / 2.0; };
    auto y = [&](double F) { return h - margin - (F - 2) * cell - cell / 2.0; };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (const auto& c : g.cells) {
        if (c.sign <= 0) continue;
        const double cx = x(c.q), cy = y(c.F), r = cell * 0.35;
        os << "<path d=\"M" << cx - r << ' ' << cy - r << "L" << cx + r << ' ' << cy + r << "M" << cx - r << ' '
           << cy + r << "L" << cx + r << ' ' << cy - r << "\" stroke=\"black\" stroke-width=\"0.8\"/>\n";
    }
    const double q_end = std::min<double>(g.q_max, (g.F_max) / g.slope);
    os << "<line x1=\"" << x(2) << "\" y1=\"" << y(2 * g.slope) << "\" x2=\"" << x(q_end) << "\" y2=\""
       << y(g.slope * q_end) << "\" stroke=\"red\" stroke-dasharray=\"6 4\"/>\n";
    os << "<text x=\"" << w / 2 << "\" y=\"" << h - 8 << "\" font-size=\"12\" text-anchor=\"middle\">q</text>\n"
       << "<text x=\"10\" y=\"" << h / 2 << "\" font-size=\"12\">F</text>\n</svg>\n";
    return os.str();
}

int cmd_phase(const CLI::App& app, const Settings& s, int q_max, int F_max, bool render)
{
    const auto g = phase_grid(q_max, F_max);
    const auto dir = s.dir("phase");
    write_file_atomic(dir / "phase.csv", slurp_stream([&](std::ostream& os) { write_phase_csv(os, g); }));
    if (render) write_file_atomic(dir / "phase.svg", phase_svg(g));
    echo_config(app, dir, "phase");
    std::size_t positive = 0;
    for (const auto& c : g.cells) positive += c.sign > 0;
    std::printf("c = %.6f; %zu cells, %zu with omega > 0; (3,2) sign %d\n", g.slope, g.cells.size(), positive,
                q_max >= 3 ? g.at(3, 2).sign : 0);
    return ok;
}

int cmd_verify(const Settings& s, const std::string& suite, bool F_set, bool q_set, bool L_set)
{
    VerifyOptions o;
    if (F_set) o.F = s.F;
    if (q_set) o.q = s.q;
    if (L_set) o.L = s.L;
    o.replicas = s.replicas;
    o.seed = Seed{s.seed};
    o.threads = s.parallel;
    const auto results = run_suite(suite, o);
    bool all = true;
    for (const auto& r : results) {
        all = all && r.passed;
        std::printf("%s %s: %s\n", r.passed ? "ok  " : "FAIL", r.name.c_str(), r.detail.c_str());
    }
    std::printf("%s: %s\n", suite.c_str(), all ? "passed" : "FAILED");
    return all ? ok : check_failed;
}

std::vector<SweepCell> parse_cells(const std::vector<std::string>& specs)
{
    std::vector<SweepCell> cells;
    for (const auto& s : specs) {
        const auto colon = s.find(':');
        if (colon == std::string::npos) throw UsageError("sweep cell '" + s + "' must be written F:q");
        try {
            cells.push_back({std::stoi(s.substr(0, colon)), std::stoi(s.substr(colon + 1))});
        } catch (const std::logic_error&) {
            throw UsageError("sweep cell '" + s + "' must be written F:q");
        }
    }
    return cells;
}

int cmd_sweep(const CLI::App& app, const Settings& s, const std::vector<std::string>& specs)
{
    const auto dir = s.dir("sweep");
    SweepOptions o;
    o.L = s.L;
    o.topology = s.ring ? Topology::ring : parse_topology(s.topology);
    o.replicas = s.replicas.value_or(20);
    o.run = s.experiment();
    o.directory = dir / "cells";
    const auto result = sweep(parse_cells(specs), Seed{s.seed}, o);
    write_file_atomic(dir / "sweep.csv", result.csv);
    std::string failures;
    for (const auto& f : result.failures)
        failures += "F=" + std::to_string(f.cell.F) + " q=" + std::to_string(f.cell.q) + ": " + f.message + "\n";
    if (!failures.empty()) write_file_atomic(dir / "failures.txt", failures);
    else fs::remove(dir / "failures.txt");
    echo_config(app, dir, "sweep");
    std::printf("%llu cells run, %llu reused, %zu failed\n", static_cast<unsigned long long>(result.cells_run),
                static_cast<unsigned long long>(result.cells_reused), result.failures.size());
    std::cout << failures;
    return result.failures.empty() ? ok : runtime;
}

int cmd_trace(const CLI::App& app, const Settings& s, bool no_image)
{
    const auto params = s.params();
    const double horizon = std::isfinite(s.horizon) ? s.horizon : static_cast<double>(params.L);
    const auto dir = s.dir("trace");
    const auto out = spacetime_export(params, horizon, Seed{s.seed}, dir / "trace", s.snapshots, !no_image);
    echo_config(app, dir, "trace");
    std::cout << "wrote " << out.trajectory.string() << ", " << out.zeta.string();
    if (out.image) std::cout << ", " << out.image->string() << " (" << params.edge_count() << "x" << s.snapshots << ")";
    std::cout << '\n';
    return ok;
}

int cmd_density(const CLI::App& app, const Settings& s)
{
    const auto params = s.params();
    if (!std::isfinite(s.horizon)) throw UsageError("density needs a finite --horizon");
    const auto curve =
        density_curve(params, uniform_grid(s.horizon, s.snapshots), s.replicas.value_or(20), Seed{s.seed}, s.experiment());
    const auto dir = s.dir("density");
    const auto text = slurp_stream([&](std::ostream& os) { write_density_csv(os, curve); });
    write_file_atomic(dir / "density.csv", text);
    echo_config(app, dir, "density");
    std::cout << text;
    return ok;
}

int cmd_tails(const CLI::App& app, const Settings& s, int n_max)
{
    if (n_max < 1) throw UsageError("--N-max must be >= 1");
    std::vector<TailRow> rows;
    const std::uint64_t samples = s.replicas.value_or(100'000);
    for (int N = 1; N <= n_max; ++N)
        rows.push_back({N, exact_tail_le_zero(s.q, s.F, N), mc_tail(s.q, s.F, N, samples, replica_seed(Seed{s.seed}, N))});
    const auto dir = s.dir("tails");
    const auto text = slurp_stream([&](std::ostream& os) {
        os << "# axelrod-lab tails v1 q=" << s.q << " F=" << s.F << " omega=" << omega(s.q, s.F)
           << " samples=" << samples << '\n';
        write_tail_csv(os, rows);
    });
    write_file_atomic(dir / "tails.csv", text);
    echo_config(app, dir, "tails");
    std::cout << text;
    return ok;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Simulator and verification tools for the one-dimensional Axelrod model"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "read settings from a TOML/INI file; flags take precedence");

    Settings s;
    auto* F_opt = app.add_option("--F", s.F, "features per vertex")->capture_default_str();
    auto* q_opt = app.add_option("--q", s.q, "states per feature")->capture_default_str();
    auto* L_opt = app.add_option("--L", s.L, "number of vertices")->capture_default_str();
    app.add_option("--topology", s.topology, "interval or ring")
        ->check(CLI::IsMember({"interval", "ring"}))
        ->capture_default_str();
    app.add_flag("--ring", s.ring, "shorthand for --topology ring");
    app.add_option("--engine", s.engine, "harris or gillespie")
        ->check(CLI::IsMember({"harris", "gillespie"}))
        ->capture_default_str();
    app.add_option("--horizon", s.horizon, "time horizon (inf runs to absorption)")->capture_default_str();
    app.add_option("--event-cap", s.event_cap, "maximum events per run")->capture_default_str();
    app.add_option("--replicas", s.replicas, "number of replicas");
    app.add_option("--seed", s.seed, "base seed")->capture_default_str();
    app.add_option("--snapshots", s.snapshots, "snapshot count for curves and traces")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--out", s.out, "output root")->envname("AXELROD_LAB_OUT")->capture_default_str();
    app.add_option("--parallel", s.parallel, "worker threads (0 = all cores)")->capture_default_str();

    auto* simulate = app.add_subcommand("simulate", "run trajectories and write replayable logs");
    std::string log_policy = "all";
    simulate->add_option("--log", log_policy, "all, effective or none")
        ->check(CLI::IsMember({"all", "effective", "none"}))
        ->capture_default_str();

    auto* replay_cmd = app.add_subcommand("replay", "validate a trajectory log by replaying it");
    std::string log_path;
    bool walks = false;
    replay_cmd->add_option("log", log_path, "trajectory log")->required()->check(CLI::ExistingFile);
    replay_cmd->add_flag("--walks", walks, "also track the particle system");

    auto* phase = app.add_subcommand("phase", "sign of omega over a (q, F) grid");
    int q_max = 100, F_max = 100;
    bool no_render = false;
    phase->add_option("--q-max", q_max, "largest q")->check(CLI::Range(2, 100000))->capture_default_str();
    phase->add_option("--F-max", F_max, "largest F")->check(CLI::Range(2, 100000))->capture_default_str();
    phase->add_flag("--no-render", no_render, "skip the SVG rendering");

    auto* verify = app.add_subcommand("verify", "run a verification suite");
    std::string suite;
    std::string suites;
    for (const auto& n : suite_names()) suites += (suites.empty() ? "" : ", ") + n;
    verify->add_option("suite", suite, "one of: " + suites)->required();

    auto* sweep_cmd = app.add_subcommand("sweep", "fixation statistics over a grid of (F, q) cells");
    std::vector<std::string> cells;
    sweep_cmd->add_option("--cells", cells, "cells written F:q, e.g. 2:2 2:3")->delimiter(',');

    auto* trace = app.add_subcommand("trace", "space-time export of one run");
    bool no_image = false;
    trace->add_flag("--no-image", no_image, "skip the PNG rendering");

    auto* fixation = app.add_subcommand("fixation", "absorption, blockade and domain statistics");
    auto* density = app.add_subcommand("density", "particle and blockade densities over time");
    auto* collisions = app.add_subcommand("collisions", "annihilation fraction among collisions");
    std::uint64_t min_collisions = 20'000;
    collisions->add_option("--min-collisions", min_collisions, "collisions to accumulate")->capture_default_str();
    auto* martingale = app.add_subcommand("martingale", "descendant counts of one site");
    double time = 10.0;
    std::optional<int> site;
    martingale->add_option("--time", time, "time of the descendant count")->capture_default_str();
    martingale->add_option("--site", site, "origin vertex (default: centre)");
    auto* race = app.add_subcommand("race", "six-arrow race for a pair of good particles");
    auto* tails = app.add_subcommand("tails", "exact and Monte Carlo tails of the weight sums");
    int n_max = 30;
    tails->add_option("--N-max", n_max, "largest N")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : invalid;
    }

    try {
        if (*simulate) return cmd_simulate(app, s, log_policy);
        if (*replay_cmd) return cmd_replay(log_path, walks);
        if (*phase) return cmd_phase(app, s, q_max, F_max, !no_render);
        if (*verify) return cmd_verify(s, suite, F_opt->count() > 0, q_opt->count() > 0, L_opt->count() > 0);
        if (*sweep_cmd) return cmd_sweep(app, s, cells);
        if (*trace) return cmd_trace(app, s, no_image);
        if (*density) return cmd_density(app, s);
        if (*tails) return cmd_tails(app, s, n_max);

        ExperimentReport report;
        std::string name;
        if (*fixation) {
            report = fixation_run(s.params(), s.replicas.value_or(100), Seed{s.seed}, s.experiment());
            name = "fixation";
        } else if (*collisions) {
            CollisionOptions o;
            o.run = s.experiment();
            report = collision_outcome_experiment(s.params(), min_collisions, Seed{s.seed}, o);
            name = "collisions";
        } else if (*martingale) {
            const auto p = s.params();
            report = martingale_experiment(p, time, site.value_or(p.L / 2), s.replicas.value_or(5000), Seed{s.seed},
                                           s.parallel);
            name = "martingale";
        } else if (*race) {
            report = six_arrow_race(s.q, s.replicas.value_or(100'000), Seed{s.seed});
            name = "race";
        }
        const auto dir = s.dir(name);
        write_report(dir, report);
        echo_config(app, dir, name);
        return ok;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return invalid;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return runtime;
    }
}
