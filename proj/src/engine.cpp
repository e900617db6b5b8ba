#include "axlab/engine.hpp"

#include <cmath>
#include <string>

#include "axlab/particles.hpp"

namespace axlab {

std::string_view to_string(EngineKind e)
{
    return e == EngineKind::harris ? "harris" : "gillespie";
}

std::string_view to_string(StopReason s)
{
    switch (s) {
    case StopReason::absorbed: return "absorbed";
    case StopReason::horizon: return "horizon";
    case StopReason::event_cap: return "event_cap";
    }
    return "?";
}

std::string_view to_string(LogPolicy l)
{
    switch (l) {
    case LogPolicy::all: return "all";
    case LogPolicy::effective: return "effective";
    case LogPolicy::none: return "none";
    }
    return "?";
}

EngineKind parse_engine(std::string_view s)
{
    if (s == "harris") return EngineKind::harris;
    if (s == "gillespie") return EngineKind::gillespie;
    throw std::invalid_argument("unknown engine '" + std::string(s) + "' (expected harris or gillespie)");
}

StopReason parse_stop_reason(std::string_view s)
{
    if (s == "absorbed") return StopReason::absorbed;
    if (s == "horizon") return StopReason::horizon;
    if (s == "event_cap") return StopReason::event_cap;
    throw std::invalid_argument("unknown stop reason '" + std::string(s) + "'");
}

LogPolicy parse_log_policy(std::string_view s)
{
    if (s == "all") return LogPolicy::all;
    if (s == "effective") return LogPolicy::effective;
    if (s == "none") return LogPolicy::none;
    throw std::invalid_argument("unknown log policy '" + std::string(s) + "'");
}

ReplayError::ReplayError(std::size_t event_index, const std::string& what)
    : std::runtime_error("event " + std::to_string(event_index) + ": " + what), index_(event_index)
{
}

namespace {

/// Configuration plus its particle field, updated together.
class LiveState {
public:
    explicit LiveState(const Configuration& c) : config_(c), field_(derive_particles(c))
    {
        for (int u = 0; u < field_.edges(); ++u) live_ += is_live(u);
    }

    const Configuration& config() const { return config_; }
    const ParticleField& field() const { return field_; }
    bool absorbed() const { return live_ == 0; }
    bool is_live(int u) const { return field_.count(u) > 0 && field_.count(u) < field_.features(); }

    /// `target` takes feature i from `source` across edge u. Returns the far edge of the
    /// target, or -1 at an interval end.
    int copy_feature(int source, int target, int u, int i)
    {
        const auto& p = config_.params();
        int far = -1;
        int far_vertex = -1;
        if (auto z = p.opposite_neighbor(target, source)) {
            far_vertex = *z;
            far = *p.edge_between(target, far_vertex);
        }
        live_ -= is_live(u);
        if (far >= 0) live_ -= is_live(far);

        config_.set_state(target, i, config_.state(source, i));
        field_.set(u, i, false);
        if (far >= 0) field_.set(far, i, config_.state(target, i) != config_.state(far_vertex, i));

        live_ += is_live(u);
        if (far >= 0) live_ += is_live(far);
        return far;
    }

private:
    Configuration config_;
    ParticleField field_;
    int live_ = 0;
};

double next_time(double now, double dt)
{
    double t = now + dt;
    if (!(t > now)) t = std::nextafter(now, std::numeric_limits<double>::infinity());
    return t;
}

bool keep(LogPolicy policy, const ArrowRecord& r)
{
    return policy == LogPolicy::all || (policy == LogPolicy::effective && r.effective);
}

Trajectory start(EngineKind engine, const Configuration& initial, const RunOptions& options, Seed seed)
{
    initial.params().validate();
    if (!(options.horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    Trajectory t;
    t.params = initial.params();
    t.engine = engine;
    t.seed = seed;
    t.options = options;
    t.initial = initial;
    return t;
}

/// Fenwick tree over nonnegative integer edge weights with weighted index search.
class WeightTree {
public:
    explicit WeightTree(std::size_t n) : tree_(n + 1, 0), values_(n, 0)
    {
        while (top_ * 2 <= n) top_ *= 2;
    }

    void set(std::size_t i, std::int64_t w)
    {
        const std::int64_t delta = w - values_[i];
        if (delta == 0) return;
        values_[i] = w;
        total_ += delta;
        for (std::size_t k = i + 1; k < tree_.size(); k += k & (~k + 1)) tree_[k] += delta;
    }

    std::int64_t total() const { return total_; }

    /// Smallest index whose inclusive prefix sum exceeds r, for 0 <= r < total().
    std::size_t find(std::int64_t r) const
    {
        std::size_t pos = 0;
        for (std::size_t step = top_; step > 0; step >>= 1) {
            const std::size_t next = pos + step;
            if (next < tree_.size() && tree_[next] <= r) {
                pos = next;
                r -= tree_[next];
            }
        }
        return pos;
    }

private:
    std::vector<std::int64_t> tree_;
    std::vector<std::int64_t> values_;
    std::int64_t total_ = 0;
    std::size_t top_ = 1;
};

}  // namespace

Trajectory run_harris(const Configuration& initial, const RunOptions& options, Seed seed,
                      const EventObserver& observer)
{
    Trajectory traj = start(EngineKind::harris, initial, options, seed);
    const ModelParams& p = traj.params;
    const bool ring = p.topology == Topology::ring;
    const auto cells = static_cast<std::uint64_t>(p.L) * static_cast<std::uint64_t>(p.F);
    const double total_rate = static_cast<double>(cells);

    Rng rng(seed);
    LiveState state(initial);
    double now = 0.0;

    while (true) {
        if (state.absorbed()) {
            traj.absorbed = true;
            traj.stop = StopReason::absorbed;
            traj.end_time = now;
            break;
        }
        if (traj.arrows_drawn >= options.event_cap) {
            traj.stop = StopReason::event_cap;
            traj.end_time = now;
            break;
        }
        const double when = next_time(now, rng.exponential(total_rate));
        if (when > options.horizon) {
            traj.stop = StopReason::horizon;
            traj.end_time = options.horizon;
            break;
        }
        const std::uint64_t cell = rng.below(cells);
        const bool rightward = rng.coin();
        const double mark = rng.uniform();
        now = when;
        ++traj.arrows_drawn;

        const int x = static_cast<int>(cell / static_cast<std::uint64_t>(p.F));
        const int i = static_cast<int>(cell % static_cast<std::uint64_t>(p.F));
        int y = rightward ? x + 1 : x - 1;
        if (ring) y = (y + p.L) % p.L;
        else if (y < 0 || y >= p.L) continue;

        const int u = rightward ? x : y;
        const int j = state.field().count(u);
        ArrowRecord rec{now, x, y, i, mark, false, false};
        rec.active = j != 0 && mark <= jump_rate_value(j, p.F);
        rec.effective = rec.active && state.config().state(x, i) != state.config().state(y, i);
        if (rec.effective) {
            state.copy_feature(x, y, u, i);
            ++traj.effective_events;
        }
        if (keep(options.log, rec)) traj.events.push_back(rec);
        if (observer) observer(rec, state.config());
    }
    traj.final = state.config();
    return traj;
}

Trajectory run_gillespie(const Configuration& initial, const RunOptions& options, Seed seed,
                         const EventObserver& observer)
{
    Trajectory traj = start(EngineKind::gillespie, initial, options, seed);
    const ModelParams& p = traj.params;
    const int edges = p.edge_count();

    Rng rng(seed);
    LiveState state(initial);
    WeightTree weights(static_cast<std::size_t>(edges));
    // Edge with j particles interacts at rate (F - j) / F; weights carry the numerator.
    auto refresh = [&](int u) {
        weights.set(static_cast<std::size_t>(u), state.is_live(u) ? p.F - state.field().count(u) : 0);
    };
    for (int u = 0; u < edges; ++u) refresh(u);

    double now = 0.0;
    while (true) {
        if (weights.total() == 0) {
            traj.absorbed = true;
            traj.stop = StopReason::absorbed;
            traj.end_time = now;
            break;
        }
        if (traj.arrows_drawn >= options.event_cap) {
            traj.stop = StopReason::event_cap;
            traj.end_time = now;
            break;
        }
        const double rate = static_cast<double>(weights.total()) / p.F;
        const double when = next_time(now, rng.exponential(rate));
        if (when > options.horizon) {
            traj.stop = StopReason::horizon;
            traj.end_time = options.horizon;
            break;
        }
        const int u = static_cast<int>(weights.find(static_cast<std::int64_t>(
            rng.below(static_cast<std::uint64_t>(weights.total())))));
        const int j = state.field().count(u);
        auto pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(j)));
        int i = 0;
        for (; i < p.F; ++i)
            if (state.field().occupied(u, i) && pick-- == 0) break;
        const bool rightward = rng.coin();
        const double mark = rng.uniform() * jump_rate_value(j, p.F);
        now = when;
        ++traj.arrows_drawn;

        const int x = rightward ? p.left_of(u) : p.right_of(u);
        const int y = rightward ? p.right_of(u) : p.left_of(u);
        const int far = state.copy_feature(x, y, u, i);
        refresh(u);
        if (far >= 0) refresh(far);
        ++traj.effective_events;

        const ArrowRecord rec{now, x, y, i, mark, true, true};
        if (keep(options.log, rec)) traj.events.push_back(rec);
        if (observer) observer(rec, state.config());
    }
    traj.final = state.config();
    return traj;
}

Trajectory run_engine(EngineKind engine, const Configuration& initial, const RunOptions& options,
                      Seed seed, const EventObserver& observer)
{
    return engine == EngineKind::harris ? run_harris(initial, options, seed, observer)
                                        : run_gillespie(initial, options, seed, observer);
}

Configuration replay_prefix(const Trajectory& t, std::size_t count)
{
    if (t.options.log == LogPolicy::none && t.effective_events > 0)
        throw ContractError("replay: trajectory was recorded without an event log");
    if (count > t.events.size()) throw ContractError("replay: prefix longer than the log");
    const ModelParams& p = t.params;
    LiveState state(t.initial);
    double prev = -1.0;
    for (std::size_t k = 0; k < count; ++k) {
        const ArrowRecord& ev = t.events[k];
        if (!(ev.time > prev)) throw ReplayError(k, "event times are not strictly increasing");
        if (ev.time > t.end_time) throw ReplayError(k, "event after the end of the trajectory");
        prev = ev.time;
        const auto u = p.edge_between(ev.source, ev.target);
        if (!u) throw ReplayError(k, "source and target are not adjacent");
        if (ev.feature < 0 || ev.feature >= p.F) throw ReplayError(k, "feature out of range");
        if (!(ev.mark >= 0.0 && ev.mark < 1.0)) throw ReplayError(k, "mark outside [0, 1)");
        const int j = state.field().count(*u);
        const bool active = j != 0 && ev.mark <= jump_rate_value(j, p.F);
        if (active != ev.active) throw ReplayError(k, "active flag disagrees with the particle count");
        const bool disagree = state.config().state(ev.source, ev.feature) != state.config().state(ev.target, ev.feature);
        if (ev.effective != (active && disagree)) throw ReplayError(k, "effective flag disagrees with the configuration");
        if (ev.effective) state.copy_feature(ev.source, ev.target, *u, ev.feature);
    }
    return state.config();
}

Configuration replay(const Trajectory& t)
{
    return replay_prefix(t, t.events.size());
}

}  // namespace axlab
