#include "axlab/walks.hpp"

#include <ostream>

#include "axlab/trajectory_io.hpp"

namespace axlab {

std::string_view to_string(Outcome o)
{
    return o == Outcome::annihilation ? "annihilation" : "coalescence";
}

std::string_view to_string(MoveKind k)
{
    switch (k) {
    case MoveKind::move: return "move";
    case MoveKind::annihilation: return "annihilation";
    case MoveKind::coalescence: return "coalescence";
    case MoveKind::exit: return "exit";
    }
    return "?";
}

std::string_view to_string(BlockadeKind k)
{
    return k == BlockadeKind::formed ? "formed" : "destroyed";
}

ParticleTracker::ParticleTracker(const Configuration& initial, TrackOptions options)
    : options_(options), config_(initial), field_(derive_particles(initial))
{
    result_.initial_zeta = field_.counts();
    for (int i = 0; i < field_.features(); ++i) per_feature_.push_back(field_.total_on_feature(i));
    result_.initial_per_feature = per_feature_;
}

void ParticleTracker::observe(const ArrowRecord& arrow)
{
    if (!arrow.effective) return;
    const ModelParams& p = config_.params();
    const int x = arrow.source;
    const int y = arrow.target;
    const int i = arrow.feature;
    const auto u = p.edge_between(x, y);
    if (!u) throw TrackingError("effective arrow between non-adjacent vertices");
    if (!field_.occupied(*u, i))
        throw TrackingError("effective arrow across an empty cell (edge " + std::to_string(*u) + ")");
    if (field_.is_blockade(*u))
        throw TrackingError("effective arrow out of a blockade (edge " + std::to_string(*u) + ")");

    const auto z = p.opposite_neighbor(y, x);
    const int w = z ? *p.edge_between(y, *z) : -1;
    const bool w_was_occupied = w >= 0 && field_.occupied(w, i);
    const bool w_was_blockade = w >= 0 && field_.is_blockade(w);

    config_.set_state(y, i, config_.state(x, i));
    field_.set(*u, i, false);
    bool w_occupied = false;
    if (w >= 0) {
        w_occupied = config_.state(y, i) != config_.state(*z, i);
        field_.set(w, i, w_occupied);
    }

    MoveKind kind;
    if (w < 0) {
        kind = MoveKind::exit;
        per_feature_[i] -= 1;
        ++result_.exits;
    } else if (!w_was_occupied) {
        if (!w_occupied) throw TrackingError("particle vanished on an empty destination");
        kind = MoveKind::move;
    } else if (w_occupied) {
        // With two states, the far neighbour must hold the copied state.
        if (p.q == 2) throw TrackingError("coalescence with q = 2");
        kind = MoveKind::coalescence;
        per_feature_[i] -= 1;
    } else {
        kind = MoveKind::annihilation;
        per_feature_[i] -= 2;
    }

    if (kind == MoveKind::annihilation || kind == MoveKind::coalescence) {
        result_.collisions.push_back({arrow.time, *u, w, i,
                                      kind == MoveKind::annihilation ? Outcome::annihilation : Outcome::coalescence,
                                      w_was_blockade});
    }
    if (w >= 0) {
        const bool blockade_now = field_.is_blockade(w);
        if (blockade_now && !w_was_blockade) result_.blockade_events.push_back({arrow.time, w, BlockadeKind::formed});
        if (!blockade_now && w_was_blockade) {
            if (kind != MoveKind::annihilation) throw TrackingError("blockade destroyed without an annihilation");
            result_.blockade_events.push_back({arrow.time, w, BlockadeKind::destroyed});
        }
    }
    if (options_.keep_moves) result_.moves.push_back({arrow.time, *u, w, i, kind});
    if (options_.keep_zeta) {
        result_.zeta_changes.push_back({arrow.time, *u, field_.count(*u)});
        if (w >= 0 && (w_was_occupied != w_occupied))
            result_.zeta_changes.push_back({arrow.time, w, field_.count(w)});
    }

    ++result_.effective_events;
    if (options_.audit_interval != 0 && result_.effective_events % options_.audit_interval == 0) audit();
}

void ParticleTracker::audit()
{
    ++result_.audits;
    if (!(field_ == derive_particles(config_)))
        throw TrackingError("tracked particle field diverged from the configuration after " +
                            std::to_string(result_.effective_events) + " effective events");
    for (int i = 0; i < field_.features(); ++i)
        if (field_.total_on_feature(i) != per_feature_[static_cast<std::size_t>(i)])
            throw TrackingError("particle count on feature " + std::to_string(i) + " does not match the move tally");
}

TrackResult ParticleTracker::finish()
{
    audit();
    result_.final_per_feature = per_feature_;
    return std::move(result_);
}

TrackResult track(const Trajectory& trajectory, TrackOptions options)
{
    if (trajectory.options.log == LogPolicy::none && trajectory.effective_events > 0)
        throw ContractError("track: trajectory was recorded without an event log");
    ParticleTracker tracker(trajectory.initial, options);
    for (const auto& ev : trajectory.events) tracker.observe(ev);
    if (!(tracker.configuration() == trajectory.final))
        throw TrackingError("tracked configuration does not match the trajectory's final state");
    return tracker.finish();
}

CollisionStats collision_stats(const std::vector<CollisionRecord>& records)
{
    CollisionStats s;
    for (const auto& r : records) {
        ++s.collisions;
        if (r.outcome == Outcome::annihilation) {
            ++s.annihilations;
            s.annihilations_on_blockade += r.target_was_blockade;
        } else {
            ++s.coalescences;
            s.coalescences_on_blockade += r.target_was_blockade;
        }
    }
    if (s.collisions > 0) {
        s.fraction_annihilation = static_cast<double>(s.annihilations) / static_cast<double>(s.collisions);
        s.wilson95 = wilson_interval(s.annihilations, s.collisions);
    }
    return s;
}

void write_collisions_csv(std::ostream& os, const std::vector<CollisionRecord>& records)
{
    os << "time,edge,feature,outcome,target_was_blockade\n";
    for (const auto& r : records)
        os << format_real(r.time) << ',' << r.edge_from << ',' << r.feature << ','
           << to_string(r.outcome) << ',' << (r.target_was_blockade ? 1 : 0) << '\n';
}

void write_zeta_stream(std::ostream& os, const TrackResult& result)
{
    os << "# initial_zeta";
    for (int z : result.initial_zeta) os << ' ' << z;
    os << "\ntime,edge,zeta\n";
    for (const auto& c : result.zeta_changes) os << format_real(c.time) << ',' << c.edge << ',' << c.count << '\n';
}

}  // namespace axlab
