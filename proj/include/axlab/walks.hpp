#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "axlab/engine.hpp"
#include "axlab/particles.hpp"
#include "axlab/stats.hpp"

namespace axlab {

/// The incrementally tracked particle field diverged from the configuration, or an event
/// broke a walk-system invariant. Either one points at an engine bug.
class TrackingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Outcome { annihilation, coalescence };
std::string_view to_string(Outcome o);

/// What happened to the particle that jumped off the source edge.
enum class MoveKind {
    move,          ///< landed on an empty cell
    annihilation,  ///< landed on an occupied cell, both vanished
    coalescence,   ///< landed on an occupied cell, one remains
    exit,          ///< jumped past an interval end
};
std::string_view to_string(MoveKind k);

struct ParticleMove {
    double time = 0.0;
    int edge_from = 0;
    int edge_to = -1;  ///< -1 for an exit
    int feature = 0;
    MoveKind kind = MoveKind::move;
};

struct CollisionRecord {
    double time = 0.0;
    int edge_from = 0;
    int edge_to = 0;
    int feature = 0;
    Outcome outcome = Outcome::annihilation;
    bool target_was_blockade = false;
};

enum class BlockadeKind { formed, destroyed };
std::string_view to_string(BlockadeKind k);

struct BlockadeEvent {
    double time = 0.0;
    int edge = 0;
    BlockadeKind kind = BlockadeKind::formed;
};

/// Pile size of one edge right after an event.
struct ZetaChange {
    double time = 0.0;
    int edge = 0;
    int count = 0;
};

struct TrackOptions {
    /// Full derive_particles cross-check every this many effective events (0 disables;
    /// a final check always runs).
    std::uint64_t audit_interval = 10'000;
    bool keep_moves = true;
    bool keep_zeta = true;
};

struct TrackResult {
    std::vector<int> initial_zeta;
    std::vector<ParticleMove> moves;
    std::vector<CollisionRecord> collisions;
    std::vector<BlockadeEvent> blockade_events;
    std::vector<ZetaChange> zeta_changes;
    std::vector<std::int64_t> initial_per_feature;
    std::vector<std::int64_t> final_per_feature;
    std::uint64_t effective_events = 0;
    std::uint64_t audits = 0;
    std::uint64_t exits = 0;
};

/// Follows the walk system along an event stream, one effective arrow at a time.
class ParticleTracker {
public:
    explicit ParticleTracker(const Configuration& initial, TrackOptions options = {});

    /// Non-effective arrows are ignored. Throws TrackingError on any inconsistency.
    void observe(const ArrowRecord& arrow);

    /// Compares the tracked field against derive_particles of the tracked configuration.
    void audit();

    const Configuration& configuration() const { return config_; }
    const ParticleField& field() const { return field_; }
    const TrackResult& result() const { return result_; }
    TrackResult finish();

private:
    TrackOptions options_;
    Configuration config_;
    ParticleField field_;
    std::vector<std::int64_t> per_feature_;
    TrackResult result_;
};

/// Runs a ParticleTracker over the whole log of a trajectory.
TrackResult track(const Trajectory& trajectory, TrackOptions options = {});

struct CollisionStats {
    std::uint64_t collisions = 0;
    std::uint64_t annihilations = 0;
    std::uint64_t coalescences = 0;
    /// Absent when there were no collisions.
    std::optional<double> fraction_annihilation;
    Interval wilson95{0.0, 1.0};
    /// Outcome counts split by whether the destination was a blockade.
    std::uint64_t annihilations_on_blockade = 0;
    std::uint64_t coalescences_on_blockade = 0;
};

CollisionStats collision_stats(const std::vector<CollisionRecord>& records);

/// CSV with header "time,edge,feature,outcome,target_was_blockade"; edge is the source edge.
void write_collisions_csv(std::ostream& os, const std::vector<CollisionRecord>& records);

/// Space-time stream: "# initial_zeta" line with the E initial pile sizes, then
/// "time,edge,zeta" rows for every change.
void write_zeta_stream(std::ostream& os, const TrackResult& result);

}  // namespace axlab
