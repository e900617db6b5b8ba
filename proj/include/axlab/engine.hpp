#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "axlab/model.hpp"

namespace axlab {

enum class EngineKind { harris, gillespie };
enum class StopReason { absorbed, horizon, event_cap };

/// Which arrows a run keeps in its log. Observers always see every arrow.
enum class LogPolicy { all, effective, none };

std::string_view to_string(EngineKind e);
std::string_view to_string(StopReason s);
std::string_view to_string(LogPolicy l);
EngineKind parse_engine(std::string_view s);
StopReason parse_stop_reason(std::string_view s);
LogPolicy parse_log_policy(std::string_view s);

/// One arrow of the percolation structure: at `time`, `target` may copy feature
/// `feature` of `source`.
///
/// `active` holds when the edge carries j > 0 particles and mark <= 1/j - 1/F just
/// before the arrow. `effective` additionally requires the two vertices to disagree on
/// the feature, i.e. the arrow changed the configuration.
struct ArrowRecord {
    double time = 0.0;
    int source = 0;
    int target = 0;
    int feature = 0;
    double mark = 0.0;
    bool active = false;
    bool effective = false;

    friend bool operator==(const ArrowRecord&, const ArrowRecord&) = default;
};

inline constexpr std::uint64_t default_event_cap = 1'000'000'000ULL;

struct RunOptions {
    /// +infinity means run to absorption (bounded by event_cap).
    double horizon = std::numeric_limits<double>::infinity();
    /// Maximum number of clock rings (Harris) or transitions (Gillespie).
    std::uint64_t event_cap = default_event_cap;
    LogPolicy log = LogPolicy::all;

    friend bool operator==(const RunOptions&, const RunOptions&) = default;
};

struct Trajectory {
    ModelParams params;
    EngineKind engine = EngineKind::harris;
    Seed seed;
    RunOptions options;
    Configuration initial;
    std::vector<ArrowRecord> events;
    Configuration final;
    double end_time = 0.0;
    bool absorbed = false;
    StopReason stop = StopReason::horizon;
    /// Clock rings consumed, including arrows pointing off the interval.
    std::uint64_t arrows_drawn = 0;
    std::uint64_t effective_events = 0;

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Called after each arrow is processed, with the configuration after the arrow.
using EventObserver = std::function<void(const ArrowRecord&, const Configuration&)>;

/// Graphical construction: all L*F rate-one clocks merged into one exponential stream,
/// a uniform owner cell per ring, a fair direction and a uniform thinning mark.
Trajectory run_harris(const Configuration& initial, const RunOptions& options, Seed seed,
                      const EventObserver& observer = {});

/// Direct simulation of the generator: only transitions that change the configuration.
/// Edge with j disagreements interacts at rate 1 - j/F, copies a uniformly chosen
/// disagreeing feature in a uniformly chosen direction.
Trajectory run_gillespie(const Configuration& initial, const RunOptions& options, Seed seed,
                         const EventObserver& observer = {});

Trajectory run_engine(EngineKind engine, const Configuration& initial, const RunOptions& options,
                      Seed seed, const EventObserver& observer = {});

/// The log fails validation at `event_index`.
class ReplayError : public std::runtime_error {
public:
    ReplayError(std::size_t event_index, const std::string& what);
    std::size_t event_index() const { return index_; }

private:
    std::size_t index_;
};

/// Re-applies the logged events to the initial configuration, validating every record
/// (time order, adjacency, active and effective flags). Returns the final configuration.
Configuration replay(const Trajectory& t);

/// State after the first `count` events of the log.
Configuration replay_prefix(const Trajectory& t, std::size_t count);

}  // namespace axlab
