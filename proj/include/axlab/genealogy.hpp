#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

#include "axlab/engine.hpp"

namespace axlab {

/// A genealogy invariant (uniqueness, feature identity, non-crossing, partition) failed.
class GenealogyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Feature-i ancestors of every vertex at one time.
struct AncestorMap {
    int feature = 0;
    double time = 0.0;
    std::vector<int> ancestor;
};

/// Vertices whose feature-i ancestor at `time` is `origin`. On the interval this is the
/// contiguous block [first, last]; empty when count == 0.
struct DescendantSet {
    int origin = 0;
    int feature = 0;
    double time = 0.0;
    int count = 0;
    int first = 0;
    int last = -1;
};

/// Forward ancestor bookkeeping along an event stream. An effective i-arrow x -> y makes
/// y inherit x's feature-i ancestor. With `check` set, every update verifies feature
/// identity for the updated cell and (on the interval) local non-crossing order.
class AncestorTracker {
public:
    explicit AncestorTracker(const Configuration& initial, bool check = true);

    void observe(const ArrowRecord& arrow);

    const std::vector<int>& ancestors(int feature) const { return ancestors_[static_cast<std::size_t>(feature)]; }
    const Configuration& configuration() const { return current_; }
    std::uint64_t checks() const { return checks_; }

    /// Full check of all invariants for every feature at the current time.
    void check_all() const;

private:
    Configuration initial_;
    Configuration current_;
    std::vector<std::vector<int>> ancestors_;
    bool check_;
    std::uint64_t checks_ = 0;
};

/// Traces (x, t) backward through the effective i-arrows of the log.
int ancestor(const Trajectory& t, int x, int feature, double time);

/// Ancestor of every vertex at `time`, computed forward. Checks uniqueness, feature
/// identity and (on the interval) monotonicity; throws GenealogyError on failure.
AncestorMap ancestry_profile(const Trajectory& t, int feature, double time);

/// Inverts an ancestor map. Throws GenealogyError if an interval-topology set is not
/// contiguous or the counts do not add up to L.
std::vector<DescendantSet> descendant_sets(const AncestorMap& map, Topology topology);

DescendantSet descendants(const Trajectory& t, int origin, int feature, double time);

/// Earliest time at which `origin` becomes the feature-i ancestor of `target`.
std::optional<double> first_hit_time(const Trajectory& t, int origin, int feature, int target);

/// Throws GenealogyError unless the map is a valid ancestry for `at_time` given `initial`.
void check_ancestor_map(const AncestorMap& map, const Configuration& initial, const Configuration& at_time);

/// CSV "time,feature,vertex,ancestor" rows for each snapshot map.
void write_ancestors_csv(std::ostream& os, const std::vector<AncestorMap>& snapshots);

/// CSV "feature,vertex,descendants,first,last" rows.
void write_descendants_csv(std::ostream& os, const std::vector<DescendantSet>& sets);

}  // namespace axlab
