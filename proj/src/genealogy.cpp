#include "axlab/genealogy.hpp"

#include <numeric>
#include <ostream>

#include "axlab/trajectory_io.hpp"

namespace axlab {

namespace {

void require_log(const Trajectory& t)
{
    if (t.options.log == LogPolicy::none && t.effective_events > 0)
        throw ContractError("genealogy queries need a trajectory with an event log");
}

}  // namespace

AncestorTracker::AncestorTracker(const Configuration& initial, bool check)
    : initial_(initial), current_(initial), check_(check)
{
    std::vector<int> identity(static_cast<std::size_t>(initial.vertices()));
    std::iota(identity.begin(), identity.end(), 0);
    ancestors_.assign(static_cast<std::size_t>(initial.features()), identity);
}

void AncestorTracker::observe(const ArrowRecord& arrow)
{
    if (!arrow.effective) return;
    const int x = arrow.source;
    const int y = arrow.target;
    const int i = arrow.feature;
    auto& a = ancestors_[static_cast<std::size_t>(i)];
    a[static_cast<std::size_t>(y)] = a[static_cast<std::size_t>(x)];
    current_.set_state(y, i, current_.state(x, i));
    if (!check_) return;

    ++checks_;
    const int origin = a[static_cast<std::size_t>(y)];
    if (current_.state(y, i) != initial_.state(origin, i))
        throw GenealogyError("feature identity fails at vertex " + std::to_string(y));
    if (current_.params().topology == Topology::interval) {
        const int L = current_.vertices();
        if (y > 0 && a[static_cast<std::size_t>(y - 1)] > origin)
            throw GenealogyError("ancestral paths cross at vertices " + std::to_string(y - 1) + "," + std::to_string(y));
        if (y + 1 < L && origin > a[static_cast<std::size_t>(y + 1)])
            throw GenealogyError("ancestral paths cross at vertices " + std::to_string(y) + "," + std::to_string(y + 1));
    }
}

void AncestorTracker::check_all() const
{
    for (int i = 0; i < current_.features(); ++i) {
        AncestorMap m{i, 0.0, ancestors_[static_cast<std::size_t>(i)]};
        check_ancestor_map(m, initial_, current_);
    }
}

void check_ancestor_map(const AncestorMap& map, const Configuration& initial, const Configuration& at_time)
{
    const int L = initial.vertices();
    if (static_cast<int>(map.ancestor.size()) != L) throw GenealogyError("ancestor map has wrong size");
    for (int x = 0; x < L; ++x) {
        const int a = map.ancestor[static_cast<std::size_t>(x)];
        if (a < 0 || a >= L) throw GenealogyError("ancestor of vertex " + std::to_string(x) + " out of range");
        if (at_time.state(x, map.feature) != initial.state(a, map.feature))
            throw GenealogyError("feature identity fails at vertex " + std::to_string(x));
        if (initial.params().topology == Topology::interval && x > 0 &&
            map.ancestor[static_cast<std::size_t>(x - 1)] > a)
            throw GenealogyError("ancestor map is not monotone at vertex " + std::to_string(x));
    }
}

int ancestor(const Trajectory& t, int x, int feature, double time)
{
    require_log(t);
    if (x < 0 || x >= t.params.L) throw ContractError("ancestor: vertex out of range");
    if (feature < 0 || feature >= t.params.F) throw ContractError("ancestor: feature out of range");
    std::size_t k = 0;
    while (k < t.events.size() && t.events[k].time <= time) ++k;
    int current = x;
    while (k-- > 0) {
        const auto& ev = t.events[k];
        if (ev.effective && ev.feature == feature && ev.target == current) current = ev.source;
    }
    return current;
}

AncestorMap ancestry_profile(const Trajectory& t, int feature, double time)
{
    require_log(t);
    if (feature < 0 || feature >= t.params.F) throw ContractError("ancestry_profile: feature out of range");
    AncestorTracker tracker(t.initial, true);
    for (const auto& ev : t.events) {
        if (ev.time > time) break;
        tracker.observe(ev);
    }
    AncestorMap map{feature, time, tracker.ancestors(feature)};
    check_ancestor_map(map, t.initial, tracker.configuration());
    return map;
}

std::vector<DescendantSet> descendant_sets(const AncestorMap& map, Topology topology)
{
    const int L = static_cast<int>(map.ancestor.size());
    std::vector<DescendantSet> sets(static_cast<std::size_t>(L));
    for (int x = 0; x < L; ++x) sets[static_cast<std::size_t>(x)] = {x, map.feature, map.time, 0, 0, -1};
    for (int y = 0; y < L; ++y) {
        auto& s = sets[static_cast<std::size_t>(map.ancestor[static_cast<std::size_t>(y)])];
        if (s.count == 0) s.first = y;
        s.last = y;
        ++s.count;
    }
    int total = 0;
    for (const auto& s : sets) {
        total += s.count;
        if (topology == Topology::interval && s.count > 0 && s.last - s.first + 1 != s.count)
            throw GenealogyError("descendants of vertex " + std::to_string(s.origin) + " are not contiguous");
    }
    if (total != L) throw GenealogyError("descendant counts do not sum to L");
    return sets;
}

DescendantSet descendants(const Trajectory& t, int origin, int feature, double time)
{
    if (origin < 0 || origin >= t.params.L) throw ContractError("descendants: vertex out of range");
    const auto sets = descendant_sets(ancestry_profile(t, feature, time), t.params.topology);
    return sets[static_cast<std::size_t>(origin)];
}

std::optional<double> first_hit_time(const Trajectory& t, int origin, int feature, int target)
{
    require_log(t);
    if (origin == target) return 0.0;
    AncestorTracker tracker(t.initial, false);
    for (const auto& ev : t.events) {
        tracker.observe(ev);
        if (ev.effective && ev.target == target && ev.feature == feature &&
            tracker.ancestors(feature)[static_cast<std::size_t>(target)] == origin)
            return ev.time;
    }
    return std::nullopt;
}

void write_ancestors_csv(std::ostream& os, const std::vector<AncestorMap>& snapshots)
{
    os << "time,feature,vertex,ancestor\n";
    for (const auto& m : snapshots)
        for (std::size_t x = 0; x < m.ancestor.size(); ++x)
            os << format_real(m.time) << ',' << m.feature << ',' << x << ',' << m.ancestor[x] << '\n';
}

void write_descendants_csv(std::ostream& os, const std::vector<DescendantSet>& sets)
{
    os << "feature,vertex,descendants,first,last\n";
    for (const auto& s : sets) os << s.feature << ',' << s.origin << ',' << s.count << ',' << s.first << ',' << s.last << '\n';
}

}  // namespace axlab
