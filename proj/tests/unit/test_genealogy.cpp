#include "doctest.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "axlab/genealogy.hpp"
#include "axlab/stats.hpp"

using namespace axlab;

namespace {

RunOptions until(double h)
{
    RunOptions o;
    o.horizon = h;
    return o;
}

}  // namespace

TEST_CASE("ancestors at time zero are the identity")
{
    const auto c = sample_pi0({2, 3, 20, Topology::interval}, Seed{1});
    const auto t = run_harris(c, until(10.0), Seed{2});
    for (int x = 0; x < 20; ++x) CHECK(ancestor(t, x, 0, 0.0) == x);
    const auto m = ancestry_profile(t, 1, 0.0);
    for (int x = 0; x < 20; ++x) CHECK(m.ancestor[static_cast<std::size_t>(x)] == x);
    const auto d = descendants(t, 5, 0, 0.0);
    CHECK(d.count == 1);
    CHECK(d.first == 5);
    CHECK(d.last == 5);
}

TEST_CASE("single effective arrow")
{
    const ModelParams p{2, 3, 4, Topology::interval};
    Trajectory t;
    t.params = p;
    t.initial = Configuration(p, {{1, 1}, {2, 1}, {3, 1}, {3, 2}});
    t.events = {{1.0, 0, 1, 0, 0.1, true, true}};
    t.final = apply_update(t.initial, 1, 0, 0);
    t.end_time = 5.0;
    t.effective_events = 1;
    CHECK(ancestor(t, 1, 0, 0.5) == 1);
    CHECK(ancestor(t, 1, 0, 2.0) == 0);
    CHECK(ancestor(t, 1, 1, 2.0) == 1);
    CHECK(ancestor(t, 2, 0, 2.0) == 2);  // no arrow points at vertex 2
    const auto d = descendants(t, 0, 0, 2.0);
    CHECK(d.count == 2);
    CHECK(d.first == 0);
    CHECK(d.last == 1);
    CHECK(descendants(t, 1, 0, 2.0).count == 0);
    CHECK(first_hit_time(t, 0, 0, 1) == 1.0);
    CHECK(first_hit_time(t, 2, 0, 2) == 0.0);
    CHECK_FALSE(first_hit_time(t, 3, 0, 1).has_value());
}

TEST_CASE("forward profiles agree with backward tracing and satisfy the invariants")
{
    for (std::uint64_t s = 0; s < 25; ++s) {
        const ModelParams p{2 + static_cast<int>(s % 3), 2 + static_cast<int>(s % 4), 25, Topology::interval};
        const auto c = sample_pi0(p, Seed{s});
        const auto t = run_harris(c, until(25.0), Seed{s + 300});
        for (double when : {3.0, 12.5, 25.0}) {
            for (int i = 0; i < p.F; ++i) {
                const auto m = ancestry_profile(t, i, when);
                for (int x = 0; x < p.L; ++x) CHECK(m.ancestor[static_cast<std::size_t>(x)] == ancestor(t, x, i, when));
                for (int x = 1; x < p.L; ++x)
                    CHECK(m.ancestor[static_cast<std::size_t>(x - 1)] <= m.ancestor[static_cast<std::size_t>(x)]);
                const auto sets = descendant_sets(m, p.topology);
                int total = 0;
                for (const auto& d : sets) total += d.count;
                CHECK(total == p.L);
            }
        }
    }
}

TEST_CASE("the tracker enforces ordering at every event")
{
    const auto c = sample_pi0({3, 3, 40, Topology::interval}, Seed{99});
    const auto t = run_gillespie(c, RunOptions{}, Seed{100});
    AncestorTracker tracker(t.initial, true);
    for (const auto& e : t.events) tracker.observe(e);
    CHECK(tracker.checks() == t.effective_events);
    CHECK_NOTHROW(tracker.check_all());
    CHECK(tracker.configuration() == t.final);
}

TEST_CASE("check_ancestor_map rejects broken maps")
{
    const ModelParams p{2, 3, 3, Topology::interval};
    const Configuration c(p, {{1, 1}, {2, 2}, {3, 3}});
    CHECK_NOTHROW(check_ancestor_map({0, 0.0, {0, 1, 2}}, c, c));
    CHECK_THROWS_AS(check_ancestor_map({0, 0.0, {1, 1, 2}}, c, c), GenealogyError);  // identity
    const Configuration same(p, {{1, 1}, {1, 1}, {1, 1}});
    CHECK_THROWS_AS(check_ancestor_map({0, 0.0, {2, 1, 0}}, same, same), GenealogyError);  // order
    CHECK_THROWS_AS(descendant_sets({0, 0.0, {0, 2, 0}}, Topology::interval), GenealogyError);
}

TEST_CASE("descendant count is a martingale away from the boundary")
{
    // Small-scale version of the acceptance check.
    const ModelParams p{2, 3, 81, Topology::interval};
    RunningStats m;
    for (int r = 0; r < 1500; ++r) {
        const auto c = sample_pi0(p, replica_seed(Seed{6}, r));
        const auto t = run_harris(c, until(5.0), replica_seed(Seed{7}, r));
        m.add(descendants(t, 40, 0, 5.0).count);
    }
    CHECK(std::abs(m.mean() - 1.0) < 3 * m.standard_error());
}

TEST_CASE("far ancestry becomes rarer with distance")
{
    const ModelParams p{2, 3, 61, Topology::interval};
    std::array<int, 3> hits{};
    const int distances[] = {1, 3, 6};
    for (int r = 0; r < 300; ++r) {
        const auto t = run_harris(sample_pi0(p, replica_seed(Seed{1}, r)), until(20.0), replica_seed(Seed{2}, r));
        for (std::size_t k = 0; k < 3; ++k) {
            bool any = false;
            for (int z = 0; z < p.L && !any; ++z)
                if (std::abs(z - 30) >= distances[k] && first_hit_time(t, z, 0, 30)) any = true;
            hits[k] += any;
        }
    }
    CHECK(hits[0] > hits[1]);
    CHECK(hits[1] > hits[2]);
}

TEST_CASE("genealogy exports")
{
    const auto c = sample_pi0({2, 3, 10, Topology::interval}, Seed{5});
    const auto t = run_harris(c, until(5.0), Seed{6});
    std::ostringstream a, d;
    write_ancestors_csv(a, {ancestry_profile(t, 0, 2.0), ancestry_profile(t, 0, 5.0)});
    write_descendants_csv(d, descendant_sets(ancestry_profile(t, 0, 5.0), Topology::interval));
    const std::string at = a.str(), dt = d.str();
    CHECK(at.rfind("time,feature,vertex,ancestor\n", 0) == 0);
    CHECK(std::count(at.begin(), at.end(), '\n') == 21);
    CHECK(std::count(dt.begin(), dt.end(), '\n') == 11);
}
