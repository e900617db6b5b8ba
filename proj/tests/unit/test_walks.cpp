#include "doctest.h"

#include <cmath>
#include <sstream>

#include "axlab/walks.hpp"

using namespace axlab;

namespace {

RunOptions until(double h)
{
    RunOptions o;
    o.horizon = h;
    return o;
}

}  // namespace

TEST_CASE("derive_particles")
{
    const ModelParams p{2, 3, 3, Topology::interval};
    const auto f = derive_particles(Configuration(p, {{1, 1}, {1, 2}, {2, 2}}));
    CHECK_FALSE(f.occupied(0, 0));
    CHECK(f.occupied(0, 1));
    CHECK(f.occupied(1, 0));
    CHECK_FALSE(f.occupied(1, 1));
    CHECK(f.count(0) == 1);
    CHECK(f.count(1) == 1);

    const auto consensus = derive_particles(Configuration(p, {{2, 3}, {2, 3}, {2, 3}}));
    CHECK(consensus.total() == 0);

    const ModelParams q{3, 4, 6, Topology::ring};
    const auto alternating = derive_particles(
        Configuration(q, {{1, 1, 1}, {2, 2, 2}, {1, 1, 1}, {2, 2, 2}, {1, 1, 1}, {2, 2, 2}}));
    CHECK(alternating.blockades() == 6);
}

TEST_CASE("jump_rate")
{
    CHECK(jump_rate(4, 4) == Ratio(0));
    CHECK(jump_rate(2, 4) == Ratio(1, 4));
    CHECK(jump_rate(1, 2) == Ratio(1, 2));
    CHECK_THROWS_AS(jump_rate(0, 3), ContractError);
    for (int F = 2; F <= 8; ++F)
        for (int j = 1; j <= F; ++j) CHECK(jump_rate(j, F) == Ratio(1, j) - Ratio(1, F));
}

TEST_CASE("tracking keeps the field equal to the configuration's particles")
{
    for (std::uint64_t s = 0; s < 30; ++s) {
        const ModelParams p{2 + static_cast<int>(s % 3), 2 + static_cast<int>(s % 5), 20 + static_cast<int>(s),
                            s % 3 == 0 ? Topology::ring : Topology::interval};
        const auto c = sample_pi0(p, Seed{s});
        const auto t = run_engine(s % 2 ? EngineKind::harris : EngineKind::gillespie, c, until(40.0), Seed{s + 7});
        TrackOptions o;
        o.audit_interval = 1;
        const auto r = track(t, o);
        CHECK(r.audits == r.effective_events + 1);
        CHECK(r.effective_events == t.effective_events);

        // Per-feature count changes only through collisions and exits.
        for (int i = 0; i < p.F; ++i) {
            std::int64_t lost = 0;
            for (const auto& m : r.moves) {
                if (m.feature != i) continue;
                if (m.kind == MoveKind::annihilation) lost += 2;
                if (m.kind == MoveKind::coalescence || m.kind == MoveKind::exit) lost += 1;
            }
            CHECK(r.initial_per_feature[i] - lost == r.final_per_feature[i]);
            CHECK(r.final_per_feature[i] <= r.initial_per_feature[i]);
        }
        // Annihilation iff destination cell empty afterwards, checked against a replay.
        for (const auto& col : r.collisions) CHECK(col.edge_to != col.edge_from);
    }
}

TEST_CASE("two states per feature never coalesce")
{
    std::uint64_t collisions = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto c = sample_pi0({3, 2, 80, Topology::interval}, Seed{s});
        const auto r = track(run_gillespie(c, RunOptions{}, Seed{s + 1}));
        const auto stats = collision_stats(r.collisions);
        CHECK(stats.coalescences == 0);
        collisions += stats.collisions;
    }
    CHECK(collisions > 0);
}

TEST_CASE("a lone particle walks without colliding")
{
    const ModelParams p{2, 3, 40, Topology::interval};
    std::vector<std::vector<int>> cultures(40, {1, 1});
    for (int x = 20; x < 40; ++x) cultures[static_cast<std::size_t>(x)] = {1, 2};
    const Configuration c(p, cultures);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto r = track(run_harris(c, until(30.0), Seed{s}));
        CHECK(r.collisions.empty());
        CHECK(r.blockade_events.empty());
        const auto exits = r.exits;
        CHECK(r.final_per_feature[1] == 1 - static_cast<std::int64_t>(exits));
        for (const auto& m : r.moves) CHECK((m.kind == MoveKind::move || m.kind == MoveKind::exit));
    }
}

TEST_CASE("blockades form by moves and fall only to annihilations")
{
    std::uint64_t formed = 0, destroyed = 0;
    for (std::uint64_t s = 0; s < 30; ++s) {
        const auto c = sample_pi0({2, 3, 60, Topology::interval}, Seed{s});
        const auto r = track(run_gillespie(c, RunOptions{}, Seed{s + 50}));
        for (const auto& b : r.blockade_events) (b.kind == BlockadeKind::formed ? formed : destroyed) += 1;
    }
    CHECK(formed > 0);
    CHECK(destroyed > 0);
}

TEST_CASE("annihilation fraction for three states is one half")
{
    std::vector<CollisionRecord> all;
    for (std::uint64_t s = 0; all.size() < 6000; ++s) {
        const auto c = sample_pi0({3, 3, 120, Topology::interval}, replica_seed(Seed{9}, s));
        auto r = track(run_gillespie(c, RunOptions{}, replica_seed(Seed{10}, s)));
        all.insert(all.end(), r.collisions.begin(), r.collisions.end());
    }
    const auto stats = collision_stats(all);
    REQUIRE(stats.fraction_annihilation.has_value());
    const double se = std::sqrt(0.25 / static_cast<double>(stats.collisions));
    CHECK(std::abs(*stats.fraction_annihilation - 0.5) < 4 * se);
}

TEST_CASE("collision_stats")
{
    const auto empty = collision_stats({});
    CHECK(empty.collisions == 0);
    CHECK_FALSE(empty.fraction_annihilation.has_value());

    std::vector<CollisionRecord> recs;
    for (int k = 0; k < 30; ++k)
        recs.push_back({static_cast<double>(k), 0, 1, 0, k % 3 == 0 ? Outcome::annihilation : Outcome::coalescence,
                        k % 2 == 0});
    const auto s = collision_stats(recs);
    CHECK(s.collisions == 30);
    CHECK(s.annihilations == 10);
    CHECK(s.coalescences == 20);
    CHECK(*s.fraction_annihilation == doctest::Approx(1.0 / 3.0));
    CHECK(s.wilson95.low < 1.0 / 3.0);
    CHECK(s.wilson95.high > 1.0 / 3.0);
    CHECK(s.annihilations_on_blockade == 5);

    const auto all_ann = collision_stats({{0.0, 0, 1, 0, Outcome::annihilation, false}});
    CHECK(*all_ann.fraction_annihilation == 1.0);
}

TEST_CASE("collision and space-time exports")
{
    const auto c = sample_pi0({2, 3, 30, Topology::ring}, Seed{3});
    const auto r = track(run_gillespie(c, until(20.0), Seed{4}));
    std::ostringstream col;
    write_collisions_csv(col, r.collisions);
    CHECK(col.str().rfind("time,edge,feature,outcome,target_was_blockade\n", 0) == 0);
    std::ostringstream zeta;
    write_zeta_stream(zeta, r);
    CHECK(zeta.str().rfind("# initial_zeta", 0) == 0);

    // Applying the zeta stream to the initial vector gives the final pile sizes.
    std::vector<int> z = r.initial_zeta;
    for (const auto& ch : r.zeta_changes) z[static_cast<std::size_t>(ch.edge)] = ch.count;
    CHECK(z == derive_particles(run_gillespie(c, until(20.0), Seed{4}).final).counts());
}

TEST_CASE("tracker rejects impossible events")
{
    const ModelParams p{2, 3, 3, Topology::interval};
    ParticleTracker tracker(Configuration(p, {{1, 1}, {1, 1}, {2, 2}}));
    CHECK_THROWS_AS(tracker.observe({1.0, 0, 1, 0, 0.1, true, true}), TrackingError);  // empty cell
    CHECK_THROWS_AS(tracker.observe({1.0, 1, 2, 0, 0.1, true, true}), TrackingError);  // from a blockade
}
