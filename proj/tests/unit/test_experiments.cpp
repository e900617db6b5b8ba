#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "axlab/experiments.hpp"
#include "axlab/particles.hpp"
#include "axlab/trajectory_io.hpp"
#include "axlab/verify.hpp"

using namespace axlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    auto p = fs::temp_directory_path() / ("axlab_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("fixation_run aggregates are recomputable from the records")
{
    const auto r = fixation_run({2, 3, 40, Topology::interval}, 30, Seed{4});
    REQUIRE(r.records.size() == 30);
    RunningStats b;
    for (double v : r.column("blockade_density")) b.add(v);
    CHECK(r.value("blockade_density") == doctest::Approx(b.mean()).epsilon(1e-14));
    CHECK(r.aggregate("blockade_density").standard_error == doctest::Approx(b.standard_error()).epsilon(1e-12));
    CHECK(r.value("absorbed_fraction") == 1.0);
    CHECK(r.value("censored") == 0.0);
    for (double d : r.column("blockade_density")) {
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
    }
    CHECK_THROWS_AS(r.value("nope"), std::out_of_range);
}

TEST_CASE("fixation_run is deterministic across thread counts")
{
    ExperimentOptions one, four;
    four.threads = 4;
    const auto a = fixation_run({3, 3, 30, Topology::ring}, 12, Seed{8}, one);
    const auto b = fixation_run({3, 3, 30, Topology::ring}, 12, Seed{8}, four);
    CHECK(a.records == b.records);
}

TEST_CASE("trivially absorbed starts")
{
    const ModelParams p{2, 3, 6, Topology::interval};
    const auto consensus = fixation_run_from(Configuration(p, {{1, 2}, {1, 2}, {1, 2}, {1, 2}, {1, 2}, {1, 2}}), 3, Seed{1});
    CHECK(consensus.value("absorption_time") == 0.0);
    CHECK(consensus.value("blockade_density") == 0.0);
    CHECK(consensus.value("domains") == 1.0);
    const auto alternating =
        fixation_run_from(Configuration(p, {{1, 1}, {2, 2}, {1, 1}, {2, 2}, {1, 1}, {2, 2}}), 3, Seed{1});
    CHECK(alternating.value("absorption_time") == 0.0);
    CHECK(alternating.value("blockade_density") == 1.0);
    CHECK(alternating.value("domains") == 6.0);
}

TEST_CASE("censored runs are reported")
{
    ExperimentOptions o;
    o.event_cap = 5;
    const auto r = fixation_run({2, 3, 50, Topology::interval}, 4, Seed{2}, o);
    CHECK(r.value("censored") == 4.0);
    CHECK(std::isnan(r.value("absorption_time")));
    CHECK_FALSE(r.notes.empty());
}

TEST_CASE("density curves")
{
    ExperimentOptions o;
    o.horizon = 50.0;
    const auto grid = uniform_grid(50.0, 10);
    CHECK(grid.size() == 11);
    const auto c = density_curve({3, 4, 100, Topology::ring}, grid, 40, Seed{5}, o);
    // At time 0 the mean pile size per feature is 1 - 1/q.
    CHECK(std::abs(c.particle_density[0] - 0.75) < 4 * c.particle_se[0]);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        CHECK(c.blockade_density[k] <= c.particle_density[k]);
        CHECK(c.particle_density[k] >= 0.0);
        CHECK(c.particle_density[k] <= 1.0);
        CHECK(c.agreement[k] == doctest::Approx(1.0 - c.particle_density[k]));
        CHECK(c.samples[k] == 40);
    }
    CHECK(c.particle_density.back() < c.particle_density.front());

    ExperimentOptions short_horizon;
    short_horizon.horizon = 10.0;
    CHECK_THROWS_AS(density_curve({2, 3, 10, Topology::interval}, grid, 2, Seed{1}, short_horizon),
                    std::invalid_argument);

    std::ostringstream os;
    write_density_csv(os, c);
    CHECK(os.str().rfind("# axelrod-lab density v1", 0) == 0);
}

TEST_CASE("density curves separate the two regimes")
{
    ExperimentOptions o;
    o.horizon = 400.0;
    const auto grid = uniform_grid(400.0, 4);
    const auto two = density_curve({2, 2, 200, Topology::ring}, grid, 20, Seed{9}, o);
    const auto three = density_curve({2, 3, 200, Topology::ring}, grid, 20, Seed{9}, o);
    CHECK(two.particle_density.back() < 0.5 * two.particle_density.front());
    CHECK(three.particle_density.back() > 0.25);
    CHECK(three.blockade_density.back() > 3 * two.blockade_density.back());
}

TEST_CASE("collision experiment")
{
    const auto r = collision_outcome_experiment({2, 2, 60, Topology::interval}, 2000, Seed{3});
    CHECK(r.value("collisions") >= 2000);
    CHECK(r.value("annihilation_fraction") == 1.0);
    CHECK(r.value("coalescences") == 0.0);

    CollisionOptions tiny;
    tiny.max_replicas = 2;
    tiny.batch = 1;
    const auto s = collision_outcome_experiment({2, 3, 10, Topology::interval}, 1'000'000, Seed{3}, tiny);
    CHECK(s.replicas == 2);
    REQUIRE_FALSE(s.notes.empty());
    CHECK(s.notes.back().rfind("shortfall", 0) == 0);

    // The stopping point does not depend on the thread count.
    CollisionOptions threaded;
    threaded.run.threads = 3;
    const auto a = collision_outcome_experiment({3, 3, 40, Topology::interval}, 500, Seed{6});
    const auto b = collision_outcome_experiment({3, 3, 40, Topology::interval}, 500, Seed{6}, threaded);
    CHECK(a.records == b.records);
}

TEST_CASE("martingale experiment")
{
    const ModelParams p{2, 3, 61, Topology::interval};
    const auto zero = martingale_experiment(p, 0.0, 30, 10, Seed{1});
    CHECK(zero.value("mean_0") == 1.0);
    CHECK(zero.value("variance_0") == 0.0);
    CHECK(zero.notes.empty());

    const auto near_end = martingale_experiment(p, 5.0, 2, 10, Seed{1});
    CHECK_FALSE(near_end.notes.empty());
    CHECK_THROWS_AS(martingale_experiment(p, 1.0, 61, 1, Seed{1}), std::invalid_argument);
}

TEST_CASE("six-arrow race trials")
{
    Rng rng(Seed{12});
    int inner = 0;
    for (int k = 0; k < 3000; ++k) {
        const auto o = six_arrow_trial(4, rng);
        CHECK(o.first >= 0);
        CHECK(o.first < 6);
        CHECK(o.inner == (o.first < 2));
        if (o.inner) {
            ++inner;
            CHECK((o.collided || o.blockade));
            CHECK_FALSE((o.collided && o.blockade));
        }
    }
    CHECK(std::abs(inner / 3000.0 - 1.0 / 3.0) < 4 * std::sqrt(2.0 / 9.0 / 3000.0));
    CHECK_THROWS_AS(six_arrow_trial(2, rng), std::invalid_argument);
}

TEST_CASE("sweep output, determinism and resumption")
{
    SweepOptions o;
    o.L = 40;
    o.replicas = 4;
    const auto empty = sweep({}, Seed{1}, o);
    CHECK(empty.csv == std::string("# axelrod-lab sweep v1 seed=1\n") + sweep_header + "\n");

    const std::vector<SweepCell> grid{{2, 2}, {2, 3}};
    const auto a = sweep(grid, Seed{5}, o);
    const auto b = sweep(grid, Seed{5}, o);
    CHECK(a.csv == b.csv);
    std::istringstream lines(a.csv);
    std::string line;
    int aggregates = 0, replicas = 0;
    while (std::getline(lines, line)) {
        aggregates += line.rfind("aggregate,", 0) == 0;
        replicas += line.rfind("replica,", 0) == 0;
    }
    CHECK(aggregates == 2);
    CHECK(replicas == 8);

    const auto dir = scratch("sweep");
    o.directory = dir;
    const auto first = sweep(grid, Seed{5}, o);
    CHECK(first.cells_run == 2);
    CHECK(first.csv == a.csv);
    // Drop one cell as if the sweep had been interrupted.
    fs::remove(dir / "cell_F2_q3_L40_interval.csv");
    const auto resumed = sweep(grid, Seed{5}, o);
    CHECK(resumed.cells_reused == 1);
    CHECK(resumed.cells_run == 1);
    CHECK(resumed.csv == a.csv);

    const auto broken = sweep({{2, 1}, {2, 2}}, Seed{5}, o);
    REQUIRE(broken.failures.size() == 1);
    CHECK(broken.failures[0].message.find("q >= 2") != std::string::npos);
    CHECK(broken.cells_reused == 1);
    fs::remove_all(dir);
}

TEST_CASE("space-time export")
{
    const auto dir = scratch("trace");
    const auto out = spacetime_export({3, 3, 60, Topology::ring}, 30.0, Seed{2}, dir / "run", 25, true);
    REQUIRE(out.image.has_value());
    const std::string png = slurp(*out.image);
    REQUIRE(png.size() > 24);
    CHECK(png.substr(1, 3) == "PNG");
    auto be32 = [&](std::size_t at) {
        return (static_cast<unsigned char>(png[at]) << 24) | (static_cast<unsigned char>(png[at + 1]) << 16) |
               (static_cast<unsigned char>(png[at + 2]) << 8) | static_cast<unsigned char>(png[at + 3]);
    };
    CHECK(be32(16) == 60u);  // width = edges
    CHECK(be32(20) == 25u);  // height = snapshots

    const auto t = load_trajectory(out.trajectory);
    CHECK(replay(t) == t.final);
    CHECK(out.field.zeta.size() == 25);
    CHECK(out.field.zeta.back() == derive_particles(t.final).counts());
    CHECK(slurp(out.zeta).rfind("# initial_zeta", 0) == 0);

    // An absorbed start gives constant columns.
    const ModelParams p{2, 3, 4, Topology::ring};
    Trajectory still = run_gillespie(Configuration(p, {{1, 1}, {2, 2}, {1, 1}, {2, 2}}), RunOptions{}, Seed{1});
    const auto f = spacetime_field(still, 5);
    for (const auto& row : f.zeta) CHECK(row == f.zeta.front());
    fs::remove_all(dir);
}

TEST_CASE("report writers")
{
    const auto r = six_arrow_race(3, 200, Seed{1});
    std::ostringstream os;
    write_report_csv(os, r);
    CHECK(os.str().rfind("# axelrod-lab report v1 experiment=six_arrow_race", 0) == 0);
    CHECK(os.str().find("# aggregate,inner_first,") != std::string::npos);
    const auto json = report_summary_json(r);
    CHECK(json.find("\"inner_first\"") != std::string::npos);
}

TEST_CASE("enumerated tail oracle agrees with a hand value")
{
    CHECK(enumerated_tail_le_zero(3, 2, 1) == BigRational(7, 9));
    CHECK(exact_tail_le_zero_rational(5, 3, 4) == enumerated_tail_le_zero(5, 3, 4));
}

TEST_CASE("verify suites")
{
    CHECK_THROWS_WITH_AS(run_suite("bogus", {}), doctest::Contains("lemma1"), std::invalid_argument);
    for (const auto& r : run_suite("refined", {})) CHECK_MESSAGE(r.passed, r.name << ": " << r.detail);
    for (const auto& r : run_suite("theory", {})) CHECK_MESSAGE(r.passed, r.name << ": " << r.detail);
}
