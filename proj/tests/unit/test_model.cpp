#include "doctest.h"

#include <sstream>

#include "axlab/model.hpp"
#include "axlab/stats.hpp"

using namespace axlab;

namespace {
ModelParams params(int F, int q, int L, Topology t = Topology::interval)
{
    return ModelParams{F, q, L, t};
}
}  // namespace

TEST_CASE("parameter validation names the violated constraint")
{
    CHECK_THROWS_WITH_AS(params(2, 1, 4).validate(), doctest::Contains("q >= 2"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(params(1, 2, 4).validate(), doctest::Contains("F >= 2"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(params(2, 2, 1).validate(), doctest::Contains("L >= 2"), std::invalid_argument);
    CHECK_THROWS_AS(params(2, 2, 2, Topology::ring).validate(), std::invalid_argument);
    CHECK_NOTHROW(params(2, 2, 2).validate());
    CHECK_THROWS_AS(sample_pi0(params(2, 1, 4), Seed{1}), std::invalid_argument);
}

TEST_CASE("edge layout")
{
    CHECK(params(2, 2, 5).edge_count() == 4);
    CHECK(params(2, 2, 5, Topology::ring).edge_count() == 5);
    const auto ring = params(2, 2, 5, Topology::ring);
    CHECK(ring.edge_between(4, 0) == 4);
    CHECK(ring.edge_between(0, 4) == 4);
    CHECK(ring.opposite_neighbor(0, 4) == 1);
    CHECK(ring.opposite_neighbor(0, 1) == 4);
    const auto line = params(2, 2, 5);
    CHECK_FALSE(line.edge_between(4, 0).has_value());
    CHECK_FALSE(line.edge_between(1, 3).has_value());
    CHECK_FALSE(line.opposite_neighbor(0, 1).has_value());
    CHECK(line.opposite_neighbor(2, 1) == 3);
}

TEST_CASE("sample_pi0 is deterministic in the seed")
{
    const auto p = params(2, 2, 4);
    CHECK(sample_pi0(p, Seed{7}) == sample_pi0(p, Seed{7}));
    CHECK_FALSE(sample_pi0(params(3, 5, 200), Seed{7}) == sample_pi0(params(3, 5, 200), Seed{8}));
}

TEST_CASE("sample_pi0 marginals are uniform on 1..q")
{
    // 10^6 draws of each of the 6 cells of a two-vertex, three-feature system.
    const auto p = params(3, 5, 2);
    constexpr int draws = 1'000'000;
    std::vector<std::array<std::uint64_t, 5>> counts(6, {0, 0, 0, 0, 0});
    Rng rng(Seed{2024});
    for (int n = 0; n < draws; ++n) {
        const auto c = sample_pi0(p, rng);
        for (std::size_t k = 0; k < 6; ++k) ++counts[k][c.cells()[k] - 1];
    }
    const double se = std::sqrt(0.2 * 0.8 / draws);
    double chi2 = 0.0;
    for (const auto& cell : counts) {
        for (auto n : cell) {
            const double f = static_cast<double>(n) / draws;
            CHECK(std::abs(f - 0.2) < 3 * se);
            const double expected = 0.2 * draws;
            chi2 += (static_cast<double>(n) - expected) * (static_cast<double>(n) - expected) / expected;
        }
    }
    CHECK(chi_square_upper_tail(chi2, 6 * 4) > 0.001);
}

TEST_CASE("overlap")
{
    const auto p3 = params(3, 3, 2);
    CHECK(overlap(Configuration(p3, {{1, 2, 3}, {1, 2, 3}}), 0, 1) == Ratio(1));
    const auto p2 = params(2, 2, 2);
    CHECK(overlap(Configuration(p2, {{1, 2}, {2, 1}}), 0, 1) == Ratio(0));
    const auto p4 = params(4, 4, 2);
    const Configuration c4(p4, {{1, 2, 3, 4}, {1, 2, 4, 3}});
    CHECK(overlap(c4, 0, 1) == Ratio(1, 2));
    CHECK(overlap(c4, 1, 0) == overlap(c4, 0, 1));

    const auto p = params(2, 3, 4);
    const auto c = sample_pi0(p, Seed{3});
    CHECK_THROWS_AS(overlap(c, 0, 2), ContractError);
}

TEST_CASE("apply_update copies one feature")
{
    const auto p = params(2, 3, 2);
    const Configuration c(p, {{1, 1}, {2, 1}});
    const auto once = apply_update(c, 0, 1, 0);
    CHECK(once == Configuration(p, {{2, 1}, {2, 1}}));
    CHECK(apply_update(once, 0, 1, 0) == once);
    CHECK(apply_update(c, 0, 1, 1) == c);  // already agree on feature 1

    // Changes at most one cell.
    const auto big = sample_pi0(params(4, 5, 30, Topology::ring), Seed{11});
    for (int x = 0; x < 30; ++x) {
        const int y = (x + 1) % 30;
        for (int i = 0; i < 4; ++i) {
            const auto out = apply_update(big, x, y, i);
            int diff = 0;
            for (std::size_t k = 0; k < big.cells().size(); ++k) diff += out.cells()[k] != big.cells()[k];
            CHECK(diff <= 1);
            CHECK(out.state(x, i) == big.state(y, i));
        }
    }
    CHECK_THROWS_AS(apply_update(big, 0, 2, 0), ContractError);
}

TEST_CASE("absorbing configurations")
{
    const auto p = params(2, 3, 4);
    CHECK(is_absorbed(Configuration(p, {{1, 2}, {1, 2}, {1, 2}, {1, 2}})));
    CHECK(is_absorbed(Configuration(p, {{1, 1}, {2, 2}, {1, 1}, {2, 2}})));
    CHECK_FALSE(is_absorbed(Configuration(params(2, 3, 2), {{1, 1}, {1, 2}})));

    // Absorbed implies every disagreeing neighbour pair has overlap 0.
    const auto q = params(2, 2, 6);
    for (std::uint64_t s = 0; s < 200; ++s) {
        const auto c = sample_pi0(q, Seed{s});
        if (!is_absorbed(c)) continue;
        for (int x = 0; x + 1 < 6; ++x)
            if (shared_features(c, x, x + 1) != 2) CHECK(overlap(c, x, x + 1) == Ratio(0));
    }
}

TEST_CASE("domain and blockade counts")
{
    const auto p = params(2, 3, 5);
    const Configuration c(p, {{1, 1}, {1, 1}, {2, 2}, {2, 1}, {2, 1}});
    CHECK(domain_count(c) == 3);
    CHECK(blockade_count(c) == 1);
    const auto r = params(2, 3, 4, Topology::ring);
    CHECK(domain_count(Configuration(r, {{1, 1}, {1, 1}, {1, 1}, {1, 1}})) == 1);
    CHECK(domain_count(Configuration(r, {{1, 1}, {1, 1}, {2, 1}, {2, 1}})) == 2);
}

TEST_CASE("configuration text format")
{
    const auto c = sample_pi0(params(3, 7, 9, Topology::ring), Seed{5});
    std::stringstream ss;
    write_configuration(ss, c);
    const std::string text = ss.str();
    CHECK(text.rfind("F=3 q=7 L=9 topology=ring\n", 0) == 0);
    CHECK(read_configuration(ss) == c);

    std::istringstream bad("F=2 q=3 L=2 topology=interval\n1,2\n1,4\n");
    CHECK_THROWS_AS(read_configuration(bad), std::invalid_argument);
    std::istringstream short_row("F=2 q=3 L=2 topology=interval\n1,2\n1\n");
    CHECK_THROWS_AS(read_configuration(short_row), std::invalid_argument);
}
