#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "axlab/rng.hpp"
#include "axlab/theory.hpp"

namespace axlab {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

/// Overrides for the built-in defaults of each check; unset fields keep the defaults.
struct VerifyOptions {
    std::optional<int> F;
    std::optional<int> q;
    std::optional<int> L;
    std::optional<std::uint64_t> replicas;
    Seed seed{20240601};
    unsigned threads = 1;
};

std::vector<CheckResult> check_omega_exact();
std::vector<CheckResult> check_critical_slope();
std::vector<CheckResult> check_phase_grid(int q_max = 100);
/// Annihilation fraction within 0.02 of 1/(q-1), independence of blockade status, runtime.
std::vector<CheckResult> check_collision_fraction(const VerifyOptions& o);
/// No coalescence for q = 2 over at least 10^5 collisions.
std::vector<CheckResult> check_two_state_purity(const VerifyOptions& o);
std::vector<CheckResult> check_engine_equivalence(const VerifyOptions& o);
std::vector<CheckResult> check_coupling(const VerifyOptions& o);
std::vector<CheckResult> check_genealogy_invariants(const VerifyOptions& o);
std::vector<CheckResult> check_martingale(const VerifyOptions& o);
std::vector<CheckResult> check_tails(const VerifyOptions& o);
std::vector<CheckResult> check_refined();
std::vector<CheckResult> check_race(const VerifyOptions& o);
std::vector<CheckResult> check_regime_contrast(const VerifyOptions& o);
std::vector<CheckResult> check_geometric_tail();

/// P(sum of N weights <= 0) by listing every pile vector of the N edges and summing
/// negative binomial probabilities for the blockade part. Exponential in N.
BigRational enumerated_tail_le_zero(int q, int F, int N);

/// Names accepted by run_suite.
std::vector<std::string> suite_names();

/// Throws std::invalid_argument for an unknown suite.
std::vector<CheckResult> run_suite(const std::string& name, const VerifyOptions& o);

}  // namespace axlab
