#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "axlab/rng.hpp"
#include "axlab/stats.hpp"

namespace axlab {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

/// q (1 - 1/q)^F - F (1 - 1/q), exact. Positive values guarantee fixation.
BigRational omega(int q, int F);

/// Root of exp(-c) = c by bisection on [0.5, 0.6].
double critical_slope();
/// Same root by the fixed-point iteration c <- exp(-c) (a contraction near the root).
double critical_slope_fixed_point();

struct PhaseCell {
    int q = 0;
    int F = 0;
    BigRational omega;
    int sign = 0;
    bool below_c_line = false;  ///< F <= c q
};

/// Sign of omega over 2 <= q <= q_max, 2 <= F <= F_max, with the F = c q reference line.
struct PhaseGrid {
    int q_max = 0;
    int F_max = 0;
    double slope = 0.0;
    std::vector<PhaseCell> cells;  ///< q-major order

    const PhaseCell& at(int q, int F) const;
    bool positive(int q, int F) const { return at(q, F).sign > 0; }
};

PhaseGrid phase_grid(int q_max, int F_max);

/// CSV "q,F,omega_numerator,omega_denominator,sign,below_c_line" with a format tag line.
void write_phase_csv(std::ostream& os, const PhaseGrid& grid);

/// Exact law of the comparison weight of one edge under the uniform product measure.
///
/// The pile size is binomial(F, 1 - 1/q). An edge with i < F particles weighs -i; a
/// blockade weighs psi - (F - 1) with psi geometric on {1, 2, ...} of success
/// probability 1/(q - 1).
struct WeightDistribution {
    int q = 0;
    int F = 0;
    std::vector<BigRational> pile;  ///< pile[i] = P(zeta = i), i = 0..F
    BigRational success;            ///< geometric success probability 1/(q - 1)

    int min_value() const { return -(F - 1); }
    BigRational pmf(int value) const;
    double pmf_value(int value) const;
    /// P(weight > value).
    BigRational tail_above(int value) const;
    double tail_above_value(int value) const;
    BigRational mean() const;
};

WeightDistribution phi_distribution(int q, int F);

/// Default bound on DP work (states times support) before exact_tail_le_zero refuses.
inline constexpr std::uint64_t default_tail_work_limit = 400'000'000ULL;

/// P(sum of N iid weights <= 0), by dynamic programming over partial sums. A partial sum
/// that exceeds (remaining steps) * (F - 1) can never come back to <= 0 and is moved to
/// an absorbing bucket, which keeps the state space finite without approximation.
double exact_tail_le_zero(int q, int F, int N, std::uint64_t work_limit = default_tail_work_limit);

/// Same recursion carried out in exact rational arithmetic (small N only).
BigRational exact_tail_le_zero_rational(int q, int F, int N, std::uint64_t work_limit = 2'000'000ULL);

struct TailEstimate {
    std::uint64_t hits = 0;
    std::uint64_t replicas = 0;
    double estimate = 0.0;
    double standard_error = 0.0;
    Interval wilson95;
};

/// Monte Carlo estimate of P(sum of N weights <= 0) with iid draws.
TailEstimate mc_tail(int q, int F, int N, std::uint64_t replicas, Seed seed);

struct TailRow {
    int N = 0;
    double exact = 0.0;
    TailEstimate mc;
};

/// CSV "N,exact_P,mc_P,mc_ci_low,mc_ci_high".
void write_tail_csv(std::ostream& os, const std::vector<TailRow>& rows);

struct GeometricTail {
    std::int64_t threshold = 0;  ///< floor((1/p - eps) K)
    double probability = 0.0;
    double log_probability = 0.0;
};

/// P(X_1 + ... + X_K <= (1/p - eps) K) for iid geometric X on {1, 2, ...}.
GeometricTail geometric_tail(double p, std::int64_t K, double epsilon);

/// Static constants of the two-feature refinement, with X ~ binomial(2, 1 - 1/q):
/// good pairs nu0 = P(X=1)^2, bad particles nu1 = P(X=1) P(X!=1), blockades nu2 = P(X=2).
struct RefinedWeights {
    int q = 0;
    BigRational nu0;
    BigRational nu1;
    BigRational nu2;
    /// (q - 2) nu2 - nu1 - 11 nu0 / 12
    BigRational margin;
};

RefinedWeights refined_margin(int q);

}  // namespace axlab
