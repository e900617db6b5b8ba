#include "axlab/theory.hpp"

#include <boost/math/distributions/negative_binomial.hpp>

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "axlab/trajectory_io.hpp"

namespace axlab {

namespace {

void require_params(int q, int F)
{
    if (q < 2) throw std::invalid_argument("q must satisfy q >= 2 (got " + std::to_string(q) + ")");
    if (F < 2) throw std::invalid_argument("F must satisfy F >= 2 (got " + std::to_string(F) + ")");
}

BigInt ipow(int base, int exp)
{
    return boost::multiprecision::pow(BigInt(base), static_cast<unsigned>(exp));
}

double to_double(const BigRational& r)
{
    return r.convert_to<double>();
}

BigRational rational_pow(const BigRational& base, int exp)
{
    const auto e = static_cast<unsigned>(exp);
    return BigRational(boost::multiprecision::pow(numerator(base), e), boost::multiprecision::pow(denominator(base), e));
}

}  // namespace

BigRational omega(int q, int F)
{
    require_params(q, F);
    // q ((q-1)/q)^F - F (q-1)/q  =  (q-1) [ (q-1)^(F-1) - F q^(F-2) ] / q^(F-1)
    const BigInt numerator = BigInt(q - 1) * (ipow(q - 1, F - 1) - BigInt(F) * ipow(q, F - 2));
    return BigRational(numerator, ipow(q, F - 1));
}

double critical_slope()
{
    double lo = 0.5, hi = 0.6;  // exp(-c) - c changes sign from + to - on this bracket
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (std::exp(-mid) - mid > 0.0) lo = mid;
        else hi = mid;
    }
    return std::abs(std::exp(-lo) - lo) <= std::abs(std::exp(-hi) - hi) ? lo : hi;
}

double critical_slope_fixed_point()
{
    double c = 0.5;
    for (int it = 0; it < 10'000; ++it) {
        const double next = std::exp(-c);
        if (std::abs(next - c) < 1e-16) return next;
        c = next;
    }
    return c;
}

const PhaseCell& PhaseGrid::at(int q, int F) const
{
    if (q < 2 || q > q_max || F < 2 || F > F_max) throw std::out_of_range("phase grid cell out of range");
    return cells[static_cast<std::size_t>(q - 2) * static_cast<std::size_t>(F_max - 1) + static_cast<std::size_t>(F - 2)];
}

PhaseGrid phase_grid(int q_max, int F_max)
{
    if (q_max < 2 || F_max < 2) throw std::invalid_argument("phase grid bounds must be >= 2");
    PhaseGrid g;
    g.q_max = q_max;
    g.F_max = F_max;
    g.slope = critical_slope();
    g.cells.reserve(static_cast<std::size_t>(q_max - 1) * static_cast<std::size_t>(F_max - 1));
    for (int q = 2; q <= q_max; ++q) {
        for (int F = 2; F <= F_max; ++F) {
            PhaseCell c;
            c.q = q;
            c.F = F;
            c.omega = omega(q, F);
            c.sign = c.omega.sign();
            c.below_c_line = static_cast<double>(F) <= g.slope * q;
            g.cells.push_back(std::move(c));
        }
    }
    return g;
}

void write_phase_csv(std::ostream& os, const PhaseGrid& grid)
{
    os << "# axelrod-lab phase v1 c=" << format_real(grid.slope) << '\n';
    os << "q,F,omega_numerator,omega_denominator,sign,below_c_line\n";
    for (const auto& c : grid.cells)
        os << c.q << ',' << c.F << ',' << numerator(c.omega) << ',' << denominator(c.omega) << ',' << c.sign << ','
           << (c.below_c_line ? 1 : 0) << '\n';
}

BigRational WeightDistribution::pmf(int value) const
{
    BigRational r = 0;
    if (value <= 0 && value >= min_value()) r += pile[static_cast<std::size_t>(-value)];
    const int k = value + F - 1;  // psi = k
    if (k >= 1) {
        r += pile[static_cast<std::size_t>(F)] * rational_pow(1 - success, k - 1) * success;
    }
    return r;
}

BigRational WeightDistribution::tail_above(int value) const
{
    BigRational r = 0;
    for (int i = 0; i < F; ++i)
        if (-i > value) r += pile[static_cast<std::size_t>(i)];
    const int n = value + F - 1;  // P(psi > n)
    r += pile[static_cast<std::size_t>(F)] * (n <= 0 ? BigRational(1) : rational_pow(1 - success, n));
    return r;
}

double WeightDistribution::pmf_value(int value) const
{
    double r = 0.0;
    if (value <= 0 && value >= min_value()) r += to_double(pile[static_cast<std::size_t>(-value)]);
    const int k = value + F - 1;
    if (k >= 1) {
        const double p = to_double(success);
        r += to_double(pile[static_cast<std::size_t>(F)]) * std::pow(1.0 - p, k - 1) * p;
    }
    return r;
}

double WeightDistribution::tail_above_value(int value) const
{
    double r = 0.0;
    for (int i = 0; i < F; ++i)
        if (-i > value) r += to_double(pile[static_cast<std::size_t>(i)]);
    const int n = value + F - 1;
    const double p = to_double(success);
    r += to_double(pile[static_cast<std::size_t>(F)]) * (n <= 0 ? 1.0 : std::pow(1.0 - p, n));
    return r;
}

BigRational WeightDistribution::mean() const
{
    BigRational m = 0;
    for (int i = 0; i < F; ++i) m -= BigRational(i) * pile[static_cast<std::size_t>(i)];
    m += pile[static_cast<std::size_t>(F)] * (1 / success - (F - 1));
    return m;
}

WeightDistribution phi_distribution(int q, int F)
{
    require_params(q, F);
    WeightDistribution d;
    d.q = q;
    d.F = F;
    const BigInt denom = ipow(q, F);
    BigInt choose = 1;
    for (int i = 0; i <= F; ++i) {
        d.pile.emplace_back(choose * ipow(q - 1, i), denom);
        choose = choose * (F - i) / (i + 1);
    }
    d.success = BigRational(1, q - 1);
    return d;
}

namespace {

std::uint64_t tail_work(int F, int N)
{
    const auto m = static_cast<std::uint64_t>(F - 1);
    const auto n = static_cast<std::uint64_t>(N);
    return n * (n * m + 1) * (n * m + m + 1);
}

/// Distribution of partial sums over [-N m, N m]; sums that can no longer reach <= 0 are
/// dropped into the absorbing bucket.
template <class T, class Pmf>
T tail_recursion(int F, int N, Pmf pmf)
{
    const int m = F - 1;
    const int offset = N * m;
    std::vector<T> dist(static_cast<std::size_t>(2 * offset + 1), T(0));
    std::vector<T> next(dist.size(), T(0));
    dist[static_cast<std::size_t>(offset)] = T(1);

    // Values a single step can take without leaving the live region.
    std::vector<T> step_pmf;
    for (int v = -m; v <= N * m; ++v) step_pmf.push_back(pmf(v));
    auto pmf_at = [&](int v) -> const T& { return step_pmf[static_cast<std::size_t>(v + m)]; };

    for (int k = 0; k < N; ++k) {
        const int remaining = N - k - 1;
        const int live_top = remaining * m;
        std::fill(next.begin(), next.end(), T(0));
        for (int s = -k * m; s <= (N - k) * m; ++s) {
            const T& mass = dist[static_cast<std::size_t>(s + offset)];
            if (mass == T(0)) continue;
            // Steps landing above live_top are safe forever and leave the recursion.
            const int vmax = live_top - s;
            for (int v = -m; v <= vmax; ++v) next[static_cast<std::size_t>(s + v + offset)] += mass * pmf_at(v);
        }
        std::swap(dist, next);
    }
    T result(0);
    for (int s = -N * m; s <= 0; ++s) result += dist[static_cast<std::size_t>(s + offset)];
    return result;
}

void check_tail_args(int q, int F, int N, std::uint64_t work_limit)
{
    require_params(q, F);
    if (N < 1) throw std::invalid_argument("N must be >= 1");
    if (tail_work(F, N) > work_limit)
        throw std::invalid_argument("tail recursion for N=" + std::to_string(N) + ", F=" + std::to_string(F) +
                                    " exceeds the configured work bound");
}

}  // namespace

double exact_tail_le_zero(int q, int F, int N, std::uint64_t work_limit)
{
    check_tail_args(q, F, N, work_limit);
    const WeightDistribution d = phi_distribution(q, F);
    return tail_recursion<double>(F, N, [&](int v) { return d.pmf_value(v); });
}

BigRational exact_tail_le_zero_rational(int q, int F, int N, std::uint64_t work_limit)
{
    check_tail_args(q, F, N, work_limit);
    const WeightDistribution d = phi_distribution(q, F);
    return tail_recursion<BigRational>(F, N, [&](int v) { return d.pmf(v); });
}

TailEstimate mc_tail(int q, int F, int N, std::uint64_t replicas, Seed seed)
{
    require_params(q, F);
    if (N < 1) throw std::invalid_argument("N must be >= 1");
    if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
    Rng rng(seed);
    const double success = 1.0 / (q - 1);
    TailEstimate est;
    est.replicas = replicas;
    for (std::uint64_t r = 0; r < replicas; ++r) {
        std::int64_t sum = 0;
        for (int u = 0; u < N; ++u) {
            int pile = 0;
            for (int i = 0; i < F; ++i) pile += rng.below(static_cast<std::uint64_t>(q)) != 0;
            if (pile == F) sum += static_cast<std::int64_t>(rng.geometric(success)) - (F - 1);
            else sum -= pile;
        }
        est.hits += sum <= 0;
    }
    est.estimate = static_cast<double>(est.hits) / static_cast<double>(replicas);
    est.standard_error = binomial_standard_error(est.hits, replicas);
    est.wilson95 = wilson_interval(est.hits, replicas);
    return est;
}

void write_tail_csv(std::ostream& os, const std::vector<TailRow>& rows)
{
    os << "N,exact_P,mc_P,mc_ci_low,mc_ci_high\n";
    for (const auto& r : rows)
        os << r.N << ',' << format_real(r.exact) << ',' << format_real(r.mc.estimate) << ','
           << format_real(r.mc.wilson95.low) << ',' << format_real(r.mc.wilson95.high) << '\n';
}

GeometricTail geometric_tail(double p, std::int64_t K, double epsilon)
{
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("geometric_tail: p must lie in (0, 1)");
    if (!(epsilon < 1.0 / p)) throw std::invalid_argument("geometric_tail: epsilon must be below 1/p");
    if (K < 1) throw std::invalid_argument("geometric_tail: K must be >= 1");
    GeometricTail out;
    out.threshold = static_cast<std::int64_t>(std::floor((1.0 / p - epsilon) * static_cast<double>(K)));
    if (out.threshold < K) {
        out.probability = 0.0;
        out.log_probability = -std::numeric_limits<double>::infinity();
        return out;
    }
    // The sum of K geometrics exceeds K by a negative-binomial number of failures.
    const boost::math::negative_binomial_distribution<double> failures(static_cast<double>(K), p);
    out.probability = boost::math::cdf(failures, static_cast<double>(out.threshold - K));
    out.log_probability = std::log(out.probability);
    return out;
}

RefinedWeights refined_margin(int q)
{
    if (q < 3) throw std::invalid_argument("refined_margin requires q >= 3 (got " + std::to_string(q) + ")");
    const WeightDistribution d = phi_distribution(q, 2);
    const BigRational& one = d.pile[1];
    RefinedWeights w;
    w.q = q;
    w.nu0 = one * one;
    w.nu1 = one * (1 - one);
    w.nu2 = d.pile[2];
    w.margin = BigRational(q - 2) * w.nu2 - w.nu1 - BigRational(11, 12) * w.nu0;
    return w;
}

}  // namespace axlab
