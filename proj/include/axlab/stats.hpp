#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace axlab {

/// Welford accumulator.
class RunningStats {
public:
    void add(double x)
    {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }

    std::uint64_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double stddev() const { return std::sqrt(variance()); }
    double standard_error() const { return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

struct Interval {
    double low = 0.0;
    double high = 0.0;
};

inline constexpr double z95 = 1.959963984540054;

/// Wilson score interval for a binomial proportion. Returns [0, 1] when n = 0.
Interval wilson_interval(std::uint64_t successes, std::uint64_t n, double z = z95);

/// Binomial standard error sqrt(p(1-p)/n) at the empirical proportion.
double binomial_standard_error(std::uint64_t successes, std::uint64_t n);

/// Pearson chi-square test of independence on a 2x2 table of counts
/// [[a, b], [c, d]] (one degree of freedom, no continuity correction).
struct ChiSquareResult {
    double statistic = 0.0;
    double p_value = 1.0;
    bool degenerate = false;  ///< a row or column total is zero; test not applicable
};
ChiSquareResult chi_square_2x2(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d);

/// Upper tail of the chi-square distribution with k degrees of freedom.
double chi_square_upper_tail(double statistic, int dof);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace axlab
