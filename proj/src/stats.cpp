#include "axlab/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <stdexcept>

namespace axlab {

Interval wilson_interval(std::uint64_t successes, std::uint64_t n, double z)
{
    if (n == 0) return {0.0, 1.0};
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double centre = (p + z2 / (2 * nn)) / (1 + z2 / nn);
    const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / (1 + z2 / nn);
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double binomial_standard_error(std::uint64_t successes, std::uint64_t n)
{
    if (n == 0) return 0.0;
    const double p = static_cast<double>(successes) / static_cast<double>(n);
    return std::sqrt(p * (1 - p) / static_cast<double>(n));
}

double chi_square_upper_tail(double statistic, int dof)
{
    if (statistic <= 0.0) return 1.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), statistic));
}

ChiSquareResult chi_square_2x2(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d)
{
    const double n = static_cast<double>(a + b + c + d);
    const double r0 = static_cast<double>(a + b), r1 = static_cast<double>(c + d);
    const double c0 = static_cast<double>(a + c), c1 = static_cast<double>(b + d);
    ChiSquareResult out;
    if (r0 == 0 || r1 == 0 || c0 == 0 || c1 == 0) {
        out.degenerate = true;
        return out;
    }
    const double obs[4] = {static_cast<double>(a), static_cast<double>(b), static_cast<double>(c),
                           static_cast<double>(d)};
    const double exp[4] = {r0 * c0 / n, r0 * c1 / n, r1 * c0 / n, r1 * c1 / n};
    for (int k = 0; k < 4; ++k) out.statistic += (obs[k] - exp[k]) * (obs[k] - exp[k]) / exp[k];
    out.p_value = chi_square_upper_tail(out.statistic, 1);
    return out;
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("least_squares needs >= 2 paired points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) sx += x[k], sy += y[k];
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
        syy += (y[k] - my) * (y[k] - my);
    }
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

}  // namespace axlab
