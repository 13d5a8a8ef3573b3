#include "acx/normal.hpp"

#include <cmath>

namespace acx {

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double normal_log_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_log_cdf(double z) {
    if (z > -20.0) {
        const double p = normal_cdf(z);
        // log1p keeps precision where Phi is close to one.
        return z > 0.0 ? std::log1p(-normal_cdf(-z)) : std::log(p);
    }
    // Mills-ratio asymptotic series; at z <= -20 six terms reach double precision.
    const double x2 = 1.0 / (z * z);
    double series = 1.0;
    double term = 1.0;
    for (int n = 1; n <= 6; ++n) {
        term *= -(2.0 * n - 1.0) * x2;
        series += term;
    }
    return -0.5 * z * z - std::log(-z) - kLogSqrt2Pi + std::log(series);
}

}  // namespace acx
