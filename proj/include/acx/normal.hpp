#pragma once

namespace acx {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double normal_pdf(double z);
double normal_log_pdf(double z);
double normal_cdf(double z);
// log Phi(z), accurate in the far lower tail where Phi underflows.
double normal_log_cdf(double z);

}  // namespace acx
