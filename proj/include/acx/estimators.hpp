#pragma once

// Extrapolation estimators: map win counts observed on k classes to the
// expected accuracy at any class count t.

#include "acx/core.hpp"
#include "acx/solvers.hpp"

#include <optional>
#include <string>
#include <vector>

namespace acx {

// Number of Bernoulli trials behind each win count. V sums k-1 pairwise
// comparisons, so KMinusOne is the consistent choice; PaperK divides by
// C(k, t-1) instead and exists for comparison only.
enum class TrialConvention { KMinusOne, PaperK };

// ---------------------------------------------------------------------------
// Unbiased moments

// Estimates p_t = E[U^(t-1)] for t = 2..t_max by averaging C(V, t-1) / C(k-1, t-1)
// over every pooled test point. Requires 2 <= t_max <= k.
MomentCurve unbiased_moments(const WinCounts& w, int t_max,
                             TrialConvention convention = TrialConvention::KMinusOne);

// ---------------------------------------------------------------------------
// Exponential-mixture extrapolation

// kappa = 0 followed by n points log-spaced on [lo, hi].
std::vector<double> kappa_grid(double lo, double hi, int n);
// 200 points on [1e-4, 10] plus zero.
std::vector<double> default_kappa_grid();

struct DecayFit {
    DecayMixture mixture;
    double residual_norm = 0.0;
    double kkt_residual = 0.0;
    std::vector<std::string> warnings;
};

// Non-negative least squares fit of sum_l w_l exp(-kappa_l t) to the curve at t = 2..source_k.
DecayFit fit_decay_mixture(const MomentCurve& curve, const std::vector<double>& kappa_grid);

// The unbiased value for t <= source_k, the mixture (clamped to [0,1]) beyond.
double exp_extrapolate(const DecayMixture& mixture, const MomentCurve& unbiased, int t);

// ---------------------------------------------------------------------------
// Constrained maximum pseudolikelihood

struct ConsConfig {
    std::size_t grid_size = 512;
    double anchor_tolerance = 1e-6;
    int max_iterations = 50000;
    double relative_tolerance = 1e-9;
    double kkt_tolerance = 1e-7;
    // Target for the (k-1)-th moment; the unbiased p_k estimate when unset.
    std::optional<double> anchor;

    // Unconstrained variants used to study the ambiguity of the plain MPLE.
    bool monotone = true;
    bool anchored = true;
};

struct ConsResult {
    DiscreteDensity density;
    double objective = 0.0;  // log pseudolikelihood at the estimate
    double kkt_residual = 0.0;
    double anchor = 0.0;     // anchor actually enforced
    int iterations = 0;
    std::vector<std::string> warnings;
};

// Log pseudolikelihood sum_ij log(sum_r w_r u_r^V (1-u_r)^(k-1-V)) on the midpoint grid.
class Pseudolikelihood {
public:
    Pseudolikelihood(const WinCounts& w, std::size_t grid_size);

    std::size_t grid_size() const noexcept { return grid_size_; }
    std::size_t observations() const noexcept { return total_; }
    // Full log pseudolikelihood; gradient (if non-empty) is written with respect to w.
    double value(std::span<const double> w, std::span<double> gradient = {}) const;
    // Per-observation value without the per-row scaling constants (what the solver sees).
    double scaled_value(std::span<const double> w, std::span<double> gradient) const;

private:
    std::size_t grid_size_;
    std::size_t total_ = 0;
    std::vector<double> counts_;           // multiplicity of each distinct win count
    std::vector<std::vector<double>> rows_;  // likelihood rows, each scaled to max 1
    std::vector<double> log_scale_;
};

ConsResult constrained_pmle(const WinCounts& w, const ConsConfig& config = {});

// Initial point used by constrained_pmle: the histogram of the observed u-hat
// values spread over the grid, projected onto the monotone simplex when required
// and blended with the uniform density.
std::vector<double> cons_start_point(const WinCounts& w, std::size_t grid_size, bool monotone);

// ---------------------------------------------------------------------------
// High-dimensional (Gaussian) extrapolation

struct HdCurveParams {
    int k = 2;
    int K = 2;
    // Initial panels of the adaptive quadrature for pi_bar.
    int quadrature_order = 64;
};

// Integral of phi(z - c) Phi(z)^(t-1) dz.
double pi_bar(int t, double c, int quadrature_order = 64);

// c with pi_bar(t, c) = p; p must lie in (0, 1).
double pi_bar_inverse(int t, double p, int quadrature_order = 64);

// pi_bar_K(pi_bar_k^{-1}(p_k)). p_k is clamped into [1e-9, 1 - 1e-9] with a warning.
double hd_extrapolate(double p_k, const HdCurveParams& params, std::vector<std::string>* warnings = nullptr);

}  // namespace acx
