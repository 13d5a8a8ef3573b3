#pragma once

// Numerical kernels: non-negative least squares, concave maximization over the
// (monotone) probability simplex, adaptive quadrature and bracketing root search.

#include "acx/error.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace acx::solvers {

// ---------------------------------------------------------------------------
// Non-negative least squares

struct NnlsProblem {
    Eigen::MatrixXd A;  // rows: observations, columns: dictionary atoms
    Eigen::VectorXd b;
};

struct NnlsOptions {
    // On the gradient A^T(b - Ax). Decay designs are nearly collinear, so a
    // small gradient can still hide a residual of order 1e-6.
    double tolerance = 1e-13;
    int max_iterations = 0;  // 0 selects 10 * columns
};

struct NnlsResult {
    Eigen::VectorXd w;
    double residual_norm = 0.0;
    // max over atoms of the violated KKT condition of min ||Aw - b||^2 / 2
    double kkt_residual = 0.0;
    int iterations = 0;
};

class NnlsMaxIterations : public Error {
public:
    NnlsMaxIterations(const std::string& what, NnlsResult best)
        : Error(ErrorCode::MaxIterations, what), best_(std::move(best)) {}
    const NnlsResult& best() const noexcept { return best_; }

private:
    NnlsResult best_;
};

double nnls_kkt_residual(const NnlsProblem& p, const Eigen::VectorXd& w);

// Lawson-Hanson active set method.
NnlsResult nnls_solve(const NnlsProblem& p, const NnlsOptions& options = {});

// ---------------------------------------------------------------------------
// Concave maximization over the probability simplex

// Returns f(w) and writes the gradient into grad. May return -inf outside the
// objective's domain.
using ConcaveObjective = std::function<double(std::span<const double> w, std::span<double> grad)>;

// lo <= a.w <= hi
struct BandConstraint {
    std::vector<double> a;
    double lo = 0.0;
    double hi = 0.0;
};

struct SimplexOptions {
    double relative_tolerance = 1e-9;  // gain per outer round treated as a stall
    double kkt_tolerance = 1e-7;       // scaled by max(1, |w . grad|)
    double band_tolerance = 1e-11;     // allowed excursion outside a band before restoration
    int max_iterations = 50000;        // Newton steps
};

struct SimplexProgram {
    ConcaveObjective objective;
    std::size_t dimension = 0;
    // Restrict to nondecreasing w (w[r+1] >= w[r]).
    bool monotone = false;
    std::vector<BandConstraint> bands;
    SimplexOptions options;
};

struct SimplexResult {
    std::vector<double> w;
    double objective = 0.0;
    double kkt_residual = 0.0;
    std::vector<double> multipliers;  // one per band, signed: positive when the upper edge binds
    int iterations = 0;
    bool converged = false;
};

class SimplexMaxIterations : public Error {
public:
    SimplexMaxIterations(const std::string& what, SimplexResult best)
        : Error(ErrorCode::MaxIterations, what), best_(std::move(best)) {}
    const SimplexResult& best() const noexcept { return best_; }

private:
    SimplexResult best_;
};

// Fully corrective Frank-Wolfe: the iterate is a convex combination of the start
// point and the simplex vertices picked so far, re-optimized over their hull by
// projected Newton steps. A monotone program is solved in the coordinates of the
// monotone simplex's extreme points (uniform masses on the suffixes r..M-1), in
// which it is again a plain simplex. Bands are handled by an
// augmented Lagrangian whose penalty grows until the band holds, followed by an
// exact restoration step onto the band. w0 must be positive, sum to one and, for
// monotone programs, be nondecreasing; it need not satisfy the bands.
SimplexResult simplex_maximize(const SimplexProgram& program, std::span<const double> w0);

// Maps between w and the suffix-uniform coordinates theta used for monotone programs.
std::vector<double> monotone_to_suffix_weights(std::span<const double> w);
std::vector<double> suffix_weights_to_monotone(std::span<const double> theta);

// Euclidean projection onto {w : w nondecreasing, w >= 0, sum w = 1} via pool
// adjacent violators followed by a shift-and-clip onto the simplex.
std::vector<double> project_monotone_simplex(std::span<const double> y);

// Least-squares nondecreasing fit (pool adjacent violators), equal weights.
std::vector<double> isotonic_regression(std::span<const double> y);

// ---------------------------------------------------------------------------
// Quadrature

using Integrand = std::function<double(double)>;

struct QuadratureOptions {
    double absolute_tolerance = 1e-12;
    int initial_panels = 1;
    int max_intervals = 20000;
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int intervals = 0;
};

class ToleranceNotMet : public Error {
public:
    ToleranceNotMet(const std::string& what, QuadratureResult best)
        : Error(ErrorCode::ToleranceNotMet, what), best_(best) {}
    const QuadratureResult& best() const noexcept { return best_; }

private:
    QuadratureResult best_;
};

// Globally adaptive 15-point Gauss-Kronrod quadrature.
QuadratureResult integrate(const Integrand& f, double lo, double hi, const QuadratureOptions& options = {});

struct GaussLegendreRule {
    std::vector<double> nodes;  // on [-1, 1]
    std::vector<double> weights;
};

GaussLegendreRule gauss_legendre(int order);

// Composite fixed-order rule: `panels` equal panels, each with an order-point Gauss-Legendre rule.
double integrate_fixed(const Integrand& f, double lo, double hi, int panels, int order);

// ---------------------------------------------------------------------------
// Root finding

// Root of a monotone f on [lo, hi]; the result is within tol of the root.
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-12);

}  // namespace acx::solvers
