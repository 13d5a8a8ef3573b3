#include "acx/estimators.hpp"

#include "acx/error.hpp"
#include "acx/normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace acx {

namespace {

// C(v, n) / C(trials, n) for real v as the product of (v - i) / (trials - i).
double binomial_ratio(double v, int n, int trials) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= (v - i) / static_cast<double>(trials - i);
    return r;
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

}  // namespace

MomentCurve unbiased_moments(const WinCounts& w, int t_max, TrialConvention convention) {
    const int k = static_cast<int>(w.k());
    if (t_max > k) {
        throw Error(ErrorCode::Range, "unbiased moments exist only up to t = k = " + std::to_string(k) +
                                          " (requested " + std::to_string(t_max) + ")");
    }
    if (t_max < 2) throw Error(ErrorCode::Range, "unbiased moments start at t = 2");
    const int trials = convention == TrialConvention::KMinusOne ? k - 1 : k;

    const auto hist = w.histogram();
    const double scale = static_cast<double>(w.scale());
    const double total = static_cast<double>(w.total());
    std::vector<MomentPoint> entries;
    for (int t = 2; t <= t_max; ++t) {
        double sum = 0.0;
        for (std::size_t x = 0; x < hist.size(); ++x) {
            if (hist[x] == 0) continue;
            sum += static_cast<double>(hist[x]) * binomial_ratio(static_cast<double>(x) / scale, t - 1, trials);
        }
        const double p = sum / total;
        entries.push_back({t, p, !(p >= 0.0 && p <= 1.0)});
    }
    return MomentCurve(std::move(entries), w.k());
}

std::vector<double> kappa_grid(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2) {
        throw Error(ErrorCode::InvalidArgument, "kappa grid needs 0 < lo < hi and n >= 2");
    }
    std::vector<double> grid{0.0};
    const double step = std::log(hi / lo) / (n - 1);
    for (int i = 0; i < n; ++i) grid.push_back(i + 1 == n ? hi : lo * std::exp(step * i));
    return grid;
}

std::vector<double> default_kappa_grid() { return kappa_grid(1e-4, 10.0, 200); }

DecayFit fit_decay_mixture(const MomentCurve& curve, const std::vector<double>& grid) {
    if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "kappa grid is empty");
    for (std::size_t l = 0; l < grid.size(); ++l) {
        if (!(grid[l] >= 0.0) || !std::isfinite(grid[l]) || (l > 0 && !(grid[l] > grid[l - 1]))) {
            throw Error(ErrorCode::InvalidArgument, "kappa grid must be nonnegative and strictly increasing");
        }
    }
    std::vector<const MomentPoint*> rows;
    for (const auto& e : curve.entries()) {
        if (e.t >= 2 && static_cast<std::size_t>(e.t) <= curve.source_k()) rows.push_back(&e);
    }
    if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "moment curve has no entries with 2 <= t <= k");

    solvers::NnlsProblem problem;
    problem.A.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(grid.size()));
    problem.b.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        problem.b[ii] = rows[i]->p;
        for (std::size_t l = 0; l < grid.size(); ++l) {
            problem.A(ii, static_cast<Eigen::Index>(l)) = std::exp(-grid[l] * rows[i]->t);
        }
    }

    DecayFit fit{DecayMixture({}), 0.0, 0.0, {}};
    if (rows.size() < 3) {
        fit.warnings.push_back("only " + std::to_string(rows.size()) + " moment(s) available to fit the decay mixture");
    }
    solvers::NnlsResult result;
    try {
        result = solvers::nnls_solve(problem);
    } catch (const solvers::NnlsMaxIterations& e) {
        result = e.best();
        fit.warnings.push_back(e.what());
    }
    std::vector<DecayAtom> atoms;
    for (std::size_t l = 0; l < grid.size(); ++l) {
        const double weight = result.w[static_cast<Eigen::Index>(l)];
        if (weight > 0.0) atoms.push_back({grid[l], weight});
    }
    fit.mixture = DecayMixture(std::move(atoms));
    fit.residual_norm = result.residual_norm;
    fit.kkt_residual = result.kkt_residual;
    return fit;
}

double exp_extrapolate(const DecayMixture& mixture, const MomentCurve& unbiased, int t) {
    if (t < 2) throw Error(ErrorCode::InvalidArgument, "exp_extrapolate needs t >= 2");
    if (static_cast<std::size_t>(t) <= unbiased.source_k()) {
        if (auto p = unbiased.at(t)) return *p;
    }
    return std::clamp(mixture.evaluate(t), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Pseudolikelihood

Pseudolikelihood::Pseudolikelihood(const WinCounts& w, std::size_t grid_size) : grid_size_(grid_size) {
    if (grid_size < 2) throw Error(ErrorCode::InvalidArgument, "pseudolikelihood grid needs at least 2 cells");
    const auto hist = w.histogram();
    const double trials = static_cast<double>(w.k() - 1);
    const double scale = static_cast<double>(w.scale());
    for (std::size_t x = 0; x < hist.size(); ++x) {
        if (hist[x] == 0) continue;
        const double v = static_cast<double>(x) / scale;
        std::vector<double> row(grid_size);
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < grid_size; ++r) {
            const double u = (static_cast<double>(r) + 0.5) / static_cast<double>(grid_size);
            row[r] = v * std::log(u) + (trials - v) * std::log1p(-u);
            peak = std::max(peak, row[r]);
        }
        for (double& y : row) y = std::exp(y - peak);
        rows_.push_back(std::move(row));
        log_scale_.push_back(peak);
        counts_.push_back(static_cast<double>(hist[x]));
        total_ += hist[x];
    }
}

double Pseudolikelihood::scaled_value(std::span<const double> w, std::span<double> gradient) const {
    const double n = static_cast<double>(total_);
    if (!gradient.empty()) std::fill(gradient.begin(), gradient.end(), 0.0);
    double f = 0.0;
    for (std::size_t x = 0; x < rows_.size(); ++x) {
        const auto& row = rows_[x];
        double dot = 0.0;
        for (std::size_t r = 0; r < grid_size_; ++r) dot += row[r] * w[r];
        if (!(dot > 0.0)) return -std::numeric_limits<double>::infinity();
        f += counts_[x] * std::log(dot);
        if (!gradient.empty()) {
            const double c = counts_[x] / (n * dot);
            for (std::size_t r = 0; r < grid_size_; ++r) gradient[r] += c * row[r];
        }
    }
    return f / n;
}

double Pseudolikelihood::value(std::span<const double> w, std::span<double> gradient) const {
    const double f = scaled_value(w, gradient);
    const double n = static_cast<double>(total_);
    if (!gradient.empty()) {
        for (double& g : gradient) g *= n;
    }
    double offset = 0.0;
    for (std::size_t x = 0; x < rows_.size(); ++x) offset += counts_[x] * log_scale_[x];
    return f * n + offset;
}

std::vector<double> cons_start_point(const WinCounts& w, std::size_t grid_size, bool monotone) {
    const auto hist = w.histogram();
    const double denom = static_cast<double>(hist.size() - 1);
    std::vector<double> start(grid_size, 0.0);
    for (std::size_t x = 0; x < hist.size(); ++x) {
        const double u = static_cast<double>(x) / denom;
        const auto cell = std::min(grid_size - 1, static_cast<std::size_t>(u * static_cast<double>(grid_size)));
        start[cell] += static_cast<double>(hist[x]) / static_cast<double>(w.total());
    }
    const double uniform = 1.0 / static_cast<double>(grid_size);
    for (double& s : start) s = 0.5 * s + 0.5 * uniform;
    if (monotone) {
        start = solvers::project_monotone_simplex(start);
        for (double& s : start) s = 0.5 * s + 0.5 * uniform;
    }
    const double sum = std::accumulate(start.begin(), start.end(), 0.0);
    for (double& s : start) s /= sum;
    return start;
}

ConsResult constrained_pmle(const WinCounts& w, const ConsConfig& cfg) {
    const std::size_t m = cfg.grid_size;
    if (m < 16) throw Error(ErrorCode::InvalidArgument, "CONS grid size must be >= 16");
    if (!(cfg.anchor_tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "anchor tolerance must be > 0");

    const Pseudolikelihood pl(w, m);
    const int k = static_cast<int>(w.k());
    std::vector<std::string> warnings;

    std::vector<double> moment_row(m);
    for (std::size_t r = 0; r < m; ++r) {
        moment_row[r] = std::pow((static_cast<double>(r) + 0.5) / static_cast<double>(m), k - 1);
    }

    solvers::SimplexProgram program;
    program.dimension = m;
    program.monotone = cfg.monotone;
    program.objective = [&pl](std::span<const double> x, std::span<double> g) { return pl.scaled_value(x, g); };
    program.options.max_iterations = cfg.max_iterations;
    program.options.relative_tolerance = cfg.relative_tolerance;
    program.options.kkt_tolerance = cfg.kkt_tolerance;

    double anchor = std::numeric_limits<double>::quiet_NaN();
    if (cfg.anchored) {
        anchor = cfg.anchor ? *cfg.anchor : *unbiased_moments(w, k).at(k);
        const double eps = cfg.anchor_tolerance;
        const double reachable_max = moment_row.back();
        const double reachable_min =
            cfg.monotone ? std::accumulate(moment_row.begin(), moment_row.end(), 0.0) / static_cast<double>(m)
                         : moment_row.front();
        if (anchor - eps > reachable_max) {
            throw ConvergenceFailure("CONS infeasible: anchor " + fmt(anchor) + " exceeds the largest moment " +
                                         fmt(reachable_max) + " reachable on a " + std::to_string(m) + "-cell grid",
                                     std::numeric_limits<double>::quiet_NaN(), reachable_max);
        }
        if (anchor + eps < reachable_min) {
            warnings.push_back("anchor " + fmt(anchor) + " below the smallest reachable moment; relaxed to " +
                               fmt(reachable_min));
            anchor = reachable_min;
        }
        program.bands.push_back({moment_row, anchor - eps, anchor + eps});
    }

    const std::vector<double> start = cons_start_point(w, m, cfg.monotone);
    solvers::SimplexResult sol;
    try {
        sol = solvers::simplex_maximize(program, start);
    } catch (const solvers::SimplexMaxIterations& e) {
        const auto& best = e.best();
        bool within_band = true;
        if (cfg.anchored) {
            const double moment = std::inner_product(best.w.begin(), best.w.end(), moment_row.begin(), 0.0);
            within_band = std::abs(moment - anchor) <= cfg.anchor_tolerance;
        }
        if (best.kkt_residual > cfg.kkt_tolerance || !within_band) {
            throw ConvergenceFailure("CONS did not converge in " + std::to_string(best.iterations) +
                                         " iterations (KKT residual " + fmt(best.kkt_residual) + ")",
                                     best.kkt_residual, anchor);
        }
        sol = best;
        warnings.push_back("iteration cap reached; KKT residual within tolerance");
    }

    ConsResult result{DiscreteDensity(sol.w, cfg.monotone), 0.0, sol.kkt_residual, anchor, sol.iterations,
                      std::move(warnings)};
    result.objective = pl.value(result.density.weights());
    return result;
}

// ---------------------------------------------------------------------------
// High-dimensional extrapolation

double pi_bar(int t, double c, int quadrature_order) {
    if (t < 1) throw Error(ErrorCode::InvalidArgument, "pi_bar needs t >= 1");
    if (!std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "pi_bar needs a finite c");
    const double lo = std::min(-40.0, c - 10.0);
    const double hi = std::max(40.0, c + 10.0);
    const double power = static_cast<double>(t - 1);
    auto integrand = [c, power](double z) {
        const double log_pdf = normal_log_pdf(z - c);
        if (power == 0.0) return std::exp(log_pdf);
        return std::exp(log_pdf + power * normal_log_cdf(z));
    };
    solvers::QuadratureOptions opt;
    opt.absolute_tolerance = 1e-12;
    opt.initial_panels = std::max(1, quadrature_order);
    return solvers::integrate(integrand, lo, hi, opt).value;
}

double pi_bar_inverse(int t, double p, int quadrature_order) {
    if (t < 2) throw Error(ErrorCode::InvalidArgument, "pi_bar_inverse needs t >= 2");
    if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::Domain, "pi_bar_inverse needs p in (0, 1), got " + fmt(p));
    try {
        return solvers::bisect([&](double c) { return pi_bar(t, c, quadrature_order) - p; }, -40.0, 40.0, 1e-12);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoBracket) throw;
        throw Error(ErrorCode::Domain, "pi_bar_inverse: p = " + fmt(p) + " is not attained for c in [-40, 40]");
    }
}

double hd_extrapolate(double p_k, const HdCurveParams& params, std::vector<std::string>* warnings) {
    if (params.k < 2 || params.K < params.k) {
        throw Error(ErrorCode::InvalidArgument, "hd_extrapolate needs 2 <= k <= K");
    }
    if (params.quadrature_order < 32) throw Error(ErrorCode::InvalidArgument, "quadrature order must be >= 32");
    if (std::isnan(p_k)) throw Error(ErrorCode::Domain, "hd_extrapolate: p_k is NaN");
    constexpr double kFloor = 1e-9;
    const double clamped = std::clamp(p_k, kFloor, 1.0 - kFloor);
    if (clamped != p_k && warnings) {
        warnings->push_back("p_k = " + fmt(p_k) + " clamped to " + fmt(clamped) + " for the HD estimator");
    }
    if (params.K == params.k) return clamped;
    const double c = pi_bar_inverse(params.k, clamped, params.quadrature_order);
    return pi_bar(params.K, c, params.quadrature_order);
}

}  // namespace acx
