#include "acx/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

namespace acx::solvers {

// ---------------------------------------------------------------------------
// NNLS

double nnls_kkt_residual(const NnlsProblem& p, const Eigen::VectorXd& w) {
    const Eigen::VectorXd g = p.A.transpose() * (p.A * w - p.b);
    double kkt = 0.0;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        kkt = std::max(kkt, w[j] > 0.0 ? std::abs(g[j]) : std::max(0.0, -g[j]));
    }
    return kkt;
}

namespace {

Eigen::VectorXd solve_on_support(const NnlsProblem& p, const std::vector<Eigen::Index>& support) {
    Eigen::MatrixXd sub(p.A.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t c = 0; c < support.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = p.A.col(support[c]);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(p.A.cols());
    const Eigen::VectorXd zs = sub.colPivHouseholderQr().solve(p.b);
    for (std::size_t c = 0; c < support.size(); ++c) z[support[c]] = zs[static_cast<Eigen::Index>(c)];
    return z;
}

}  // namespace

NnlsResult nnls_solve(const NnlsProblem& p, const NnlsOptions& options) {
    const Eigen::Index n = p.A.cols();
    if (n < 1 || p.A.rows() < 1) throw Error(ErrorCode::InvalidArgument, "nnls: empty design matrix");
    if (p.b.size() != p.A.rows()) throw Error(ErrorCode::InvalidArgument, "nnls: target length mismatch");
    if (!p.A.allFinite() || !p.b.allFinite()) throw Error(ErrorCode::InvalidArgument, "nnls: non-finite input");

    const int max_iter = options.max_iterations > 0 ? options.max_iterations : static_cast<int>(10 * n);
    const double tol = options.tolerance;

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(static_cast<std::size_t>(n), false);
    std::vector<bool> rejected(static_cast<std::size_t>(n), false);
    int iterations = 0;

    auto finish = [&](bool converged) {
        NnlsResult r;
        r.w = x;
        r.residual_norm = (p.A * x - p.b).norm();
        r.kkt_residual = nnls_kkt_residual(p, x);
        r.iterations = iterations;
        if (!converged) {
            throw NnlsMaxIterations("nnls: iteration cap reached, KKT residual " + std::to_string(r.kkt_residual),
                                    std::move(r));
        }
        return r;
    };

    while (true) {
        // Negative gradient of ||Ax - b||^2 / 2.
        const Eigen::VectorXd g = p.A.transpose() * (p.b - p.A * x);
        Eigen::Index best = -1;
        double best_g = tol;
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            if (!passive[ju] && !rejected[ju] && g[j] > best_g) {
                best_g = g[j];
                best = j;
            }
        }
        if (best < 0) return finish(true);
        if (++iterations > max_iter) return finish(false);

        passive[static_cast<std::size_t>(best)] = true;
        while (true) {
            std::vector<Eigen::Index> support;
            for (Eigen::Index j = 0; j < n; ++j)
                if (passive[static_cast<std::size_t>(j)]) support.push_back(j);
            const Eigen::VectorXd z = solve_on_support(p, support);

            if (z[best] <= 0.0 && x[best] == 0.0) {
                // The entering atom cannot carry positive weight (numerically
                // dependent on the current support); skip it until x moves.
                passive[static_cast<std::size_t>(best)] = false;
                rejected[static_cast<std::size_t>(best)] = true;
                break;
            }
            bool all_positive = true;
            double alpha = 1.0;
            for (Eigen::Index j : support) {
                if (z[j] <= 0.0) {
                    all_positive = false;
                    alpha = std::min(alpha, x[j] / (x[j] - z[j]));
                }
            }
            if (all_positive) {
                x = z;
                std::fill(rejected.begin(), rejected.end(), false);
                break;
            }
            x += alpha * (z - x);
            for (Eigen::Index j : support) {
                if (x[j] <= 1e-300 || (z[j] <= 0.0 && x[j] <= std::numeric_limits<double>::epsilon() * 16)) {
                    x[j] = 0.0;
                    passive[static_cast<std::size_t>(j)] = false;
                }
            }
            if (++iterations > max_iter) return finish(false);
        }
    }
}

// ---------------------------------------------------------------------------
// Simplex programs

std::vector<double> monotone_to_suffix_weights(std::span<const double> w) {
    const std::size_t m = w.size();
    std::vector<double> theta(m);
    double prev = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
        theta[s] = static_cast<double>(m - s) * (w[s] - prev);
        prev = w[s];
    }
    return theta;
}

std::vector<double> suffix_weights_to_monotone(std::span<const double> theta) {
    const std::size_t m = theta.size();
    std::vector<double> w(m);
    double level = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
        level += theta[s] / static_cast<double>(m - s);
        w[s] = level;
    }
    return w;
}

std::vector<double> isotonic_regression(std::span<const double> y) {
    struct Block {
        double mean;
        std::size_t size;
    };
    std::vector<Block> blocks;
    blocks.reserve(y.size());
    for (double v : y) {
        blocks.push_back({v, 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].mean >= blocks.back().mean) {
            const Block top = blocks.back();
            blocks.pop_back();
            Block& below = blocks.back();
            const auto total = below.size + top.size;
            below.mean = (below.mean * static_cast<double>(below.size) + top.mean * static_cast<double>(top.size)) /
                         static_cast<double>(total);
            below.size = total;
        }
    }
    std::vector<double> out;
    out.reserve(y.size());
    for (const auto& b : blocks) out.insert(out.end(), b.size, b.mean);
    return out;
}

std::vector<double> project_monotone_simplex(std::span<const double> y) {
    // The bounded, sum-constrained projection is the clipped isotonic fit of a
    // shifted input; isotonic regression commutes with shifts, so only the
    // shift has to be searched for.
    const std::vector<double> iso = isotonic_regression(y);
    const std::size_t m = iso.size();
    // Find mu with sum max(iso - mu, 0) = 1; iso is sorted ascending.
    double suffix = 0.0;
    double mu = 0.0;
    for (std::size_t i = m; i-- > 0;) {
        suffix += iso[i];
        const double count = static_cast<double>(m - i);
        mu = (suffix - 1.0) / count;
        if (i == 0 || iso[i - 1] <= mu) break;
    }
    std::vector<double> w(m);
    for (std::size_t i = 0; i < m; ++i) w[i] = std::max(iso[i] - mu, 0.0);
    return w;
}

namespace {

// Objective, bands and gradient expressed in the coordinates the mirror ascent runs in.
class SimplexWorkspace {
public:
    SimplexWorkspace(const SimplexProgram& prog) : prog_(prog), n_(prog.dimension) {
        w_.resize(n_);
        gw_.resize(n_);
        for (const auto& band : prog.bands) {
            band_coeffs_.push_back(to_search_gradient(band.a));
        }
    }

    std::vector<double> to_search_point(std::span<const double> w) const {
        return prog_.monotone ? monotone_to_suffix_weights(w) : std::vector<double>(w.begin(), w.end());
    }

    std::vector<double> to_feasible_point(std::span<const double> x) const {
        return prog_.monotone ? suffix_weights_to_monotone(x) : std::vector<double>(x.begin(), x.end());
    }

    // Chain rule through w = S x: grad_x = S^T grad_w.
    std::vector<double> to_search_gradient(std::span<const double> gw) const {
        if (!prog_.monotone) return {gw.begin(), gw.end()};
        std::vector<double> gx(n_);
        double suffix = 0.0;
        for (std::size_t s = n_; s-- > 0;) {
            suffix += gw[s];
            gx[s] = suffix / static_cast<double>(n_ - s);
        }
        return gx;
    }

    // Raw objective f and its gradient in search coordinates.
    double objective(std::span<const double> x, std::vector<double>& gx) {
        if (prog_.monotone) {
            w_ = suffix_weights_to_monotone(x);
        } else {
            std::copy(x.begin(), x.end(), w_.begin());
        }
        std::fill(gw_.begin(), gw_.end(), 0.0);
        const double f = prog_.objective(w_, gw_);
        gx = to_search_gradient(gw_);
        return f;
    }

    double band_value(std::size_t j, std::span<const double> x) const {
        return std::inner_product(x.begin(), x.end(), band_coeffs_[j].begin(), 0.0);
    }

    const std::vector<double>& band_coeffs(std::size_t j) const { return band_coeffs_[j]; }
    std::size_t bands() const { return band_coeffs_.size(); }
    std::size_t size() const { return n_; }

private:
    const SimplexProgram& prog_;
    std::size_t n_;
    std::vector<double> w_, gw_;
    std::vector<std::vector<double>> band_coeffs_;
};

struct Multipliers {
    // PHR multipliers for a.x - hi <= 0 and lo - a.x <= 0.
    std::vector<double> upper, lower;
    double rho = 1.0;
};

double excursion(const BandConstraint& band, double value) {
    return std::max({0.0, value - band.hi, band.lo - value});
}

// Augmented Lagrangian F = f - penalty and its gradient.
double augmented(SimplexWorkspace& ws, const SimplexProgram& prog, const Multipliers& mult,
                 std::span<const double> x, std::vector<double>& g) {
    double f = ws.objective(x, g);
    if (!std::isfinite(f)) return f;
    for (std::size_t j = 0; j < ws.bands(); ++j) {
        const double value = ws.band_value(j, x);
        const double gu = value - prog.bands[j].hi;
        const double gl = prog.bands[j].lo - value;
        const double su = std::max(0.0, mult.upper[j] + mult.rho * gu);
        const double sl = std::max(0.0, mult.lower[j] + mult.rho * gl);
        f -= (su * su - mult.upper[j] * mult.upper[j] + sl * sl - mult.lower[j] * mult.lower[j]) / (2.0 * mult.rho);
        const double coeff = su - sl;
        if (coeff != 0.0) {
            const auto& a = ws.band_coeffs(j);
            for (std::size_t s = 0; s < g.size(); ++s) g[s] -= coeff * a[s];
        }
    }
    return f;
}

// Scaled violation of the simplex KKT conditions for gradient g at x.
double simplex_kkt(std::span<const double> x, std::span<const double> g) {
    double mu = 0.0;
    for (std::size_t s = 0; s < x.size(); ++s) mu += x[s] * g[s];
    double spread = 0.0;
    double excess = 0.0;
    for (std::size_t s = 0; s < x.size(); ++s) {
        spread += x[s] * std::abs(g[s] - mu);
        excess = std::max(excess, g[s] - mu);
    }
    return std::max(spread, excess) / std::max(1.0, std::abs(mu));
}

// Minimizes 0.5 x'Qx - b'x over the probability simplex by a primal active-set
// method started at the feasible point x. Q must be positive definite.
Eigen::VectorXd simplex_qp(const Eigen::MatrixXd& Q, const Eigen::VectorXd& b, Eigen::VectorXd x) {
    const Eigen::Index m = x.size();
    std::vector<bool> free(static_cast<std::size_t>(m));
    for (Eigen::Index j = 0; j < m; ++j) free[static_cast<std::size_t>(j)] = x[j] > 0.0;
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    bool stationary = false;  // x minimizes the model on the current free face
    for (int it = 0; it < 20 * static_cast<int>(m) + 50; ++it) {
        const Eigen::VectorXd grad = Q * x - b;
        std::vector<Eigen::Index> F;
        for (Eigen::Index j = 0; j < m; ++j)
            if (free[static_cast<std::size_t>(j)]) F.push_back(j);
        const auto nf = static_cast<Eigen::Index>(F.size());
        if (stationary || nf == 1) {
            double level = 0.0;
            for (auto j : F) level += grad[j];
            level /= static_cast<double>(nf);
            Eigen::Index enter = -1;
            double most = -1e-14 * scale;
            for (Eigen::Index j = 0; j < m; ++j) {
                if (free[static_cast<std::size_t>(j)]) continue;
                if (grad[j] - level < most) {
                    most = grad[j] - level;
                    enter = j;
                }
            }
            if (enter < 0) break;
            free[static_cast<std::size_t>(enter)] = true;
            stationary = false;
            continue;
        }
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nf + 1, nf + 1);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf + 1);
        for (Eigen::Index a = 0; a < nf; ++a) {
            for (Eigen::Index c = 0; c < nf; ++c) K(a, c) = Q(F[a], F[c]);
            K(a, nf) = K(nf, a) = 1.0;
            rhs[a] = -grad[F[a]];
        }
        const Eigen::VectorXd p = K.colPivHouseholderQr().solve(rhs).head(nf);
        double tau = 1.0;
        Eigen::Index block = -1;
        for (Eigen::Index a = 0; a < nf; ++a) {
            if (p[a] < 0.0 && -x[F[a]] / p[a] < tau) {
                tau = -x[F[a]] / p[a];
                block = F[a];
            }
        }
        for (Eigen::Index a = 0; a < nf; ++a) x[F[a]] = std::max(0.0, x[F[a]] + tau * p[a]);
        if (block >= 0) {
            x[block] = 0.0;
            free[static_cast<std::size_t>(block)] = false;
        } else {
            stationary = true;
        }
    }
    return x / x.sum();
}

// The iterate as a convex combination of atoms: the start point plus simplex vertices.
struct AtomSet {
    std::vector<std::vector<double>> atoms;
    std::vector<long> vertex;  // vertex index of each atom, -1 for the start point
    std::vector<double> alpha;

    std::vector<double> point(std::size_t n) const {
        std::vector<double> x(n, 0.0);
        for (std::size_t j = 0; j < atoms.size(); ++j)
            for (std::size_t s = 0; s < n; ++s) x[s] += alpha[j] * atoms[j][s];
        return x;
    }

    void prune() {
        std::size_t keep = 0;
        for (std::size_t j = 0; j < atoms.size(); ++j) {
            if (alpha[j] <= 0.0) continue;
            if (keep != j) {
                atoms[keep] = std::move(atoms[j]);
                vertex[keep] = vertex[j];
                alpha[keep] = alpha[j];
            }
            ++keep;
        }
        atoms.resize(keep);
        vertex.resize(keep);
        alpha.resize(keep);
    }
};

}  // namespace

SimplexResult simplex_maximize(const SimplexProgram& prog, std::span<const double> w0) {
    const std::size_t n = prog.dimension;
    const auto& opt = prog.options;
    if (n == 0 || !prog.objective) throw Error(ErrorCode::InvalidArgument, "simplex program is empty");
    if (w0.size() != n) throw Error(ErrorCode::InvalidArgument, "start point has the wrong dimension");
    for (const auto& band : prog.bands) {
        if (band.a.size() != n || !(band.lo <= band.hi)) {
            throw Error(ErrorCode::InvalidArgument, "malformed band constraint");
        }
    }
    {
        double sum = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            if (!(w0[r] > 0.0)) throw Error(ErrorCode::InfeasibleStart, "start point must be strictly positive");
            if (prog.monotone && r > 0 && w0[r] < w0[r - 1] - 1e-12) {
                throw Error(ErrorCode::InfeasibleStart, "start point must be nondecreasing");
            }
            sum += w0[r];
        }
        if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::InfeasibleStart, "start point must sum to one");
    }

    SimplexWorkspace ws(prog);
    std::vector<double> x0 = ws.to_search_point(w0);
    {
        double sum = 0.0;
        for (double& v : x0) {
            v = std::max(v, 0.0);
            sum += v;
        }
        for (double& v : x0) v /= sum;
    }
    std::vector<double> g(n);
    const double f_start = ws.objective(x0, g);
    if (!std::isfinite(f_start)) throw Error(ErrorCode::InfeasibleStart, "objective is not finite at the start point");

    Multipliers mult;
    mult.upper.assign(ws.bands(), 0.0);
    mult.lower.assign(ws.bands(), 0.0);
    mult.rho = 10.0;

    AtomSet set;
    set.atoms.push_back(x0);
    set.vertex.push_back(-1);
    set.alpha.push_back(1.0);

    int iterations = 0;
    bool converged = false;
    double last_violation = std::numeric_limits<double>::infinity();
    auto max_excursion = [&](std::span<const double> point) {
        double v = 0.0;
        for (std::size_t j = 0; j < ws.bands(); ++j) v = std::max(v, excursion(prog.bands[j], ws.band_value(j, point)));
        return v;
    };

    // Projected Newton on the convex hull of the atoms. The curvature along
    // a_j - x comes from forward differences of the gradient, which keeps
    // every evaluation on the simplex.
    std::vector<double> gj(n), trial(n);
    auto newton_round = [&](double& F) {
        const std::size_t m = set.atoms.size();
        std::vector<double> x = set.point(n);
        F = augmented(ws, prog, mult, x, g);
        for (int step = 0; step < 100 && iterations < opt.max_iterations; ++step) {
            ++iterations;
            if (m == 1) break;
            Eigen::VectorXd ga(static_cast<Eigen::Index>(m));
            Eigen::MatrixXd D(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
            for (std::size_t j = 0; j < m; ++j) {
                double dot = 0.0;
                for (std::size_t s = 0; s < n; ++s) {
                    D(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)) = set.atoms[j][s] - x[s];
                    dot += set.atoms[j][s] * g[s];
                }
                ga[static_cast<Eigen::Index>(j)] = dot;
            }
            constexpr double h = 1e-6;
            Eigen::MatrixXd HD(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
            for (std::size_t j = 0; j < m; ++j) {
                for (std::size_t s = 0; s < n; ++s) trial[s] = x[s] + h * D(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j));
                augmented(ws, prog, mult, trial, gj);
                for (std::size_t s = 0; s < n; ++s) HD(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)) = (gj[s] - g[s]) / h;
            }
            Eigen::MatrixXd Q = -(D.transpose() * HD);
            Q = 0.5 * (Q + Q.transpose()).eval();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Q);
            Eigen::VectorXd lambda = eig.eigenvalues();
            // Relative to the gradient too, so flat (e.g. linear) directions keep a solvable model.
            const double floor =
                1e-10 * std::max({lambda.cwiseAbs().maxCoeff(), ga.cwiseAbs().maxCoeff(), 1e-300});
            for (Eigen::Index i = 0; i < lambda.size(); ++i) lambda[i] = std::max(lambda[i], floor);
            Q = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();

            Eigen::VectorXd alpha = Eigen::Map<const Eigen::VectorXd>(set.alpha.data(), static_cast<Eigen::Index>(m));
            const Eigen::VectorXd next = simplex_qp(Q, ga + Q * alpha, alpha);
            const Eigen::VectorXd d = next - alpha;
            const double slope = ga.dot(d);
            if (!(slope > 1e-16 * std::max(1.0, std::abs(F)))) break;
            bool accepted = false;
            for (double t = 1.0; t > 1e-12; t *= 0.5) {
                for (std::size_t s = 0; s < n; ++s) {
                    double v = x[s];
                    for (std::size_t j = 0; j < m; ++j) v += t * d[static_cast<Eigen::Index>(j)] * set.atoms[j][s];
                    trial[s] = std::max(v, 0.0);
                }
                const double Ft = augmented(ws, prog, mult, trial, gj);
                if (std::isfinite(Ft) && Ft >= F + 1e-4 * t * slope) {
                    for (std::size_t j = 0; j < m; ++j) {
                        set.alpha[j] = t == 1.0 ? next[static_cast<Eigen::Index>(j)]
                                                : std::max(0.0, set.alpha[j] + t * d[static_cast<Eigen::Index>(j)]);
                    }
                    x.swap(trial);
                    g.swap(gj);
                    F = Ft;
                    accepted = true;
                    break;
                }
            }
            if (!accepted) break;
        }
        set.prune();
        return x;
    };

    std::vector<double> x = x0;
    while (iterations < opt.max_iterations) {
        // Fully corrective Frank-Wolfe on the augmented Lagrangian.
        double F = 0.0;
        bool inner_done = false;
        int stalls = 0;
        double last_F = -std::numeric_limits<double>::infinity();
        while (iterations < opt.max_iterations) {
            x = newton_round(F);
            augmented(ws, prog, mult, x, g);
            if (simplex_kkt(x, g) <= opt.kkt_tolerance) {
                inner_done = true;
                break;
            }
            if (F - last_F <= opt.relative_tolerance * std::max(1.0, std::abs(F))) {
                if (++stalls >= 3) {
                    inner_done = true;
                    break;
                }
            } else {
                stalls = 0;
            }
            last_F = F;
            const auto best = static_cast<long>(std::max_element(g.begin(), g.end()) - g.begin());
            if (std::find(set.vertex.begin(), set.vertex.end(), best) == set.vertex.end()) {
                std::vector<double> e(n, 0.0);
                e[static_cast<std::size_t>(best)] = 1.0;
                set.atoms.push_back(std::move(e));
                set.vertex.push_back(best);
                set.alpha.push_back(0.0);
            }
        }
        if (!inner_done) break;

        const double violation = max_excursion(x);
        if (violation <= opt.band_tolerance) {
            converged = true;
            break;
        }
        for (std::size_t j = 0; j < ws.bands(); ++j) {
            const double value = ws.band_value(j, x);
            mult.upper[j] = std::max(0.0, mult.upper[j] + mult.rho * (value - prog.bands[j].hi));
            mult.lower[j] = std::max(0.0, mult.lower[j] + mult.rho * (prog.bands[j].lo - value));
        }
        if (violation > 0.25 * last_violation) mult.rho = std::min(mult.rho * 10.0, 1e12);
        last_violation = violation;
    }

    // Restoration: move onto a single band along the segment to the extreme
    // point that lies furthest on the other side.
    if (ws.bands() == 1) {
        const auto& band = prog.bands[0];
        const auto& c = ws.band_coeffs(0);
        const double value = ws.band_value(0, x);
        const double target = value > band.hi ? band.hi : (value < band.lo ? band.lo : value);
        if (target != value) {
            const auto extreme = value > band.hi ? std::min_element(c.begin(), c.end())
                                                 : std::max_element(c.begin(), c.end());
            const std::size_t s = static_cast<std::size_t>(extreme - c.begin());
            if ((value - target) * (value - c[s]) > 0.0) {
                const double tau = (value - target) / (value - c[s]);
                for (double& v : x) v *= (1.0 - tau);
                x[s] += tau;
            }
        }
    }

    SimplexResult result;
    result.iterations = iterations;
    std::vector<double> gf(n);
    result.objective = ws.objective(x, gf);
    // KKT residual of the Lagrangian. With a single band the multiplier is
    // refit on the support (g_s = mu + lambda a_s) when that tightens it.
    std::vector<double> net(ws.bands());
    for (std::size_t j = 0; j < ws.bands(); ++j) net[j] = mult.upper[j] - mult.lower[j];
    auto lagrangian_kkt = [&](const std::vector<double>& lambda) {
        std::vector<double> gl = gf;
        for (std::size_t j = 0; j < ws.bands(); ++j) {
            const auto& a = ws.band_coeffs(j);
            for (std::size_t s = 0; s < n; ++s) gl[s] -= lambda[j] * a[s];
        }
        return simplex_kkt(x, gl);
    };
    result.kkt_residual = lagrangian_kkt(net);
    if (ws.bands() == 1) {
        const auto& a = ws.band_coeffs(0);
        double sw = 0.0, ma = 0.0, mg = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            sw += x[s];
            ma += x[s] * a[s];
            mg += x[s] * gf[s];
        }
        ma /= sw;
        mg /= sw;
        double saa = 0.0, sag = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            saa += x[s] * (a[s] - ma) * (a[s] - ma);
            sag += x[s] * (a[s] - ma) * (gf[s] - mg);
        }
        if (saa > 0.0) {
            const std::vector<double> refit{sag / saa};
            const double kkt = lagrangian_kkt(refit);
            if (kkt < result.kkt_residual) {
                result.kkt_residual = kkt;
                net = refit;
            }
        }
    }
    result.multipliers = net;
    result.w = ws.to_feasible_point(x);
    {
        double sum = std::accumulate(result.w.begin(), result.w.end(), 0.0);
        for (double& v : result.w) v /= sum;
    }
    result.converged = converged && max_excursion(x) <= opt.band_tolerance;

    if (ws.bands() == 0 && result.objective < f_start) {
        // Only possible when w0 was already optimal to within the tolerance.
        result.w.assign(w0.begin(), w0.end());
        result.objective = f_start;
    }
    if (!converged) {
        throw SimplexMaxIterations("simplex_maximize: iteration cap reached with KKT residual " +
                                       std::to_string(result.kkt_residual),
                                   std::move(result));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Quadrature

namespace {

// 15-point Kronrod nodes (non-negative half) with the embedded 7-point Gauss rule.
constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double lo, hi, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gauss_kronrod(const Integrand& f, double lo, double hi) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double fc = f(center);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double sum = f(center - dx) + f(center + dx);
        kronrod += kWgk[j] * sum;
        if (j % 2 == 1) gauss += kWg[j / 2] * sum;
    }
    return {lo, hi, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace

QuadratureResult integrate(const Integrand& f, double lo, double hi, const QuadratureOptions& options) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw Error(ErrorCode::InvalidArgument, "integrate: bounds must be finite with lo < hi");
    }
    const int panels = std::max(1, options.initial_panels);
    std::priority_queue<Segment> heap;
    double total = 0.0;
    double error = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double a = lo + (hi - lo) * i / panels;
        const double b = i + 1 == panels ? hi : lo + (hi - lo) * (i + 1) / panels;
        Segment s = gauss_kronrod(f, a, b);
        total += s.value;
        error += s.error;
        heap.push(s);
    }
    while (error > options.absolute_tolerance && static_cast<int>(heap.size()) < options.max_intervals) {
        const Segment worst = heap.top();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(worst.lo < mid && mid < worst.hi)) break;
        heap.pop();
        const Segment left = gauss_kronrod(f, worst.lo, mid);
        const Segment right = gauss_kronrod(f, mid, worst.hi);
        heap.push(left);
        heap.push(right);
        // Running totals steer refinement only; the returned value is re-summed in order below.
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
    }
    std::vector<Segment> all;
    all.reserve(heap.size());
    while (!heap.empty()) {
        all.push_back(heap.top());
        heap.pop();
    }
    std::sort(all.begin(), all.end(), [](const Segment& a, const Segment& b) { return a.lo < b.lo; });
    QuadratureResult r;
    r.intervals = static_cast<int>(all.size());
    for (const auto& s : all) {
        r.value += s.value;
        r.error_estimate += s.error;
    }
    if (!std::isfinite(r.value)) throw Error(ErrorCode::InvalidArgument, "integrate: integrand is not finite");
    if (r.error_estimate > options.absolute_tolerance) {
        throw ToleranceNotMet("integrate: estimated error " + std::to_string(r.error_estimate) +
                                  " exceeds tolerance",
                              r);
    }
    return r;
}

GaussLegendreRule gauss_legendre(int order) {
    if (order < 1) throw Error(ErrorCode::InvalidArgument, "gauss_legendre: order must be >= 1");
    GaussLegendreRule rule;
    rule.nodes.resize(static_cast<std::size_t>(order));
    rule.weights.resize(static_cast<std::size_t>(order));
    const double pi = std::acos(-1.0);
    for (int i = 0; i < (order + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int n = 2; n <= order; ++n) {
                const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
                p0 = p1;
                p1 = p2;
            }
            if (order == 1) p0 = 1.0;
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[static_cast<std::size_t>(i)] = -x;
        rule.nodes[static_cast<std::size_t>(order - 1 - i)] = x;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(order - 1 - i)] = w;
    }
    return rule;
}

double integrate_fixed(const Integrand& f, double lo, double hi, int panels, int order) {
    if (panels < 1) throw Error(ErrorCode::InvalidArgument, "integrate_fixed: panels must be >= 1");
    const GaussLegendreRule rule = gauss_legendre(order);
    const double width = (hi - lo) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double center = lo + (p + 0.5) * width;
        double panel = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            panel += rule.weights[i] * f(center + 0.5 * width * rule.nodes[i]);
        }
        total += 0.5 * width * panel;
    }
    return total;
}

// ---------------------------------------------------------------------------
// Root finding

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
    if (!(lo <= hi)) throw Error(ErrorCode::InvalidArgument, "bisect: lo must not exceed hi");
    double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0) || std::isnan(flo) || std::isnan(fhi)) {
        throw Error(ErrorCode::NoBracket, "bisect: f(lo) and f(hi) do not bracket a root");
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace acx::solvers
