// Acceptance gate: one line per criterion. Criteria 10 and 11 are tracked
// expectations and only warn; every other failure makes the exit status nonzero.

#include "acx/estimators.hpp"
#include "acx/extrapolation.hpp"
#include "acx/normal.hpp"
#include "acx/simlab.hpp"
#include "acx/solvers.hpp"
#include "oracles.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace acx;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    bool warn_only;
    double time_limit;  // seconds, 0 for none
    std::function<Outcome()> body;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

// ---------------------------------------------------------------------------

Outcome moment_identity() {
    sim::MetaConfig cfg;
    cfg.p = 10;
    cfg.tau = 3.0;
    cfg.r = 50;
    const sim::ClassifierSpec qda;
    const int n = 10000;
    auto moments = sim::accuracy_moments_mc(cfg, qda, {1, 4, 9}, n, 20, 101);
    Outcome out;
    const int ks[] = {2, 5, 10};
    for (int i = 0; i < 3; ++i) {
        auto truth = sim::expected_accuracy_mc(cfg, qda, ks[i], n, 202 + i);
        const double se = std::hypot(moments[i].standard_error, truth.standard_error);
        const double gap = std::abs(moments[i].value - truth.value);
        const bool pass = gap <= 3.0 * se;
        out.ok = out.ok && pass;
        out.detail += fmt("k=%g: |%.5f", ks[i], moments[i].value) + fmt(" - %.5f| = %.2g", truth.value, gap) +
                      fmt(" vs 3SE %.2g; ", 3.0 * se);
    }
    return out;
}

Outcome binomial_law() {
    sim::MetaConfig cfg;
    cfg.p = 2;
    cfg.tau = 1.0;
    cfg.r = 10;
    const sim::ClassifierSpec qda;
    std::mt19937_64 rng(5);
    const Eigen::MatrixXd factor = Eigen::MatrixXd::Identity(2, 2);
    auto cls = sim::draw_class(cfg, factor, rng, cfg.r, 1);
    auto model = sim::ClassModel::fit(cls.train, qda);
    const Eigen::VectorXd y = cls.test.row(0).transpose();
    const double u = sim::conditional_accuracy_oracle(model, y, cfg, qda, 2000000, 6);
    const int k = 6, n = 100000;
    auto v = sim::resample_win_counts(model, y, cfg, qda, k, n, 7);

    std::vector<double> observed(k, 0.0), expected(k);
    for (int x : v) observed[x] += 1.0;
    for (int x = 0; x < k; ++x) {
        expected[x] = n * std::exp(std::lgamma(k) - std::lgamma(x + 1.0) - std::lgamma(k - x)) * std::pow(u, x) *
                      std::pow(1.0 - u, k - 1 - x);
    }
    // Pool sparse cells (expected count < 5) into their neighbour toward the mode.
    std::vector<double> obs, exp;
    double carry_o = 0.0, carry_e = 0.0;
    for (int x = 0; x < k; ++x) {
        carry_o += observed[x];
        carry_e += expected[x];
        if (carry_e >= 5.0) {
            obs.push_back(carry_o);
            exp.push_back(carry_e);
            carry_o = carry_e = 0.0;
        }
    }
    if (carry_e > 0.0) {
        obs.back() += carry_o;
        exp.back() += carry_e;
    }
    double chi2 = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) chi2 += (obs[i] - exp[i]) * (obs[i] - exp[i]) / exp[i];
    const double df = static_cast<double>(obs.size() - 1);
    const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), chi2));
    return {p > 0.001, fmt("u=%.4f, chi2=%.2f", u, chi2) + fmt(" on %g df, p=%.3g", df, p)};
}

Outcome unbiasedness() {
    const int k = 10, n = 1000000;
    Outcome out;
    double worst = 0.0;
    for (double u : {0.3, 0.6, 0.9}) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(u * 1000));
        std::binomial_distribution<int> bin(k - 1, u);
        std::vector<std::vector<int>> v(100);
        for (int i = 0; i < n; ++i) v[i % 100].push_back(bin(rng));
        WinCounts w(v, k);
        auto curve = unbiased_moments(w, k);
        for (int t = 2; t <= k; ++t) {
            double sq = 0.0;
            for (const auto& cls : v) {
                for (int x : cls) {
                    double h = 1.0;
                    for (int j = 0; j < t - 1; ++j) h *= static_cast<double>(x - j) / (k - 1 - j);
                    sq += h * h;
                }
            }
            const double mean = *curve.at(t);
            const double se = std::sqrt((sq / n - mean * mean) / n);
            const double z = std::abs(mean - std::pow(u, t - 1)) / se;
            worst = std::max(worst, z);
            out.ok = out.ok && z <= 4.0;
        }
    }
    out.detail = fmt("largest |mean - u^(t-1)| = %.2f SE over u in {0.3,0.6,0.9}, t=2..10", worst);
    return out;
}

Outcome exp_recovery() {
    const auto grid = default_kappa_grid();
    struct Case {
        std::string name;
        std::vector<DecayAtom> atoms;
    };
    const std::vector<Case> cases{{"single", {{grid[120], 1.0}}}, {"two", {{grid[80], 0.6}, {grid[170], 0.4}}}};
    Outcome out;
    for (const auto& c : cases) {
        DecayMixture truth(c.atoms);
        std::vector<MomentPoint> pts;
        for (int t = 2; t <= 10; ++t) pts.push_back({t, truth.evaluate(t), false});
        MomentCurve curve(pts, 10);
        auto fit = fit_decay_mixture(curve, grid);
        double refit = 0.0;
        for (int t = 2; t <= 10; ++t) refit = std::max(refit, std::abs(fit.mixture.evaluate(t) - truth.evaluate(t)));
        const double far = std::abs(exp_extrapolate(fit.mixture, curve, 50) - truth.evaluate(50));
        out.ok = out.ok && refit <= 1e-6 && far <= 1e-4;
        out.detail += c.name + fmt(": refit %.2g, t=50 error %.2g; ", refit, far);
    }
    return out;
}

Outcome cons_beta() {
    auto w = oracle::binomial_mixture_counts(20, 20000, 100, 2024, oracle::draw_beta21);
    ConsConfig cfg;
    auto r = constrained_pmle(w, cfg);
    double worst = 0.0;
    for (int t = 1; t <= 40; ++t) worst = std::max(worst, std::abs(density_moment(r.density, t) - 2.0 / (t + 1.0)));
    const auto& x = r.density.weights();
    const double sum_err = std::abs(std::accumulate(x.begin(), x.end(), 0.0) - 1.0);
    double mono = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) mono = std::max(mono, x[i - 1] - x[i]);
    const double anchor_gap = std::abs(density_moment(r.density, 20) - r.anchor);
    const bool ok = worst <= 0.02 && sum_err <= DiscreteDensity::kSumTolerance &&
                    mono <= DiscreteDensity::kMonotoneSlack && anchor_gap <= cfg.anchor_tolerance &&
                    r.kkt_residual <= cfg.kkt_tolerance;
    return {ok, fmt("max moment error %.4f (t<=40); |sum-1| %.1g, monotone slack %.1g", worst, sum_err, mono) +
                    fmt("; anchor gap %.2g, KKT %.2g", anchor_gap, r.kkt_residual)};
}

Outcome cons_all_wins() {
    WinCounts w({std::vector<int>(50, 19), std::vector<int>(50, 19)}, 20);
    try {
        auto r = constrained_pmle(w);
        return {false, fmt("silent estimate p_20 = %.6f", density_moment(r.density, 20))};
    } catch (const ConvergenceFailure& e) {
        ExtrapolationOptions opt;
        opt.target_K = 400;
        opt.t_min = 400;
        auto reports = run_estimators(w, {Estimator::Cons}, opt);
        const bool ok = !reports[0].ok && reports[0].targets.empty() &&
                        reports[0].error_code == ErrorCode::ConvergenceFailure;
        return {ok, std::string("ConvergenceFailure: ") + e.what()};
    }
}

Outcome pi_bar_analytics() {
    double sym = 0.0, two = 0.0, trip = 0.0;
    for (int t : {2, 20, 400}) sym = std::max(sym, std::abs(pi_bar(t, 0.0) - 1.0 / t));
    for (double c : {-2.0, 0.0, 1.0, 3.0}) two = std::max(two, std::abs(pi_bar(2, c) - normal_cdf(c / std::sqrt(2.0))));
    for (int t : {2, 10, 100}) {
        for (double c : {-2.0, 0.0, 3.0}) trip = std::max(trip, std::abs(pi_bar_inverse(t, pi_bar(t, c)) - c));
    }
    return {sym <= 1e-8 && two <= 1e-8 && trip <= 1e-6,
            fmt("1/t error %.2g, two-class error %.2g, round trip %.2g", sym, two, trip)};
}

Outcome hd_properties() {
    double identity = 0.0, chance = 0.0;
    for (int k : {2, 10, 50}) {
        for (double p : {0.05, 0.3, 0.7, 0.99}) identity = std::max(identity, std::abs(hd_extrapolate(p, {k, k, 64}) - p));
    }
    for (auto [k, K] : {std::pair{2, 10}, std::pair{10, 50}, std::pair{20, 400}}) {
        chance = std::max(chance, std::abs(hd_extrapolate(1.0 / k, {k, K, 64}) - 1.0 / K));
    }
    bool increasing = true;
    double prev = 0.0;
    for (double p = 0.02; p < 0.995; p += 0.01) {
        const double y = hd_extrapolate(p, {10, 50, 64});
        increasing = increasing && y > prev;
        prev = y;
    }
    return {identity <= 1e-9 && chance <= 1e-8 && increasing,
            fmt("identity %.2g, 1/k->1/K %.2g, strictly increasing: ", identity, chance) + (increasing ? "yes" : "no")};
}

Outcome solver_oracles() {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> z;
    double nnls = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        solvers::NnlsProblem p{Eigen::MatrixXd(6, 4), Eigen::VectorXd(6)};
        for (int i = 0; i < 6; ++i) {
            p.b(i) = z(rng);
            for (int j = 0; j < 4; ++j) p.A(i, j) = z(rng);
        }
        nnls = std::max(nnls, (solvers::nnls_solve(p).w - oracle::exhaustive_nnls(p.A, p.b)).cwiseAbs().maxCoeff());
    }

    double grid_gap = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto w = oracle::binomial_mixture_counts(6, 50, 5, seed, oracle::draw_beta21);
        Pseudolikelihood pl(w, 8);
        solvers::SimplexProgram prog;
        prog.dimension = 8;
        prog.monotone = true;
        prog.objective = [&pl](std::span<const double> x, std::span<double> g) { return pl.value(x, g); };
        auto r = solvers::simplex_maximize(prog, std::vector<double>(8, 0.125));
        const double best = oracle::grid_search_monotone(
            [&w](const std::vector<double>& x) { return oracle::log_pseudolikelihood(w, x); }, 8, 12);
        grid_gap = std::max(grid_gap, std::abs(oracle::log_pseudolikelihood(w, r.w) - best));
    }

    auto w = oracle::binomial_mixture_counts(20, 2000, 20, 9, oracle::draw_beta21);
    Pseudolikelihood pl(w, 64);
    std::exponential_distribution<double> e(1.0);
    double grad = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> x(64);
        for (double& v : x) v = e(rng) + 1e-3;
        const double s = std::accumulate(x.begin(), x.end(), 0.0);
        for (double& v : x) v /= s;
        std::vector<double> g(64);
        pl.value(x, g);
        for (std::size_t r = 0; r < 64; ++r) {
            const double h = 1e-4 * x[r];
            auto hi = x, lo = x;
            hi[r] += h;
            lo[r] -= h;
            const double fd = (pl.value(hi) - pl.value(lo)) / (2.0 * h);
            grad = std::max(grad, std::abs(g[r] - fd) / std::abs(fd));
        }
    }
    return {nnls <= 1e-8 && grid_gap <= 1e-4 && grad <= 1e-6,
            fmt("NNLS vs exhaustive %.2g, M=8 grid gap %.2g, gradient rel. error %.2g", nnls, grid_gap, grad)};
}

// Criteria 10 and 11 share one set of replicates.
struct VariabilityRun {
    std::map<std::string, std::vector<double>> estimates, errors;
    std::map<std::string, int> failures;
};

const VariabilityRun& variability_run() {
    static const VariabilityRun run = [] {
        sim::ReplicationConfig cfg;
        cfg.meta.k = 10;
        cfg.meta.K = 50;
        cfg.k_list = {10};
        cfg.replicates = 20;
        VariabilityRun out;
        for (const auto& r : sim::run_replication(cfg)) {
            if (r.status != "ok") {
                ++out.failures[r.estimator];
                continue;
            }
            out.estimates[r.estimator].push_back(r.p_hat);
            out.errors[r.estimator].push_back(std::abs(r.error));
        }
        return out;
    }();
    return run;
}

double stddev(const std::vector<double>& x) {
    if (x.size() < 2) return NAN;
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / (x.size() - 1));
}

double mean(const std::vector<double>& x) {
    return x.empty() ? NAN : std::accumulate(x.begin(), x.end(), 0.0) / x.size();
}

std::string failure_note(const VariabilityRun& run) {
    std::string s;
    for (const auto& [est, n] : run.failures) s += "; " + est + " failed " + std::to_string(n) + "/20";
    return s;
}

Outcome variability_ordering() {
    const auto& run = variability_run();
    const double e = stddev(run.estimates.at("exp"));
    const double c = run.estimates.count("cons") ? stddev(run.estimates.at("cons")) : NAN;
    const double h = stddev(run.estimates.at("hd"));
    return {e >= c && e >= h, fmt("std EXP %.4f, CONS %.4f, HD %.4f", e, c, h) + failure_note(run)};
}

Outcome beats_benchmark() {
    const auto& run = variability_run();
    const double b = mean(run.errors.at("benchmark"));
    const double c = run.errors.count("cons") ? mean(run.errors.at("cons")) : NAN;
    const double h = mean(run.errors.at("hd"));
    return {c <= b && h <= b, fmt("mean abs error CONS %.4f, HD %.4f, benchmark %.4f", c, h, b)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Outcome end_to_end_determinism() {
    const auto root = fs::temp_directory_path() / ("acx_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    const std::string cli = ACX_CLI_PATH;
    std::vector<std::string> contents[2];
    const char* files[] = {"sim/replication.csv", "sim/config.json", "sim/wincounts_qda.csv", "ext/report.json",
                           "ext/curve.csv"};
    for (int run = 0; run < 2; ++run) {
        const auto dir = root / std::to_string(run);
        const std::string sim = cli + " simulate --replicates 3 --k-list 5,10 --out " + (dir / "sim").string();
        const std::string ext = cli + " extrapolate --input " + (dir / "sim" / "wincounts_qda.csv").string() +
                                " --target-K 50 --out " + (dir / "ext").string();
        for (const auto& cmd : {sim, ext}) {
            const int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
            const int status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
            if (status != 0 && status != 2) return {false, "command failed (" + std::to_string(status) + "): " + cmd};
        }
        for (const char* f : files) contents[run].push_back(slurp(dir / f));
    }
    fs::remove_all(root);
    std::string differing;
    std::size_t bytes = 0;
    for (std::size_t i = 0; i < std::size(files); ++i) {
        bytes += contents[0][i].size();
        if (contents[0][i].empty() || contents[0][i] != contents[1][i]) differing += std::string(" ") + files[i];
    }
    if (!differing.empty()) return {false, "differs or empty:" + differing};
    return {true, std::to_string(std::size(files)) + " files, " + std::to_string(bytes) + " bytes identical"};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "moment identity", false, 120.0, moment_identity},
        {2, "binomial law of V", false, 60.0, binomial_law},
        {3, "unbiasedness of UN", false, 60.0, unbiasedness},
        {4, "EXP exact recovery", false, 0.0, exp_recovery},
        {5, "CONS on Beta(2,1)", false, 300.0, cons_beta},
        {6, "CONS failure semantics", false, 0.0, cons_all_wins},
        {7, "pi_bar analytics", false, 0.0, pi_bar_analytics},
        {8, "HD identity and monotonicity", false, 0.0, hd_properties},
        {9, "solver oracles", false, 0.0, solver_oracles},
        {10, "variability ordering", true, 0.0, variability_ordering},
        {11, "extrapolation beats benchmark", true, 0.0, beats_benchmark},
        {12, "end-to-end determinism", false, 0.0, end_to_end_determinism},
    };
    int hard_failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.body();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.time_limit > 0.0 && secs > c.time_limit) {
            o.ok = false;
            o.detail += fmt("; took %.1f s, limit %.0f s", secs, c.time_limit);
        }
        const char* tag = o.ok ? "PASS" : (c.warn_only ? "WARN" : "FAIL");
        if (!o.ok && !c.warn_only) ++hard_failures;
        std::printf("[%s] %2d %-30s %s (%.2f s)\n", tag, c.id, c.name.c_str(), o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d hard failure(s)\n", hard_failures);
    return hard_failures == 0 ? 0 : 1;
}
