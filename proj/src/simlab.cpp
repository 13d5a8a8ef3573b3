#include "acx/simlab.hpp"

#include "acx/error.hpp"
#include "acx/io.hpp"
#include "acx/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>

namespace acx::sim {

namespace {

Eigen::VectorXd standard_normal(std::mt19937_64& rng, Eigen::Index n) {
    std::normal_distribution<double> z;
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = z(rng);
    return v;
}

double parse_number(std::string_view s, const std::string& what) {
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        throw Error(ErrorCode::InvalidArgument, "bad " + what + ": '" + std::string(s) + "'");
    }
    return x;
}

std::vector<std::string_view> split_colon(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(':', start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

McEstimate mean_and_se(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double se = x.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return {mean, se};
}

Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& cov) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularCovariance, "class covariance is not positive definite");
    return llt.matrixL();
}

// C(w, e) / C(n, e)
double binomial_ratio(int w, int n, int e) {
    if (w < e) return 0.0;
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= static_cast<double>(w - i) / static_cast<double>(n - i);
    return r;
}

bool strictly_best(std::span<const double> row, std::size_t own) {
    for (std::size_t c = 0; c < row.size(); ++c)
        if (c != own && row[c] >= row[own]) return false;
    return true;
}

}  // namespace

CovarianceSpec parse_covariance(std::string_view text) {
    const auto parts = split_colon(text);
    CovarianceSpec spec;
    if (parts[0] == "identity" && parts.size() == 1) return spec;
    if (parts[0] == "diagonal" && parts.size() == 3) {
        spec.kind = CovarianceKind::Diagonal;
        spec.lo = parse_number(parts[1], "variance");
        spec.hi = parse_number(parts[2], "variance");
        if (!(spec.lo > 0.0 && spec.lo <= spec.hi)) {
            throw Error(ErrorCode::InvalidArgument, "diagonal covariance needs 0 < lo <= hi");
        }
        return spec;
    }
    if (parts[0] == "spd" && parts.size() == 2) {
        spec.kind = CovarianceKind::RandomSpd;
        std::uint64_t seed = 0;
        auto [ptr, ec] = std::from_chars(parts[1].data(), parts[1].data() + parts[1].size(), seed);
        if (parts[1].empty() || ec != std::errc() || ptr != parts[1].data() + parts[1].size()) {
            throw Error(ErrorCode::InvalidArgument, "bad covariance seed: '" + std::string(parts[1]) + "'");
        }
        spec.seed = seed;
        return spec;
    }
    throw Error(ErrorCode::InvalidArgument,
                "covariance must be identity, diagonal:lo:hi or spd:seed, got '" + std::string(text) + "'");
}

std::string format_covariance(const CovarianceSpec& spec) {
    switch (spec.kind) {
        case CovarianceKind::Identity: return "identity";
        case CovarianceKind::Diagonal: return "diagonal:" + io::format_double(spec.lo) + ":" + io::format_double(spec.hi);
        case CovarianceKind::RandomSpd: return "spd:" + std::to_string(spec.seed);
    }
    return "?";
}

std::vector<std::string> MetaConfig::problems() const {
    std::vector<std::string> out;
    if (p < 1) out.push_back("p must be >= 1");
    if (!(tau >= 0.0) || !std::isfinite(tau)) out.push_back("tau must be finite and >= 0");
    if (r < 2) out.push_back("r must be >= 2");
    if (m < 1) out.push_back("m must be >= 1");
    if (k < 2) out.push_back("k must be >= 2");
    if (K < k) out.push_back("K must be >= k");
    if (covariance.kind == CovarianceKind::Diagonal && !(covariance.lo > 0.0 && covariance.lo <= covariance.hi)) {
        out.push_back("diagonal covariance needs 0 < lo <= hi");
    }
    return out;
}

void MetaConfig::validate() const {
    const auto list = problems();
    if (list.empty()) return;
    std::string msg = "invalid simulation config:";
    for (const auto& p : list) msg += "\n  " + p;
    throw Error(ErrorCode::InvalidArgument, msg);
}

Eigen::MatrixXd covariance_matrix(const MetaConfig& cfg) {
    const Eigen::Index p = cfg.p;
    switch (cfg.covariance.kind) {
        case CovarianceKind::Identity: return Eigen::MatrixXd::Identity(p, p);
        case CovarianceKind::Diagonal: {
            Eigen::VectorXd d(p);
            for (Eigen::Index i = 0; i < p; ++i) {
                const double f = p == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(p - 1);
                d[i] = cfg.covariance.lo + f * (cfg.covariance.hi - cfg.covariance.lo);
            }
            return d.asDiagonal();
        }
        case CovarianceKind::RandomSpd: {
            std::mt19937_64 rng(cfg.covariance.seed);
            Eigen::MatrixXd A(p, p);
            for (Eigen::Index j = 0; j < p; ++j) A.col(j) = standard_normal(rng, p);
            Eigen::MatrixXd S = A * A.transpose() / static_cast<double>(p) + 0.5 * Eigen::MatrixXd::Identity(p, p);
            return S * (static_cast<double>(p) / S.trace());
        }
    }
    return Eigen::MatrixXd::Identity(p, p);
}

std::string_view classifier_name(ClassifierKind kind) noexcept {
    switch (kind) {
        case ClassifierKind::Qda: return "qda";
        case ClassifierKind::GaussianNaiveBayes: return "gnb";
        case ClassifierKind::NearestCentroid: return "nc";
    }
    return "?";
}

ClassifierKind parse_classifier(std::string_view name) {
    for (auto kind : {ClassifierKind::Qda, ClassifierKind::GaussianNaiveBayes, ClassifierKind::NearestCentroid})
        if (classifier_name(kind) == name) return kind;
    throw Error(ErrorCode::InvalidArgument, "unknown classifier '" + std::string(name) + "' (expected qda, gnb or nc)");
}

ClassData draw_class(const MetaConfig& cfg, const Eigen::MatrixXd& factor, std::mt19937_64& rng, int train_points,
                     int test_points) {
    ClassData c;
    c.mean = cfg.tau * standard_normal(rng, cfg.p);
    c.train.resize(train_points, cfg.p);
    for (int i = 0; i < train_points; ++i) c.train.row(i) = (c.mean + factor * standard_normal(rng, cfg.p)).transpose();
    c.test.resize(test_points, cfg.p);
    for (int i = 0; i < test_points; ++i) c.test.row(i) = (c.mean + factor * standard_normal(rng, cfg.p)).transpose();
    return c;
}

ClassEnsemble sample_ensemble(const MetaConfig& cfg) {
    cfg.validate();
    ClassEnsemble ens;
    ens.config = cfg;
    ens.covariance = covariance_matrix(cfg);
    ens.covariance_factor = cholesky_factor(ens.covariance);
    ens.classes.reserve(static_cast<std::size_t>(cfg.K));
    for (int i = 0; i < cfg.K; ++i) {
        const std::uint64_t seed = parallel::child_seed(cfg.seed, static_cast<std::uint64_t>(i));
        std::mt19937_64 rng(seed);
        ens.classes.push_back(draw_class(cfg, ens.covariance_factor, rng, cfg.r, cfg.m));
        ens.classes.back().seed = seed;
    }
    return ens;
}

ClassModel ClassModel::fit(const Eigen::MatrixXd& train, const ClassifierSpec& spec) {
    if (train.rows() < 1) throw Error(ErrorCode::InvalidArgument, "empty training sample");
    if (spec.rho && !(*spec.rho >= 0.0)) throw Error(ErrorCode::InvalidArgument, "rho must be >= 0");
    ClassModel m;
    m.kind_ = spec.kind;
    m.mean_ = train.colwise().mean().transpose();
    const auto n = static_cast<double>(train.rows());
    const Eigen::Index p = train.cols();
    switch (spec.kind) {
        case ClassifierKind::Qda: {
            const Eigen::MatrixXd centered = train.rowwise() - m.mean_.transpose();
            Eigen::MatrixXd S = centered.transpose() * centered / n;
            const double rho = spec.rho ? *spec.rho : 1e-3 * S.trace() / static_cast<double>(p);
            if (rho == 0.0 && train.rows() <= p) {
                throw Error(ErrorCode::SingularCovariance, "QDA covariance is singular: r = " +
                                                               std::to_string(train.rows()) + " <= p = " +
                                                               std::to_string(p) + " with rho = 0");
            }
            S.diagonal().array() += rho;
            Eigen::LLT<Eigen::MatrixXd> llt(S);
            if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularCovariance, "QDA covariance is singular");
            m.factor_ = llt.matrixL();
            m.offset_ = -2.0 * m.factor_.diagonal().array().log().sum();
            break;
        }
        case ClassifierKind::GaussianNaiveBayes: {
            const double rho = spec.rho.value_or(0.0);
            m.variance_ = (train.rowwise() - m.mean_.transpose()).array().square().colwise().mean().transpose();
            m.variance_.array() += rho;
            if (!(m.variance_.minCoeff() > 0.0)) {
                throw Error(ErrorCode::SingularCovariance, "naive Bayes variance is zero; use rho > 0");
            }
            m.offset_ = -0.5 * (2.0 * std::numbers::pi * m.variance_.array()).log().sum();
            break;
        }
        case ClassifierKind::NearestCentroid:
            break;
    }
    return m;
}

double ClassModel::score(const Eigen::Ref<const Eigen::VectorXd>& y) const {
    const Eigen::VectorXd d = y - mean_;
    switch (kind_) {
        case ClassifierKind::Qda: {
            const Eigen::VectorXd z = factor_.triangularView<Eigen::Lower>().solve(d);
            return -z.squaredNorm() + offset_;
        }
        case ClassifierKind::GaussianNaiveBayes:
            return offset_ - 0.5 * (d.array().square() / variance_.array()).sum();
        case ClassifierKind::NearestCentroid:
            return -d.squaredNorm();
    }
    return 0.0;
}

double qda_score(const Eigen::MatrixXd& train, const Eigen::VectorXd& y, double rho) {
    return ClassModel::fit(train, {ClassifierKind::Qda, rho}).score(y);
}

double gnb_score(const Eigen::MatrixXd& train, const Eigen::VectorXd& y, double rho) {
    return ClassModel::fit(train, {ClassifierKind::GaussianNaiveBayes, rho}).score(y);
}

std::vector<ClassModel> fit_models(const ClassEnsemble& ens, const ClassifierSpec& spec) {
    std::vector<ClassModel> models;
    models.reserve(ens.classes.size());
    for (const auto& c : ens.classes) models.push_back(ClassModel::fit(c.train, spec));
    return models;
}

ScoreMatrix score_matrix(const ClassEnsemble& ens, const std::vector<ClassModel>& models,
                         const std::vector<int>& subset) {
    if (subset.size() < 2) throw Error(ErrorCode::InvalidArgument, "class subset needs at least two classes");
    for (int c : subset) {
        if (c < 0 || static_cast<std::size_t>(c) >= ens.classes.size()) {
            throw Error(ErrorCode::InvalidArgument, "class subset index out of range");
        }
    }
    const std::size_t k = subset.size();
    std::vector<double> scores;
    std::vector<int> labels;
    for (std::size_t a = 0; a < k; ++a) {
        const auto& test = ens.classes[static_cast<std::size_t>(subset[a])].test;
        for (Eigen::Index j = 0; j < test.rows(); ++j) {
            const Eigen::VectorXd y = test.row(j).transpose();
            for (std::size_t b = 0; b < k; ++b) scores.push_back(models[static_cast<std::size_t>(subset[b])].score(y));
            labels.push_back(static_cast<int>(a));
        }
    }
    return ScoreMatrix(std::move(scores), std::move(labels), k);
}

ScoreMatrix score_matrix(const ClassEnsemble& ens, const ClassifierSpec& spec, const std::vector<int>& subset) {
    std::vector<ClassModel> models(ens.classes.size());
    for (int c : subset) {
        if (c >= 0 && static_cast<std::size_t>(c) < ens.classes.size()) {
            models[static_cast<std::size_t>(c)] = ClassModel::fit(ens.classes[static_cast<std::size_t>(c)].train, spec);
        }
    }
    return score_matrix(ens, models, subset);
}

double conditional_accuracy_oracle(const ClassModel& model, const Eigen::VectorXd& y, const MetaConfig& cfg,
                                   const ClassifierSpec& spec, int n_mc, std::uint64_t seed) {
    if (n_mc < 1) throw Error(ErrorCode::InvalidArgument, "n_mc must be >= 1");
    cfg.validate();
    const Eigen::MatrixXd factor = cholesky_factor(covariance_matrix(cfg));
    const double own = model.score(y);
    std::mt19937_64 rng(seed);
    long wins = 0;
    for (int i = 0; i < n_mc; ++i) {
        const ClassData rival = draw_class(cfg, factor, rng, cfg.r, 0);
        if (ClassModel::fit(rival.train, spec).score(y) < own) ++wins;
    }
    return static_cast<double>(wins) / static_cast<double>(n_mc);
}

std::vector<int> resample_win_counts(const ClassModel& model, const Eigen::VectorXd& y, const MetaConfig& cfg,
                                     const ClassifierSpec& spec, int k, int n_sets, std::uint64_t seed) {
    if (k < 2 || n_sets < 1) throw Error(ErrorCode::InvalidArgument, "resample_win_counts needs k >= 2 and n_sets >= 1");
    cfg.validate();
    const Eigen::MatrixXd factor = cholesky_factor(covariance_matrix(cfg));
    const double own = model.score(y);
    std::mt19937_64 rng(seed);
    std::vector<int> v(static_cast<std::size_t>(n_sets), 0);
    for (auto& count : v) {
        for (int c = 0; c + 1 < k; ++c) {
            const ClassData rival = draw_class(cfg, factor, rng, cfg.r, 0);
            if (ClassModel::fit(rival.train, spec).score(y) < own) ++count;
        }
    }
    return v;
}

McEstimate true_accuracy_mc(const ClassEnsemble& ens, const ClassifierSpec& spec, int t, int n_rep,
                            std::uint64_t seed) {
    const int K = static_cast<int>(ens.classes.size());
    if (t < 2 || t > K || n_rep < 1) throw Error(ErrorCode::InvalidArgument, "true_accuracy_mc needs 2 <= t <= K, n_rep >= 1");
    const auto models = fit_models(ens, spec);
    std::vector<double> acc(static_cast<std::size_t>(n_rep));
    parallel::for_each_index(acc.size(), [&](std::size_t rep) {
        std::mt19937_64 rng(parallel::child_seed(seed, rep));
        std::vector<int> order(static_cast<std::size_t>(K));
        std::iota(order.begin(), order.end(), 0);
        for (int i = 0; i < t; ++i) {
            std::uniform_int_distribution<int> pick(i, K - 1);
            std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(rng))]);
        }
        int correct = 0;
        std::vector<double> row(static_cast<std::size_t>(t));
        for (int a = 0; a < t; ++a) {
            const auto& cls = ens.classes[static_cast<std::size_t>(order[static_cast<std::size_t>(a)])];
            const Eigen::VectorXd y = cls.mean + ens.covariance_factor * standard_normal(rng, ens.config.p);
            for (int b = 0; b < t; ++b)
                row[static_cast<std::size_t>(b)] = models[static_cast<std::size_t>(order[static_cast<std::size_t>(b)])].score(y);
            if (strictly_best(row, static_cast<std::size_t>(a))) ++correct;
        }
        acc[rep] = static_cast<double>(correct) / static_cast<double>(t);
    });
    return mean_and_se(acc);
}

McEstimate expected_accuracy_mc(const MetaConfig& cfg, const ClassifierSpec& spec, int t, int n_rep,
                                std::uint64_t seed) {
    if (t < 2 || n_rep < 1) throw Error(ErrorCode::InvalidArgument, "expected_accuracy_mc needs t >= 2, n_rep >= 1");
    cfg.validate();
    const Eigen::MatrixXd factor = cholesky_factor(covariance_matrix(cfg));
    std::vector<double> acc(static_cast<std::size_t>(n_rep));
    parallel::for_each_index(acc.size(), [&](std::size_t rep) {
        std::mt19937_64 rng(parallel::child_seed(seed, rep));
        std::vector<ClassData> classes;
        std::vector<ClassModel> models;
        for (int i = 0; i < t; ++i) {
            classes.push_back(draw_class(cfg, factor, rng, cfg.r, 1));
            models.push_back(ClassModel::fit(classes.back().train, spec));
        }
        int correct = 0;
        std::vector<double> row(static_cast<std::size_t>(t));
        for (int a = 0; a < t; ++a) {
            const Eigen::VectorXd y = classes[static_cast<std::size_t>(a)].test.row(0).transpose();
            for (int b = 0; b < t; ++b) row[static_cast<std::size_t>(b)] = models[static_cast<std::size_t>(b)].score(y);
            if (strictly_best(row, static_cast<std::size_t>(a))) ++correct;
        }
        acc[rep] = static_cast<double>(correct) / static_cast<double>(t);
    });
    return mean_and_se(acc);
}

std::vector<McEstimate> accuracy_moments_mc(const MetaConfig& cfg, const ClassifierSpec& spec,
                                            const std::vector<int>& exponents, int n_outer, int n_inner,
                                            std::uint64_t seed) {
    if (n_outer < 1) throw Error(ErrorCode::InvalidArgument, "n_outer must be >= 1");
    for (int e : exponents) {
        if (e < 0 || e > n_inner) throw Error(ErrorCode::InvalidArgument, "exponents must lie in 0..n_inner");
    }
    cfg.validate();
    const Eigen::MatrixXd factor = cholesky_factor(covariance_matrix(cfg));
    std::vector<int> wins(static_cast<std::size_t>(n_outer));
    parallel::for_each_index(wins.size(), [&](std::size_t i) {
        std::mt19937_64 rng(parallel::child_seed(seed, i));
        const ClassData own = draw_class(cfg, factor, rng, cfg.r, 1);
        const Eigen::VectorXd y = own.test.row(0).transpose();
        const double s = ClassModel::fit(own.train, spec).score(y);
        int w = 0;
        for (int c = 0; c < n_inner; ++c) {
            const ClassData rival = draw_class(cfg, factor, rng, cfg.r, 0);
            if (ClassModel::fit(rival.train, spec).score(y) < s) ++w;
        }
        wins[i] = w;
    });
    std::vector<McEstimate> out;
    for (int e : exponents) {
        std::vector<double> x(wins.size());
        for (std::size_t i = 0; i < wins.size(); ++i) x[i] = binomial_ratio(wins[i], n_inner, e);
        out.push_back(mean_and_se(x));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Replication

std::vector<std::string> ReplicationConfig::problems() const {
    auto out = meta.problems();
    if (replicates < 1) out.push_back("replicates must be >= 1");
    if (classifiers.empty()) out.push_back("at least one classifier is required");
    if (k_list.empty()) out.push_back("k list is empty");
    for (int k : k_list) {
        if (k < 2 || k > meta.K) out.push_back("k = " + std::to_string(k) + " outside 2..K");
    }
    for (const auto& c : classifiers) {
        if (c.rho && !(*c.rho >= 0.0)) out.push_back("rho must be >= 0");
    }
    if (extrapolation.cons.grid_size < 16) out.push_back("grid size must be >= 16");
    if (extrapolation.quadrature_order < 32) out.push_back("quadrature order must be >= 32");
    return out;
}

namespace {

void validate(const ReplicationConfig& cfg) {
    const auto list = cfg.problems();
    if (list.empty()) return;
    std::string msg = "invalid simulation config:";
    for (const auto& p : list) msg += "\n  " + p;
    throw Error(ErrorCode::InvalidArgument, msg);
}

MetaConfig replicate_meta(const ReplicationConfig& cfg, int replicate) {
    MetaConfig meta = cfg.meta;
    meta.seed = parallel::child_seed(cfg.meta.seed ^ 0x5eedULL, static_cast<std::uint64_t>(replicate));
    return meta;
}

ScoreMatrix leading_block(const ScoreMatrix& full, std::size_t k) {
    std::vector<double> scores;
    std::vector<int> labels;
    for (std::size_t r = 0; r < full.rows(); ++r) {
        if (static_cast<std::size_t>(full.label(r)) >= k) continue;
        const auto row = full.row(r);
        scores.insert(scores.end(), row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k));
        labels.push_back(full.label(r));
    }
    return ScoreMatrix(std::move(scores), std::move(labels), k);
}

ScoreMatrix full_matrix(const ClassEnsemble& ens, const ClassifierSpec& spec) {
    std::vector<int> all(ens.classes.size());
    std::iota(all.begin(), all.end(), 0);
    return score_matrix(ens, fit_models(ens, spec), all);
}

}  // namespace

std::vector<ReplicationRecord> run_replication(const ReplicationConfig& cfg) {
    validate(cfg);
    const int K = cfg.meta.K;
    ExtrapolationOptions opt = cfg.extrapolation;
    opt.target_K = K;
    opt.t_min = K;
    opt.t_max = K;
    std::vector<Estimator> estimators;
    for (Estimator e : cfg.estimators)
        if (e != Estimator::Unbiased) estimators.push_back(e);

    std::vector<std::vector<ReplicationRecord>> per_rep(static_cast<std::size_t>(cfg.replicates));
    parallel::for_each_index(per_rep.size(), [&](std::size_t idx) {
        const int replicate = static_cast<int>(idx) + 1;
        const ClassEnsemble ens = sample_ensemble(replicate_meta(cfg, replicate));
        auto& out = per_rep[idx];
        for (const auto& spec : cfg.classifiers) {
            const std::string classifier(classifier_name(spec.kind));
            const ScoreMatrix full = full_matrix(ens, spec);
            const double truth = empirical_accuracy(full);
            auto add = [&](int k, std::string estimator, double p_hat, std::string status) {
                out.push_back({replicate, k, K, std::move(estimator), p_hat, truth, p_hat - truth, std::move(status),
                               classifier});
            };
            for (int k : cfg.k_list) {
                const ScoreMatrix block = leading_block(full, static_cast<std::size_t>(k));
                add(k, "benchmark", empirical_accuracy(block), "ok");
                const WinCounts w = win_counts(block);
                for (const auto& report : run_estimators(w, estimators, opt)) {
                    const double p = report.ok ? report.value_at(K) : std::numeric_limits<double>::quiet_NaN();
                    add(k, std::string(estimator_name(report.estimator)), p,
                        report.ok ? "ok" : std::string(to_string(*report.error_code)));
                }
            }
        }
    });
    std::vector<ReplicationRecord> records;
    for (auto& rep : per_rep) std::move(rep.begin(), rep.end(), std::back_inserter(records));
    return records;
}

WinCounts replication_win_counts(const ReplicationConfig& cfg, const ClassifierSpec& spec, int replicate, int k) {
    validate(cfg);
    if (replicate < 1 || replicate > cfg.replicates) throw Error(ErrorCode::InvalidArgument, "replicate out of range");
    if (k < 2 || k > cfg.meta.K) throw Error(ErrorCode::InvalidArgument, "k outside 2..K");
    const ClassEnsemble ens = sample_ensemble(replicate_meta(cfg, replicate));
    return win_counts(leading_block(full_matrix(ens, spec), static_cast<std::size_t>(k)));
}

void write_replication_csv(std::ostream& out, const std::vector<ReplicationRecord>& records) {
    out << "replicate,k,K,estimator,p_hat,truth,error,status,classifier\n";
    for (const auto& r : records) {
        out << r.replicate << ',' << r.k << ',' << r.K << ',' << r.estimator << ',';
        if (std::isfinite(r.p_hat)) out << io::format_double(r.p_hat);
        out << ',' << io::format_double(r.truth) << ',';
        if (std::isfinite(r.error)) out << io::format_double(r.error);
        out << ',' << r.status << ',' << r.classifier << '\n';
    }
}

void write_config_json(std::ostream& out, const ReplicationConfig& cfg) {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["p"] = cfg.meta.p;
    j["tau"] = cfg.meta.tau;
    j["covariance"] = format_covariance(cfg.meta.covariance);
    j["r"] = cfg.meta.r;
    j["m"] = cfg.meta.m;
    j["K"] = cfg.meta.K;
    j["seed"] = cfg.meta.seed;
    j["replicates"] = cfg.replicates;
    j["k_list"] = cfg.k_list;
    auto classifiers = nlohmann::ordered_json::array();
    for (const auto& c : cfg.classifiers) {
        nlohmann::ordered_json entry;
        entry["kind"] = std::string(classifier_name(c.kind));
        entry["rho"] = c.rho ? nlohmann::ordered_json(*c.rho) : nlohmann::ordered_json("default");
        classifiers.push_back(std::move(entry));
    }
    j["classifiers"] = std::move(classifiers);
    auto estimators = nlohmann::ordered_json::array();
    for (Estimator e : cfg.estimators) estimators.push_back(std::string(estimator_name(e)));
    j["estimators"] = std::move(estimators);
    const auto& ex = cfg.extrapolation;
    j["grid_size"] = ex.cons.grid_size;
    j["anchor_tolerance"] = ex.cons.anchor_tolerance;
    j["cons_max_iterations"] = ex.cons.max_iterations;
    j["quadrature_order"] = ex.quadrature_order;
    j["kappa_grid"] = ex.kappa_grid;
    out << j.dump(2) << '\n';
}

}  // namespace acx::sim
