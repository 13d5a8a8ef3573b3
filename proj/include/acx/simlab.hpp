#pragma once

// Synthetic Gaussian meta-distributions, generative classifiers trained on
// them, Monte-Carlo ground truth and the replication runner.

#include "acx/core.hpp"
#include "acx/extrapolation.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace acx::sim {

enum class CovarianceKind { Identity, Diagonal, RandomSpd };

struct CovarianceSpec {
    CovarianceKind kind = CovarianceKind::Identity;
    double lo = 1.0;  // Diagonal: variances evenly spaced on [lo, hi]
    double hi = 1.0;
    std::uint64_t seed = 0;  // RandomSpd
};

// "identity", "diagonal:lo:hi", "spd:seed"
CovarianceSpec parse_covariance(std::string_view text);
std::string format_covariance(const CovarianceSpec& spec);

// Class means ~ Normal(0, tau^2 I); every class shares the within-class covariance.
struct MetaConfig {
    int p = 10;
    double tau = 1.0;
    CovarianceSpec covariance;
    int r = 50;  // training points per class
    int m = 20;  // test points per class
    int k = 10;
    int K = 50;
    std::uint64_t seed = 1;

    // Every violated constraint, empty when valid.
    std::vector<std::string> problems() const;
    // Throws InvalidArgument listing all problems.
    void validate() const;
};

Eigen::MatrixXd covariance_matrix(const MetaConfig& cfg);

enum class ClassifierKind { Qda, GaussianNaiveBayes, NearestCentroid };

// "qda", "gnb", "nc"
std::string_view classifier_name(ClassifierKind kind) noexcept;
ClassifierKind parse_classifier(std::string_view name);

struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::Qda;
    // Added to the covariance (QDA) or the per-coordinate variances (naive Bayes).
    // Unset: 1e-3 * trace(Sigma_hat) / p for QDA, 0 for naive Bayes.
    std::optional<double> rho;
};

struct ClassData {
    Eigen::VectorXd mean;
    Eigen::MatrixXd train;  // r x p
    Eigen::MatrixXd test;   // m x p
    std::uint64_t seed = 0;
};

struct ClassEnsemble {
    MetaConfig config;
    Eigen::MatrixXd covariance;
    Eigen::MatrixXd covariance_factor;  // lower Cholesky factor
    std::vector<ClassData> classes;     // K classes
};

// Class i is generated from child_seed(cfg.seed, i), so ensembles with larger
// K extend smaller ones.
ClassEnsemble sample_ensemble(const MetaConfig& cfg);

// Draws a class (mean, training and test sample) from the meta-distribution.
ClassData draw_class(const MetaConfig& cfg, const Eigen::MatrixXd& covariance_factor, std::mt19937_64& rng,
                     int train_points, int test_points);

// A generative classification function fitted to one class's training sample.
class ClassModel {
public:
    static ClassModel fit(const Eigen::MatrixXd& train, const ClassifierSpec& spec);
    double score(const Eigen::Ref<const Eigen::VectorXd>& y) const;

private:
    ClassifierKind kind_ = ClassifierKind::Qda;
    Eigen::VectorXd mean_;
    Eigen::MatrixXd factor_;  // QDA: lower Cholesky factor of Sigma_hat + rho I
    Eigen::VectorXd variance_;  // naive Bayes
    double offset_ = 0.0;
};

// -(y - mu)' (S + rho I)^{-1} (y - mu) - log det (S + rho I), S the MLE covariance.
double qda_score(const Eigen::MatrixXd& train, const Eigen::VectorXd& y, double rho);
// sum_d log Normal(y_d; mu_d, s_d^2 + rho), s_d^2 the MLE variance.
double gnb_score(const Eigen::MatrixXd& train, const Eigen::VectorXd& y, double rho);

std::vector<ClassModel> fit_models(const ClassEnsemble& ens, const ClassifierSpec& spec);

// Test points of the subset classes (in subset order) scored against the subset's models.
ScoreMatrix score_matrix(const ClassEnsemble& ens, const ClassifierSpec& spec, const std::vector<int>& subset);
ScoreMatrix score_matrix(const ClassEnsemble& ens, const std::vector<ClassModel>& models,
                         const std::vector<int>& subset);

struct McEstimate {
    double value = 0.0;
    double standard_error = 0.0;
};

// Fraction of n_mc fresh competitor classes (new mean, new training sample)
// whose score at y falls below the given model's.
double conditional_accuracy_oracle(const ClassModel& model, const Eigen::VectorXd& y, const MetaConfig& cfg,
                                   const ClassifierSpec& spec, int n_mc, std::uint64_t seed);

// n_sets draws of V: the number of k - 1 fresh competitors beaten at y.
std::vector<int> resample_win_counts(const ClassModel& model, const Eigen::VectorXd& y, const MetaConfig& cfg,
                                     const ClassifierSpec& spec, int k, int n_sets, std::uint64_t seed);

// Accuracy over n_rep random t-subsets of the ensemble, one fresh test point per class per subset.
McEstimate true_accuracy_mc(const ClassEnsemble& ens, const ClassifierSpec& spec, int t, int n_rep,
                            std::uint64_t seed);

// Accuracy of t freshly drawn classes, averaged over n_rep independent draws.
McEstimate expected_accuracy_mc(const MetaConfig& cfg, const ClassifierSpec& spec, int t, int n_rep,
                                std::uint64_t seed);

// E[U^e] for each exponent e: n_outer draws of (class, training sample, test point),
// each scored against n_inner fresh competitors; C(W, e) / C(n_inner, e) is unbiased
// for U^e given the draw.
std::vector<McEstimate> accuracy_moments_mc(const MetaConfig& cfg, const ClassifierSpec& spec,
                                            const std::vector<int>& exponents, int n_outer, int n_inner,
                                            std::uint64_t seed);

// ---------------------------------------------------------------------------
// Replication

struct ReplicationConfig {
    MetaConfig meta;
    std::vector<ClassifierSpec> classifiers{ClassifierSpec{}};
    std::vector<int> k_list{10};
    int replicates = 1;
    // Estimators run at target K besides the benchmark; "un" is ignored.
    std::vector<Estimator> estimators{Estimator::Exp, Estimator::Cons, Estimator::Hd};
    ExtrapolationOptions extrapolation;

    std::vector<std::string> problems() const;
};

struct ReplicationRecord {
    int replicate = 0;  // 1-based
    int k = 0;
    int K = 0;
    std::string estimator;  // benchmark, exp, cons, hd
    double p_hat = 0.0;     // NaN on failure
    double truth = 0.0;
    double error = 0.0;     // p_hat - truth
    std::string status;     // "ok" or the error code
    std::string classifier;
};

std::vector<ReplicationRecord> run_replication(const ReplicationConfig& cfg);

// Win counts of replicate `replicate` (1-based) for classes 1..k, as used by run_replication.
WinCounts replication_win_counts(const ReplicationConfig& cfg, const ClassifierSpec& spec, int replicate, int k);

void write_replication_csv(std::ostream& out, const std::vector<ReplicationRecord>& records);
void write_config_json(std::ostream& out, const ReplicationConfig& cfg);

}  // namespace acx::sim
