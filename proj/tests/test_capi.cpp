#include "acx/acx.h"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("acx_capi_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

acx_win_counts* counts(const std::vector<int>& classes, const std::vector<int>& v, size_t k) {
    acx_win_counts* w = nullptr;
    EXPECT_EQ(acx_win_counts_create(classes.data(), v.data(), v.size(), k, &w), ACX_OK) << acx_last_error();
    return w;
}

}  // namespace

TEST(CApi, ScoreMatrixToAccuracyAndWins) {
    const double scores[] = {0.9, 0.1, 0.3, 0.6, 0.2, 0.8, 0.7, 0.4};
    const int labels[] = {1, 2, 1, 2};
    acx_score_matrix* s = nullptr;
    ASSERT_EQ(acx_score_matrix_create(scores, labels, 4, 2, &s), ACX_OK);
    EXPECT_EQ(acx_score_matrix_rows(s), 4u);
    double acc = 0.0;
    ASSERT_EQ(acx_empirical_accuracy(s, ACX_TIE_STRICT, 0, &acc), ACX_OK);
    EXPECT_DOUBLE_EQ(acc, 0.5);
    acx_win_counts* w = nullptr;
    ASSERT_EQ(acx_win_counts_from_scores(s, ACX_TIE_STRICT, 0, &w), ACX_OK);
    EXPECT_EQ(acx_win_counts_total(w), 4u);
    acx_win_counts_free(w);
    acx_score_matrix_free(s);
}

TEST(CApi, TieIsReported) {
    const double scores[] = {0.5, 0.5, 0.1, 0.9};
    const int labels[] = {1, 2};
    acx_score_matrix* s = nullptr;
    ASSERT_EQ(acx_score_matrix_create(scores, labels, 2, 2, &s), ACX_OK);
    acx_win_counts* w = nullptr;
    EXPECT_EQ(acx_win_counts_from_scores(s, ACX_TIE_STRICT, 0, &w), ACX_E_TIE);
    EXPECT_EQ(w, nullptr);
    EXPECT_NE(std::string(acx_last_error()).find("tie"), std::string::npos);
    EXPECT_EQ(acx_win_counts_from_scores(s, ACX_TIE_HALF, 0, &w), ACX_OK);
    acx_win_counts_free(w);
    acx_score_matrix_free(s);
}

TEST(CApi, InvalidArguments) {
    acx_score_matrix* s = nullptr;
    EXPECT_EQ(acx_score_matrix_create(nullptr, nullptr, 1, 2, &s), ACX_E_INVALID_ARGUMENT);
    EXPECT_EQ(acx_win_counts_read_csv("/nonexistent.csv", nullptr), ACX_E_INVALID_ARGUMENT);
    acx_win_counts* w = nullptr;
    EXPECT_EQ(acx_win_counts_read_csv("/nonexistent.csv", &w), ACX_E_IO);
    EXPECT_STREQ(acx_status_name(ACX_E_CONVERGENCE), "ConvergenceFailure");
    unsigned mask = 0;
    EXPECT_EQ(acx_parse_estimators("cons,un", &mask), ACX_OK);
    EXPECT_EQ(mask, unsigned(ACX_EST_UN | ACX_EST_CONS));
    EXPECT_EQ(acx_parse_estimators("un,bogus", &mask), ACX_E_INVALID_ARGUMENT);
}

TEST(CApi, UnbiasedMoments) {
    auto* w = counts({1}, {1}, 3);
    double out[2];
    ASSERT_EQ(acx_unbiased_moments(w, 3, out), ACX_OK);
    EXPECT_DOUBLE_EQ(out[0], 0.5);
    EXPECT_DOUBLE_EQ(out[1], 0.0);
    EXPECT_EQ(acx_unbiased_moments(w, 4, out), ACX_E_RANGE);
    acx_win_counts_free(w);
}

TEST(CApi, ExtrapolateReportsPerEstimatorStatus) {
    std::vector<int> classes, v;
    for (int i = 0; i < 40; ++i) {
        classes.push_back(i % 20 + 1);
        v.push_back(19);
    }
    auto* w = counts(classes, v, 20);
    acx_extrapolation_options opt;
    acx_extrapolation_options_init(&opt);
    opt.target_K = 400;
    opt.t_min = 400;
    acx_extrapolation* e = nullptr;
    ASSERT_EQ(acx_extrapolate(w, &opt, &e), ACX_OK) << acx_last_error();
    acx_status st;
    ASSERT_EQ(acx_extrapolation_status(e, ACX_EST_CONS, &st), ACX_OK);
    EXPECT_EQ(st, ACX_E_CONVERGENCE);
    EXPECT_NE(std::string(acx_extrapolation_message(e, ACX_EST_CONS)), "");
    double p = 0.0;
    EXPECT_EQ(acx_extrapolation_value(e, ACX_EST_CONS, 400, &p), ACX_E_CONVERGENCE);
    for (auto est : {ACX_EST_UN, ACX_EST_EXP, ACX_EST_HD}) {
        ASSERT_EQ(acx_extrapolation_status(e, est, &st), ACX_OK);
        EXPECT_EQ(st, ACX_OK);
    }
    ASSERT_EQ(acx_extrapolation_value(e, ACX_EST_HD, 400, &p), ACX_OK);
    EXPECT_GT(p, 0.99);
    auto dir = scratch_dir("extrapolate");
    EXPECT_EQ(acx_extrapolation_write_json(e, (dir / "r.json").c_str()), ACX_OK);
    EXPECT_EQ(acx_extrapolation_write_curve_csv(e, (dir / "c.csv").c_str()), ACX_OK);
    EXPECT_NE(slurp(dir / "r.json").find("ConvergenceFailure"), std::string::npos);
    acx_extrapolation_free(e);
    acx_win_counts_free(w);
    fs::remove_all(dir);
}

TEST(CApi, HdFunctions) {
    double c = 1.0, p = 0.0;
    ASSERT_EQ(acx_pi_bar(2, 1.0, &p), ACX_OK);
    EXPECT_NEAR(p, 0.5 * std::erfc(-1.0 / 2.0), 1e-10);
    ASSERT_EQ(acx_pi_bar_inverse(2, p, &c), ACX_OK);
    EXPECT_NEAR(c, 1.0, 1e-6);
    EXPECT_EQ(acx_pi_bar_inverse(2, 1.5, &c), ACX_E_DOMAIN);
    ASSERT_EQ(acx_hd_extrapolate(0.1, 10, 100, &p), ACX_OK);
    EXPECT_NEAR(p, 0.01, 1e-8);
}

TEST(CApi, SimulateAndReport) {
    acx_simulation_config cfg;
    acx_simulation_config_init(&cfg);
    cfg.p = 2;
    cfg.K = 8;
    cfg.m = 4;
    cfg.r = 10;
    cfg.replicates = 2;
    const int ks[] = {3, 6};
    cfg.k_list = ks;
    cfg.k_list_length = 2;
    cfg.classifiers = "qda,nc";
    cfg.grid_size = 64;
    acx_replication* rep = nullptr;
    ASSERT_EQ(acx_simulate(&cfg, &rep), ACX_OK) << acx_last_error();
    EXPECT_EQ(acx_replication_record_count(rep), 2u * 2u * 2u * 4u);
    ASSERT_EQ(acx_replication_classifier_count(rep), 2u);
    EXPECT_STREQ(acx_replication_classifier_name(rep, 1), "nc");
    acx_win_counts* w = nullptr;
    ASSERT_EQ(acx_replication_win_counts(rep, 0, 2, 6, &w), ACX_OK);
    EXPECT_EQ(acx_win_counts_k(w), 6u);
    acx_win_counts_free(w);

    auto dir = scratch_dir("simulate");
    ASSERT_EQ(acx_replication_write_csv(rep, (dir / "rep.csv").c_str()), ACX_OK);
    ASSERT_EQ(acx_replication_write_config(rep, (dir / "cfg.json").c_str()), ACX_OK);
    ASSERT_EQ(acx_report((dir / "rep.csv").c_str(), (dir / "plot.svg").c_str(), (dir / "sum.csv").c_str()), ACX_OK);
    EXPECT_NE(slurp(dir / "plot.svg").find("data-classifier=\"nc\""), std::string::npos);
    acx_replication_free(rep);
    fs::remove_all(dir);
}

TEST(CApi, SimulateListsEveryProblem) {
    acx_simulation_config cfg;
    acx_simulation_config_init(&cfg);
    cfg.p = 0;
    cfg.r = 1;
    acx_replication* rep = nullptr;
    EXPECT_EQ(acx_simulate(&cfg, &rep), ACX_E_INVALID_ARGUMENT);
    const std::string msg = acx_last_error();
    EXPECT_NE(msg.find("p must"), std::string::npos);
    EXPECT_NE(msg.find("r must"), std::string::npos);
}
