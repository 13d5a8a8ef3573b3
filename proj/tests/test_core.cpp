#include "acx/core.hpp"
#include "acx/error.hpp"
#include "acx/io.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

using namespace acx;

namespace {

ScoreMatrix random_scores(std::size_t k, std::size_t per_class, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    std::vector<double> scores;
    std::vector<int> labels;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < per_class; ++j) {
            labels.push_back(static_cast<int>(i));
            for (std::size_t c = 0; c < k; ++c) scores.push_back(z(rng) + (c == i ? 0.8 : 0.0));
        }
    }
    return ScoreMatrix(std::move(scores), std::move(labels), k);
}

}  // namespace

TEST(WinCounts, ClearWin) {
    ScoreMatrix s({0.9, 0.1, 0.3, 0.6}, {0, 1}, 2);
    auto w = win_counts(s);
    EXPECT_EQ(w.raw(0, 0), 1);
    EXPECT_EQ(w.raw(1, 0), 1);
}

TEST(WinCounts, TrueClassLosesBoth) {
    ScoreMatrix s({0.2, 0.5, 0.5, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0}, {0, 1, 2}, 3);
    EXPECT_EQ(win_counts(s).raw(0, 0), 0);
}

TEST(WinCounts, MatchesRecount) {
    auto s = random_scores(5, 4, 11);
    EXPECT_EQ(win_counts(s).raw_counts(), oracle::recount_wins(s));
}

TEST(WinCounts, StrictPolicyReportsTies) {
    ScoreMatrix s({0.5, 0.5, 0.5, 0.1, 0.7, 0.2}, {0, 1}, 3);
    try {
        (void)win_counts(s);
        FAIL() << "tie not reported";
    } catch (const TieDetected& e) {
        EXPECT_EQ(e.count(), 2u);
    }
}

TEST(WinCounts, HalfPolicyDoublesCounts) {
    ScoreMatrix s({0.5, 0.5, 0.1, 0.1, 0.7, 0.2}, {0, 1}, 3);
    auto w = win_counts(s, TiePolicy::half());
    EXPECT_TRUE(w.doubled());
    EXPECT_DOUBLE_EQ(w.value(0, 0), 1.5);
    EXPECT_DOUBLE_EQ(w.value(1, 0), 2.0);
}

TEST(WinCounts, RandomPolicyIsSeeded) {
    ScoreMatrix s({0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}, 2);
    auto a = win_counts(s, TiePolicy::random(3));
    auto b = win_counts(s, TiePolicy::random(3));
    EXPECT_EQ(a, b);
    EXPECT_FALSE(a.doubled());
}

TEST(WinCounts, PermutationEquivariant) {
    auto s = random_scores(4, 6, 5);
    std::vector<int> perm{2, 0, 3, 1};  // new column of old class c
    std::vector<double> scores(s.scores().size());
    std::vector<int> labels;
    for (std::size_t r = 0; r < s.rows(); ++r) {
        for (std::size_t c = 0; c < 4; ++c) scores[r * 4 + perm[c]] = s.at(r, c);
        labels.push_back(perm[s.label(r)]);
    }
    auto a = win_counts(s);
    auto b = win_counts(ScoreMatrix(scores, labels, 4));
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(a.raw_counts()[c], b.raw_counts()[perm[c]]);
}

TEST(UHat, ValuesOnLattice) {
    WinCounts w({{4, 0}, {2}}, 5);
    auto u = u_hat(w);
    EXPECT_DOUBLE_EQ(u[0][0], 1.0);
    EXPECT_DOUBLE_EQ(u[0][1], 0.0);
    EXPECT_DOUBLE_EQ(u[1][0], 0.5);
    auto s = random_scores(6, 5, 2);
    for (const auto& row : u_hat(win_counts(s))) {
        for (double x : row) EXPECT_DOUBLE_EQ(x * 5.0, std::round(x * 5.0));
    }
}

TEST(EmpiricalAccuracy, AllCorrect) {
    ScoreMatrix s({1.0, 0.0, 0.0, 1.0}, {0, 1}, 2);
    EXPECT_DOUBLE_EQ(empirical_accuracy(s), 1.0);
}

TEST(EmpiricalAccuracy, PerClassMean) {
    ScoreMatrix s({1.0, 0.0, 0.0, 1.0, 0.2, 0.8, 0.3, 0.9}, {0, 0, 1, 1}, 2);
    EXPECT_DOUBLE_EQ(empirical_accuracy(s), 0.75);
}

TEST(EmpiricalAccuracy, MatchesConfusionDiagonal) {
    auto s = random_scores(4, 9, 21);
    EXPECT_NEAR(empirical_accuracy(s), oracle::confusion_diagonal_accuracy(s), 1e-15);
}

TEST(EmpiricalAccuracy, EqualsFullWinRate) {
    auto s = random_scores(5, 7, 8);
    auto w = win_counts(s);
    double acc = 0.0;
    for (const auto& cls : w.raw_counts()) {
        acc += static_cast<double>(std::count(cls.begin(), cls.end(), 4)) / static_cast<double>(cls.size());
    }
    EXPECT_NEAR(empirical_accuracy(s), acc / 5.0, 1e-15);
}

TEST(EmpiricalAccuracy, MissingClass) {
    ScoreMatrix s({1.0, 0.0, 0.0, 0.9, 0.1, 0.0}, {0, 0}, 3);
    try {
        (void)empirical_accuracy(s);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingClass);
    }
}

TEST(DensityMoment, ZerothMoment) {
    auto d = DiscreteDensity::uniform(64);
    EXPECT_NEAR(density_moment(d, 1), 1.0, 1e-14);
}

TEST(DensityMoment, PointMassAtTop) {
    std::vector<double> w(512, 0.0);
    w.back() = 1.0;
    EXPECT_DOUBLE_EQ(density_moment(DiscreteDensity(w, true), 2), 1023.0 / 1024.0);
}

TEST(DensityMoment, LinearDensityThirdMoment) {
    std::vector<double> w(512);
    for (std::size_t r = 0; r < w.size(); ++r) w[r] = (r + 0.5) / 512.0;
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& x : w) x /= sum;
    EXPECT_NEAR(density_moment(DiscreteDensity(w, true), 3), 0.5, 1e-3);
}

TEST(DensityMoment, NonincreasingInT) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> unif;
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> w(32);
        for (double& x : w) x = unif(rng);
        const double sum = std::accumulate(w.begin(), w.end(), 0.0);
        for (double& x : w) x /= sum;
        DiscreteDensity d(w, false);
        for (int t = 1; t < 60; ++t) EXPECT_LE(density_moment(d, t + 1), density_moment(d, t));
    }
}

TEST(DiscreteDensity, RejectsDecreasingWhenMonotone) {
    EXPECT_THROW(DiscreteDensity({0.6, 0.4}, true), Error);
    EXPECT_NO_THROW(DiscreteDensity({0.6, 0.4}, false));
}

TEST(DecayMixture, Evaluates) {
    DecayMixture mix({{0.5, 1.0}});
    EXPECT_NEAR(mix.evaluate(20), std::exp(-10.0), 1e-18);
}

TEST(Io, ScoreMatrixRoundTrip) {
    auto s = random_scores(3, 4, 9);
    std::stringstream buf;
    io::write_score_matrix(buf, s);
    auto back = io::read_score_matrix(buf);
    EXPECT_EQ(back.scores(), s.scores());
    EXPECT_EQ(back.labels(), s.labels());
}

TEST(Io, WinCountsRoundTrip) {
    WinCounts w({{3, 1, 0}, {}, {2}, {4, 4}, {1}}, 5);
    std::stringstream buf;
    io::write_win_counts(buf, w);
    EXPECT_EQ(io::read_win_counts(buf), w);
}

TEST(Io, HalfCountsRoundTrip) {
    WinCounts w({{3, 1}, {2, 8}, {0}, {5}, {7}}, 5, true);
    std::stringstream buf;
    io::write_win_counts(buf, w);
    EXPECT_NE(buf.str().find("1.5"), std::string::npos);
    EXPECT_EQ(io::read_win_counts(buf), w);
}

TEST(Io, ParseErrorNamesLineAndColumn) {
    std::stringstream buf("label,c1,c2\n1,0.5,0.1\n2,0.2,oops\n");
    try {
        (void)io::read_score_matrix(buf, "scores.csv");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Parse);
        EXPECT_NE(std::string(e.what()).find("scores.csv:3:"), std::string::npos) << e.what();
    }
}

TEST(Io, MissingFile) {
    try {
        (void)io::read_win_counts_file("/nonexistent/w.csv");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Io);
    }
}

TEST(Io, FormatDoubleRoundTrips) {
    for (double x : {0.1, 1.0 / 3.0, 1e-300, 123456.789}) EXPECT_EQ(std::stod(io::format_double(x)), x);
}
