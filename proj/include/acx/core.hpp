#pragma once

// Data model shared by every estimator: raw classification scores, pairwise
// win counts, moment curves, and the two density representations.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace acx {

// Scores of n test points against k classes, row-major. Labels are 0-based
// class indices internally; the CSV format is 1-based.
class ScoreMatrix {
public:
    ScoreMatrix(std::vector<double> scores, std::vector<int> labels, std::size_t k);

    std::size_t rows() const noexcept { return labels_.size(); }
    std::size_t k() const noexcept { return k_; }
    int label(std::size_t row) const { return labels_[row]; }
    std::span<const double> row(std::size_t r) const {
        return {scores_.data() + r * k_, k_};
    }
    double at(std::size_t r, std::size_t c) const { return scores_[r * k_ + c]; }
    const std::vector<double>& scores() const noexcept { return scores_; }
    const std::vector<int>& labels() const noexcept { return labels_; }

private:
    std::vector<double> scores_;
    std::vector<int> labels_;
    std::size_t k_;
};

enum class TieKind { Strict, Half, Random };

struct TiePolicy {
    TieKind kind = TieKind::Strict;
    std::uint64_t seed = 0;

    static TiePolicy strict() { return {TieKind::Strict, 0}; }
    static TiePolicy half() { return {TieKind::Half, 0}; }
    static TiePolicy random(std::uint64_t seed) { return {TieKind::Random, seed}; }
};

// V[i][j]: number of competitors beaten by class i's score on its j-th test point.
// Under the half tie policy entries are stored doubled (ties add 1, wins add 2).
class WinCounts {
public:
    WinCounts(std::vector<std::vector<int>> v, std::size_t k, bool doubled = false);

    std::size_t k() const noexcept { return k_; }
    std::size_t num_classes() const noexcept { return v_.size(); }
    bool doubled() const noexcept { return doubled_; }
    int scale() const noexcept { return doubled_ ? 2 : 1; }
    std::size_t repeats(std::size_t cls) const { return v_[cls].size(); }
    std::vector<std::size_t> counts_per_class() const;
    std::size_t total() const noexcept { return total_; }

    int raw(std::size_t cls, std::size_t rep) const { return v_[cls][rep]; }
    // Win count on the natural scale; may be a half-integer under the half policy.
    double value(std::size_t cls, std::size_t rep) const {
        return doubled_ ? 0.5 * v_[cls][rep] : static_cast<double>(v_[cls][rep]);
    }
    const std::vector<std::vector<int>>& raw_counts() const noexcept { return v_; }

    // Pooled histogram over raw values 0..scale*(k-1).
    std::vector<std::size_t> histogram() const;

    friend bool operator==(const WinCounts&, const WinCounts&) = default;

private:
    std::vector<std::vector<int>> v_;
    std::size_t k_;
    bool doubled_;
    std::size_t total_ = 0;
};

struct MomentPoint {
    int t = 0;
    double p = 0.0;
    // Raw estimate fell outside [0,1]; the value is kept as computed.
    bool out_of_range = false;
};

class MomentCurve {
public:
    MomentCurve(std::vector<MomentPoint> entries, std::size_t source_k);

    const std::vector<MomentPoint>& entries() const noexcept { return entries_; }
    std::size_t source_k() const noexcept { return source_k_; }
    std::optional<double> at(int t) const;
    bool any_out_of_range() const noexcept;

private:
    std::vector<MomentPoint> entries_;
    std::size_t source_k_;
};

// Cell masses on the midpoint grid u_r = (r + 1/2)/M, r = 0..M-1.
class DiscreteDensity {
public:
    static constexpr double kSumTolerance = 1e-10;
    static constexpr double kMonotoneSlack = 1e-12;

    DiscreteDensity(std::vector<double> weights, bool monotone);

    static DiscreteDensity uniform(std::size_t grid_size);

    std::size_t size() const noexcept { return weights_.size(); }
    double grid_point(std::size_t r) const {
        return (static_cast<double>(r) + 0.5) / static_cast<double>(weights_.size());
    }
    std::vector<double> grid() const;
    const std::vector<double>& weights() const noexcept { return weights_; }
    bool monotone() const noexcept { return monotone_; }

private:
    std::vector<double> weights_;
    bool monotone_;
};

struct DecayAtom {
    double kappa = 0.0;
    double weight = 0.0;
};

// p(t) = sum_l w_l exp(-kappa_l t)
class DecayMixture {
public:
    explicit DecayMixture(std::vector<DecayAtom> atoms);

    const std::vector<DecayAtom>& atoms() const noexcept { return atoms_; }
    double evaluate(double t) const;

private:
    std::vector<DecayAtom> atoms_;
};

WinCounts win_counts(const ScoreMatrix& s, TiePolicy policy = TiePolicy::strict());

std::vector<std::vector<double>> u_hat(const WinCounts& w);

// Mean over classes of the per-class rate at which the true class is the
// strict argmax. Half policy credits 1/(ties+1) to a shared maximum; random
// breaks ties with a seeded coin.
double empirical_accuracy(const ScoreMatrix& s, TiePolicy policy = TiePolicy::strict());

double density_moment(const DiscreteDensity& d, int t);

}  // namespace acx
