#include "acx/core.hpp"

#include "acx/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace acx {

ScoreMatrix::ScoreMatrix(std::vector<double> scores, std::vector<int> labels, std::size_t k)
    : scores_(std::move(scores)), labels_(std::move(labels)), k_(k) {
    if (k_ < 2) throw Error(ErrorCode::InvalidArgument, "score matrix needs k >= 2 classes");
    if (labels_.empty()) throw Error(ErrorCode::InvalidArgument, "score matrix needs at least one test point");
    if (scores_.size() != labels_.size() * k_) {
        throw Error(ErrorCode::InvalidArgument, "score matrix: expected " + std::to_string(labels_.size() * k_) +
                                                    " scores, got " + std::to_string(scores_.size()));
    }
    for (std::size_t r = 0; r < labels_.size(); ++r) {
        if (labels_[r] < 0 || static_cast<std::size_t>(labels_[r]) >= k_) {
            throw Error(ErrorCode::InvalidArgument, "score matrix: label out of range on row " + std::to_string(r));
        }
    }
    for (std::size_t i = 0; i < scores_.size(); ++i) {
        if (!std::isfinite(scores_[i])) {
            throw Error(ErrorCode::InvalidArgument,
                        "score matrix: non-finite score at row " + std::to_string(i / k_) + ", column " +
                            std::to_string(i % k_));
        }
    }
}

WinCounts::WinCounts(std::vector<std::vector<int>> v, std::size_t k, bool doubled)
    : v_(std::move(v)), k_(k), doubled_(doubled) {
    if (k_ < 2) throw Error(ErrorCode::InvalidArgument, "win counts need k >= 2");
    const int hi = scale() * static_cast<int>(k_ - 1);
    for (std::size_t i = 0; i < v_.size(); ++i) {
        for (int x : v_[i]) {
            if (x < 0 || x > hi) {
                throw Error(ErrorCode::InvalidArgument, "win count " + std::to_string(x) + " for class " +
                                                            std::to_string(i) + " outside [0, " +
                                                            std::to_string(hi) + "]");
            }
        }
        total_ += v_[i].size();
    }
    if (total_ == 0) throw Error(ErrorCode::InvalidArgument, "win counts contain no test points");
}

std::vector<std::size_t> WinCounts::counts_per_class() const {
    std::vector<std::size_t> m(v_.size());
    std::transform(v_.begin(), v_.end(), m.begin(), [](const auto& row) { return row.size(); });
    return m;
}

std::vector<std::size_t> WinCounts::histogram() const {
    std::vector<std::size_t> h(static_cast<std::size_t>(scale()) * (k_ - 1) + 1, 0);
    for (const auto& row : v_)
        for (int x : row) ++h[static_cast<std::size_t>(x)];
    return h;
}

MomentCurve::MomentCurve(std::vector<MomentPoint> entries, std::size_t source_k)
    : entries_(std::move(entries)), source_k_(source_k) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        if (e.t < 1) throw Error(ErrorCode::InvalidArgument, "moment curve: t must be >= 1");
        if (i > 0 && e.t <= entries_[i - 1].t) {
            throw Error(ErrorCode::InvalidArgument, "moment curve: t values must be strictly increasing");
        }
        if (!e.out_of_range && !(e.p >= 0.0 && e.p <= 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "moment curve: p outside [0,1] without the out-of-range flag");
        }
    }
}

std::optional<double> MomentCurve::at(int t) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), t,
                               [](const MomentPoint& e, int value) { return e.t < value; });
    if (it == entries_.end() || it->t != t) return std::nullopt;
    return it->p;
}

bool MomentCurve::any_out_of_range() const noexcept {
    return std::any_of(entries_.begin(), entries_.end(), [](const MomentPoint& e) { return e.out_of_range; });
}

DiscreteDensity::DiscreteDensity(std::vector<double> weights, bool monotone)
    : weights_(std::move(weights)), monotone_(monotone) {
    if (weights_.empty()) throw Error(ErrorCode::InvalidArgument, "density needs a nonempty grid");
    double sum = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0)) throw Error(ErrorCode::InvalidArgument, "density weights must be nonnegative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
        throw Error(ErrorCode::InvalidArgument, "density weights sum to " + std::to_string(sum) + ", not 1");
    }
    if (monotone_) {
        for (std::size_t r = 0; r + 1 < weights_.size(); ++r) {
            if (weights_[r + 1] < weights_[r] - kMonotoneSlack) {
                throw Error(ErrorCode::InvalidArgument, "density flagged monotone but decreases at cell " +
                                                            std::to_string(r));
            }
        }
    }
}

DiscreteDensity DiscreteDensity::uniform(std::size_t grid_size) {
    if (grid_size == 0) throw Error(ErrorCode::InvalidArgument, "density needs a nonempty grid");
    return DiscreteDensity(std::vector<double>(grid_size, 1.0 / static_cast<double>(grid_size)), true);
}

std::vector<double> DiscreteDensity::grid() const {
    std::vector<double> u(weights_.size());
    for (std::size_t r = 0; r < u.size(); ++r) u[r] = grid_point(r);
    return u;
}

DecayMixture::DecayMixture(std::vector<DecayAtom> atoms) : atoms_(std::move(atoms)) {
    for (const auto& a : atoms_) {
        if (!(a.kappa >= 0.0) || !(a.weight >= 0.0) || !std::isfinite(a.kappa) || !std::isfinite(a.weight)) {
            throw Error(ErrorCode::InvalidArgument, "decay mixture atoms need finite kappa >= 0 and weight >= 0");
        }
    }
}

double DecayMixture::evaluate(double t) const {
    double p = 0.0;
    for (const auto& a : atoms_) p += a.weight * std::exp(-a.kappa * t);
    return p;
}

namespace {

void require_every_class_present(const ScoreMatrix& s) {
    std::vector<std::size_t> count(s.k(), 0);
    for (int label : s.labels()) ++count[static_cast<std::size_t>(label)];
    for (std::size_t c = 0; c < s.k(); ++c) {
        if (count[c] == 0) {
            throw Error(ErrorCode::MissingClass, "class " + std::to_string(c + 1) + " has no test points");
        }
    }
}

}  // namespace

WinCounts win_counts(const ScoreMatrix& s, TiePolicy policy) {
    const std::size_t k = s.k();
    std::vector<std::vector<int>> v(k);
    std::mt19937_64 coin(policy.seed);
    std::size_t ties = 0;
    std::size_t first_tie_row = 0;

    for (std::size_t r = 0; r < s.rows(); ++r) {
        const auto row = s.row(r);
        const auto truth = static_cast<std::size_t>(s.label(r));
        const double own = row[truth];
        int count = 0;
        for (std::size_t c = 0; c < k; ++c) {
            if (c == truth) continue;
            if (own > row[c]) {
                count += policy.kind == TieKind::Half ? 2 : 1;
            } else if (own == row[c]) {
                if (ties++ == 0) first_tie_row = r;
                if (policy.kind == TieKind::Half) {
                    count += 1;
                } else if (policy.kind == TieKind::Random) {
                    count += static_cast<int>(coin() >> 63);
                }
            }
        }
        v[truth].push_back(count);
    }

    if (policy.kind == TieKind::Strict && ties > 0) {
        throw TieDetected(ties, std::to_string(ties) + " exact score tie(s) involving the true class (first on row " +
                                    std::to_string(first_tie_row + 1) + ")");
    }
    return WinCounts(std::move(v), k, policy.kind == TieKind::Half);
}

std::vector<std::vector<double>> u_hat(const WinCounts& w) {
    const double denom = static_cast<double>(w.scale()) * static_cast<double>(w.k() - 1);
    std::vector<std::vector<double>> u(w.num_classes());
    for (std::size_t i = 0; i < w.num_classes(); ++i) {
        u[i].reserve(w.repeats(i));
        for (int x : w.raw_counts()[i]) u[i].push_back(static_cast<double>(x) / denom);
    }
    return u;
}

double empirical_accuracy(const ScoreMatrix& s, TiePolicy policy) {
    require_every_class_present(s);
    const std::size_t k = s.k();
    std::vector<double> correct(k, 0.0);
    std::vector<std::size_t> count(k, 0);

    if (policy.kind == TieKind::Half) {
        for (std::size_t r = 0; r < s.rows(); ++r) {
            const auto row = s.row(r);
            const auto truth = static_cast<std::size_t>(s.label(r));
            bool beaten = false;
            int tied = 0;
            for (std::size_t c = 0; c < k && !beaten; ++c) {
                if (c == truth) continue;
                if (row[c] > row[truth]) beaten = true;
                else if (row[c] == row[truth]) ++tied;
            }
            ++count[truth];
            if (!beaten) correct[truth] += 1.0 / static_cast<double>(tied + 1);
        }
    } else {
        // Correct iff the true class wins all k-1 comparisons.
        const WinCounts w = win_counts(s, policy);
        for (std::size_t i = 0; i < k; ++i) {
            for (int x : w.raw_counts()[i]) {
                ++count[i];
                if (static_cast<std::size_t>(x) == k - 1) correct[i] += 1.0;
            }
        }
    }

    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) acc += correct[i] / static_cast<double>(count[i]);
    return acc / static_cast<double>(k);
}

double density_moment(const DiscreteDensity& d, int t) {
    if (t < 1) throw Error(ErrorCode::InvalidArgument, "density_moment needs t >= 1");
    const auto& w = d.weights();
    if (t == 1) {
        double sum = 0.0;
        for (double x : w) sum += x;
        return sum;
    }
    double p = 0.0;
    for (std::size_t r = 0; r < w.size(); ++r) p += w[r] * std::pow(d.grid_point(r), t - 1);
    return p;
}

}  // namespace acx
