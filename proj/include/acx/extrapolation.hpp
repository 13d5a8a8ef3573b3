#pragma once

// Runs a selection of estimators on one set of win counts and renders the
// results as the report JSON and the wide curve CSV.

#include "acx/core.hpp"
#include "acx/error.hpp"
#include "acx/estimators.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace acx {

enum class Estimator { Unbiased, Exp, Cons, Hd };

// "un", "exp", "cons", "hd"
std::string_view estimator_name(Estimator e) noexcept;
Estimator parse_estimator(std::string_view name);
// Comma-separated list, duplicates removed, canonical order kept.
std::vector<Estimator> parse_estimator_list(std::string_view list);

struct ExtrapolationOptions {
    int target_K = 0;  // 0: the source k
    int t_min = 2;
    int t_max = 0;     // 0: target_K
    std::vector<double> kappa_grid = default_kappa_grid();
    ConsConfig cons;
    int quadrature_order = 64;
    TrialConvention convention = TrialConvention::KMinusOne;
};

struct EstimatorReport {
    Estimator estimator = Estimator::Unbiased;
    int source_k = 0;
    std::vector<std::pair<int, double>> targets;
    std::optional<double> residual;
    std::optional<double> objective;
    std::optional<double> kkt;
    std::vector<std::string> warnings;

    bool ok = true;
    std::optional<ErrorCode> error_code;
    std::string error_message;
    std::optional<double> closest_feasible_anchor;

    // NaN when t is not among the targets.
    double value_at(int t) const;
};

std::vector<EstimatorReport> run_estimators(const WinCounts& w, const std::vector<Estimator>& estimators,
                                            const ExtrapolationOptions& options);

// {"schema":1,"reports":[{"schema":1,"estimator":...,"source_k":...,"targets":[{"t":..,"p_hat":..}],
//   "diagnostics":{"residual":..,"objective":..,"kkt":..,"warnings":[..]},"status":"ok"|code,"error":..}]}
void write_report_json(std::ostream& out, const std::vector<EstimatorReport>& reports);

// Header `t,<estimator>...`; one row per t in [t_min, t_max]; empty where an estimator has no value.
void write_curve_csv(std::ostream& out, const std::vector<EstimatorReport>& reports, int t_min, int t_max);

}  // namespace acx
