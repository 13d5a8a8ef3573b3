#include "acx/extrapolation.hpp"

#include "acx/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace acx {

namespace {

constexpr Estimator kAll[] = {Estimator::Unbiased, Estimator::Exp, Estimator::Cons, Estimator::Hd};

void record_failure(EstimatorReport& report, const Error& e) {
    report.ok = false;
    report.error_code = e.code();
    report.error_message = e.what();
    if (const auto* cf = dynamic_cast<const ConvergenceFailure*>(&e)) {
        if (std::isfinite(cf->kkt_residual())) report.kkt = cf->kkt_residual();
        if (std::isfinite(cf->closest_feasible_anchor())) report.closest_feasible_anchor = cf->closest_feasible_anchor();
    }
}

nlohmann::json number_or_null(std::optional<double> x) {
    if (!x || !std::isfinite(*x)) return nullptr;
    return *x;
}

}  // namespace

std::string_view estimator_name(Estimator e) noexcept {
    switch (e) {
        case Estimator::Unbiased: return "un";
        case Estimator::Exp: return "exp";
        case Estimator::Cons: return "cons";
        case Estimator::Hd: return "hd";
    }
    return "?";
}

Estimator parse_estimator(std::string_view name) {
    for (Estimator e : kAll)
        if (estimator_name(e) == name) return e;
    throw Error(ErrorCode::InvalidArgument,
                "unknown estimator '" + std::string(name) + "' (expected un, exp, cons or hd)");
}

std::vector<Estimator> parse_estimator_list(std::string_view list) {
    std::vector<bool> seen(std::size(kAll), false);
    std::size_t start = 0;
    while (start <= list.size()) {
        const std::size_t comma = std::min(list.find(',', start), list.size());
        const auto name = list.substr(start, comma - start);
        if (!name.empty()) seen[static_cast<std::size_t>(parse_estimator(name))] = true;
        start = comma + 1;
    }
    std::vector<Estimator> out;
    for (Estimator e : kAll)
        if (seen[static_cast<std::size_t>(e)]) out.push_back(e);
    if (out.empty()) throw Error(ErrorCode::InvalidArgument, "no estimators selected");
    return out;
}

double EstimatorReport::value_at(int t) const {
    for (const auto& [tt, p] : targets)
        if (tt == t) return p;
    return std::numeric_limits<double>::quiet_NaN();
}

std::vector<EstimatorReport> run_estimators(const WinCounts& w, const std::vector<Estimator>& estimators,
                                            const ExtrapolationOptions& opt) {
    const int k = static_cast<int>(w.k());
    const int K = opt.target_K == 0 ? k : opt.target_K;
    if (K < k) throw Error(ErrorCode::InvalidArgument, "target K must be >= k");
    const int t_max = opt.t_max == 0 ? K : opt.t_max;
    if (opt.t_min < 2 || t_max < opt.t_min) throw Error(ErrorCode::InvalidArgument, "invalid t range");

    const MomentCurve un = unbiased_moments(w, k, opt.convention);
    std::vector<EstimatorReport> reports;
    for (Estimator e : estimators) {
        EstimatorReport report;
        report.estimator = e;
        report.source_k = k;
        try {
            switch (e) {
                case Estimator::Unbiased:
                    for (int t = opt.t_min; t <= std::min(t_max, k); ++t) report.targets.emplace_back(t, *un.at(t));
                    if (un.any_out_of_range()) report.warnings.push_back("unbiased estimates outside [0, 1] retained");
                    break;
                case Estimator::Exp: {
                    const DecayFit fit = fit_decay_mixture(un, opt.kappa_grid);
                    report.residual = fit.residual_norm;
                    report.kkt = fit.kkt_residual;
                    report.warnings = fit.warnings;
                    for (int t = opt.t_min; t <= t_max; ++t)
                        report.targets.emplace_back(t, exp_extrapolate(fit.mixture, un, t));
                    break;
                }
                case Estimator::Cons: {
                    const ConsResult fit = constrained_pmle(w, opt.cons);
                    report.objective = fit.objective;
                    report.kkt = fit.kkt_residual;
                    report.warnings = fit.warnings;
                    for (int t = opt.t_min; t <= t_max; ++t)
                        report.targets.emplace_back(t, density_moment(fit.density, t));
                    break;
                }
                case Estimator::Hd: {
                    // The identity branch validates the parameters and applies the clamping.
                    const double p_k = hd_extrapolate(*un.at(k), {k, k, opt.quadrature_order}, &report.warnings);
                    const double c = pi_bar_inverse(k, p_k, opt.quadrature_order);
                    for (int t = opt.t_min; t <= t_max; ++t)
                        report.targets.emplace_back(t, t == k ? p_k : pi_bar(t, c, opt.quadrature_order));
                    break;
                }
            }
        } catch (const Error& err) {
            report.targets.clear();
            record_failure(report, err);
        }
        reports.push_back(std::move(report));
    }
    return reports;
}

void write_report_json(std::ostream& out, const std::vector<EstimatorReport>& reports) {
    nlohmann::ordered_json doc;
    doc["schema"] = 1;
    doc["reports"] = nlohmann::ordered_json::array();
    for (const auto& r : reports) {
        nlohmann::ordered_json j;
        j["schema"] = 1;
        j["estimator"] = std::string(estimator_name(r.estimator));
        j["source_k"] = r.source_k;
        j["targets"] = nlohmann::ordered_json::array();
        for (const auto& [t, p] : r.targets) {
            nlohmann::ordered_json entry;
            entry["t"] = t;
            entry["p_hat"] = number_or_null(p);
            j["targets"].push_back(std::move(entry));
        }
        nlohmann::ordered_json diag;
        diag["residual"] = number_or_null(r.residual);
        diag["objective"] = number_or_null(r.objective);
        diag["kkt"] = number_or_null(r.kkt);
        diag["warnings"] = r.warnings;
        if (r.closest_feasible_anchor) diag["closest_feasible_anchor"] = *r.closest_feasible_anchor;
        j["diagnostics"] = std::move(diag);
        j["status"] = r.ok ? std::string("ok") : std::string(to_string(*r.error_code));
        j["error"] = r.ok ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(r.error_message);
        doc["reports"].push_back(std::move(j));
    }
    out << doc.dump(2) << '\n';
}

void write_curve_csv(std::ostream& out, const std::vector<EstimatorReport>& reports, int t_min, int t_max) {
    out << 't';
    for (const auto& r : reports) out << ',' << estimator_name(r.estimator);
    out << '\n';
    for (int t = t_min; t <= t_max; ++t) {
        out << t;
        for (const auto& r : reports) {
            out << ',';
            const double p = r.value_at(t);
            if (std::isfinite(p)) out << io::format_double(p);
        }
        out << '\n';
    }
}

}  // namespace acx
