#include "acx/acx.h"

#include "acx/core.hpp"
#include "acx/error.hpp"
#include "acx/estimators.hpp"
#include "acx/extrapolation.hpp"
#include "acx/io.hpp"
#include "acx/report.hpp"
#include "acx/simlab.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <new>
#include <string>
#include <utility>
#include <vector>

struct acx_score_matrix {
    acx::ScoreMatrix value;
};

struct acx_win_counts {
    acx::WinCounts value;
};

struct acx_extrapolation {
    std::vector<acx::EstimatorReport> reports;
    int t_min = 2;
    int t_max = 2;
};

struct acx_replication {
    acx::sim::ReplicationConfig config;
    std::vector<acx::sim::ReplicationRecord> records;
    std::vector<std::string> classifier_names;
};

namespace {

thread_local std::string last_error;

acx_status to_status(acx::ErrorCode code) {
    using acx::ErrorCode;
    switch (code) {
        case ErrorCode::InvalidArgument: return ACX_E_INVALID_ARGUMENT;
        case ErrorCode::Parse: return ACX_E_PARSE;
        case ErrorCode::Io: return ACX_E_IO;
        case ErrorCode::TieDetected: return ACX_E_TIE;
        case ErrorCode::MissingClass: return ACX_E_MISSING_CLASS;
        case ErrorCode::Range: return ACX_E_RANGE;
        case ErrorCode::Domain: return ACX_E_DOMAIN;
        case ErrorCode::ConvergenceFailure: return ACX_E_CONVERGENCE;
        case ErrorCode::MaxIterations: return ACX_E_MAX_ITERATIONS;
        case ErrorCode::InfeasibleStart: return ACX_E_INFEASIBLE_START;
        case ErrorCode::ToleranceNotMet: return ACX_E_TOLERANCE;
        case ErrorCode::NoBracket: return ACX_E_NO_BRACKET;
        case ErrorCode::SingularCovariance: return ACX_E_SINGULAR;
        case ErrorCode::NoRecords: return ACX_E_NO_RECORDS;
    }
    return ACX_E_INTERNAL;
}

template <class F>
acx_status guarded(F&& body) {
    try {
        body();
        return ACX_OK;
    } catch (const acx::Error& e) {
        last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return ACX_E_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return ACX_E_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return ACX_E_INTERNAL;
    }
}

void require(bool condition, const char* what) {
    if (!condition) throw acx::Error(acx::ErrorCode::InvalidArgument, what);
}

acx::TiePolicy tie_policy(acx_tie_policy policy, uint64_t seed) {
    switch (policy) {
        case ACX_TIE_STRICT: return acx::TiePolicy::strict();
        case ACX_TIE_HALF: return acx::TiePolicy::half();
        case ACX_TIE_RANDOM: return acx::TiePolicy::random(seed);
    }
    throw acx::Error(acx::ErrorCode::InvalidArgument, "unknown tie policy");
}

constexpr std::pair<unsigned, acx::Estimator> kFlags[] = {{ACX_EST_UN, acx::Estimator::Unbiased},
                                                          {ACX_EST_EXP, acx::Estimator::Exp},
                                                          {ACX_EST_CONS, acx::Estimator::Cons},
                                                          {ACX_EST_HD, acx::Estimator::Hd}};

std::vector<acx::Estimator> estimators_from_mask(unsigned mask) {
    require(mask != 0 && (mask & ~static_cast<unsigned>(ACX_EST_ALL)) == 0, "invalid estimator mask");
    std::vector<acx::Estimator> out;
    for (auto [flag, e] : kFlags)
        if (mask & flag) out.push_back(e);
    return out;
}

const acx::EstimatorReport* find_report(const acx_extrapolation* e, acx_estimator estimator) {
    for (auto [flag, est] : kFlags) {
        if (flag != static_cast<unsigned>(estimator)) continue;
        for (const auto& r : e->reports)
            if (r.estimator == est) return &r;
    }
    return nullptr;
}

std::ofstream open_output(const char* path) {
    require(path != nullptr, "output path is null");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw acx::Error(acx::ErrorCode::Io, std::string("cannot write '") + path + "'");
    return out;
}

void finish(std::ofstream& out, const char* path) {
    out.close();
    if (!out) throw acx::Error(acx::ErrorCode::Io, std::string("error writing '") + path + "'");
}

}  // namespace

extern "C" {

const char* acx_status_name(acx_status status) {
    switch (status) {
        case ACX_OK: return "ok";
        case ACX_E_INVALID_ARGUMENT: return "InvalidArgument";
        case ACX_E_PARSE: return "Parse";
        case ACX_E_IO: return "Io";
        case ACX_E_TIE: return "TieDetected";
        case ACX_E_MISSING_CLASS: return "MissingClass";
        case ACX_E_RANGE: return "Range";
        case ACX_E_DOMAIN: return "Domain";
        case ACX_E_CONVERGENCE: return "ConvergenceFailure";
        case ACX_E_MAX_ITERATIONS: return "MaxIterations";
        case ACX_E_INFEASIBLE_START: return "InfeasibleStart";
        case ACX_E_TOLERANCE: return "ToleranceNotMet";
        case ACX_E_NO_BRACKET: return "NoBracket";
        case ACX_E_SINGULAR: return "SingularCovariance";
        case ACX_E_NO_RECORDS: return "NoRecords";
        case ACX_E_INTERNAL: return "Internal";
    }
    return "Unknown";
}

const char* acx_last_error(void) { return last_error.c_str(); }

acx_status acx_parse_estimators(const char* list, unsigned* mask) {
    return guarded([&] {
        require(list && mask, "null argument");
        unsigned m = 0;
        for (acx::Estimator e : acx::parse_estimator_list(list)) {
            for (auto [flag, est] : kFlags)
                if (est == e) m |= flag;
        }
        *mask = m;
    });
}

// Score matrices

acx_status acx_score_matrix_create(const double* scores, const int* labels, size_t rows, size_t k,
                                   acx_score_matrix** out) {
    return guarded([&] {
        require(scores && labels && out, "null argument");
        std::vector<int> zero_based(labels, labels + rows);
        for (int& l : zero_based) --l;
        *out = new acx_score_matrix{acx::ScoreMatrix(std::vector<double>(scores, scores + rows * k),
                                                     std::move(zero_based), k)};
    });
}

acx_status acx_score_matrix_read_csv(const char* path, acx_score_matrix** out) {
    return guarded([&] {
        require(path && out, "null argument");
        *out = new acx_score_matrix{acx::io::read_score_matrix_file(path)};
    });
}

acx_status acx_score_matrix_write_csv(const acx_score_matrix* s, const char* path) {
    return guarded([&] {
        require(s != nullptr, "null score matrix");
        auto out = open_output(path);
        acx::io::write_score_matrix(out, s->value);
        finish(out, path);
    });
}

size_t acx_score_matrix_rows(const acx_score_matrix* s) { return s ? s->value.rows() : 0; }
size_t acx_score_matrix_k(const acx_score_matrix* s) { return s ? s->value.k() : 0; }

acx_status acx_empirical_accuracy(const acx_score_matrix* s, acx_tie_policy policy, uint64_t seed, double* out) {
    return guarded([&] {
        require(s && out, "null argument");
        *out = acx::empirical_accuracy(s->value, tie_policy(policy, seed));
    });
}

void acx_score_matrix_free(acx_score_matrix* s) { delete s; }

// Win counts

acx_status acx_win_counts_from_scores(const acx_score_matrix* s, acx_tie_policy policy, uint64_t seed,
                                      acx_win_counts** out) {
    return guarded([&] {
        require(s && out, "null argument");
        *out = new acx_win_counts{acx::win_counts(s->value, tie_policy(policy, seed))};
    });
}

acx_status acx_win_counts_create(const int* classes, const int* v, size_t n, size_t k, acx_win_counts** out) {
    return guarded([&] {
        require(classes && v && out, "null argument");
        require(k >= 2, "k must be >= 2");
        std::vector<std::vector<int>> counts(k);
        for (size_t i = 0; i < n; ++i) {
            require(classes[i] >= 1 && static_cast<size_t>(classes[i]) <= k, "class must lie in 1..k");
            counts[static_cast<size_t>(classes[i] - 1)].push_back(v[i]);
        }
        *out = new acx_win_counts{acx::WinCounts(std::move(counts), k)};
    });
}

acx_status acx_win_counts_read_csv(const char* path, acx_win_counts** out) {
    return guarded([&] {
        require(path && out, "null argument");
        *out = new acx_win_counts{acx::io::read_win_counts_file(path)};
    });
}

acx_status acx_win_counts_write_csv(const acx_win_counts* w, const char* path) {
    return guarded([&] {
        require(w != nullptr, "null win counts");
        auto out = open_output(path);
        acx::io::write_win_counts(out, w->value);
        finish(out, path);
    });
}

size_t acx_win_counts_k(const acx_win_counts* w) { return w ? w->value.k() : 0; }
size_t acx_win_counts_total(const acx_win_counts* w) { return w ? w->value.total() : 0; }

acx_status acx_unbiased_moments(const acx_win_counts* w, int t_max, double* out) {
    return guarded([&] {
        require(w && out, "null argument");
        const auto curve = acx::unbiased_moments(w->value, t_max);
        for (const auto& e : curve.entries()) out[e.t - 2] = e.p;
    });
}

void acx_win_counts_free(acx_win_counts* w) { delete w; }

// Extrapolation

void acx_extrapolation_options_init(acx_extrapolation_options* o) {
    if (!o) return;
    const acx::ConsConfig cons;
    *o = acx_extrapolation_options{};
    o->target_K = 0;
    o->t_min = 2;
    o->t_max = 0;
    o->estimators = ACX_EST_ALL;
    o->grid_size = cons.grid_size;
    o->anchor_tolerance = cons.anchor_tolerance;
    o->cons_max_iterations = cons.max_iterations;
    o->kappa_lo = 1e-4;
    o->kappa_hi = 10.0;
    o->kappa_n = 200;
    o->quadrature_order = 64;
}

acx_status acx_extrapolate(const acx_win_counts* w, const acx_extrapolation_options* options,
                           acx_extrapolation** out) {
    return guarded([&] {
        require(w && options && out, "null argument");
        acx::ExtrapolationOptions opt;
        opt.target_K = options->target_K;
        opt.t_min = options->t_min;
        opt.t_max = options->t_max;
        opt.kappa_grid = acx::kappa_grid(options->kappa_lo, options->kappa_hi, options->kappa_n);
        opt.cons.grid_size = options->grid_size;
        opt.cons.anchor_tolerance = options->anchor_tolerance;
        opt.cons.max_iterations = options->cons_max_iterations;
        opt.quadrature_order = options->quadrature_order;
        auto result = std::make_unique<acx_extrapolation>();
        result->reports = acx::run_estimators(w->value, estimators_from_mask(options->estimators), opt);
        const int K = opt.target_K == 0 ? static_cast<int>(w->value.k()) : opt.target_K;
        result->t_min = opt.t_min;
        result->t_max = opt.t_max == 0 ? K : opt.t_max;
        *out = result.release();
    });
}

acx_status acx_extrapolation_status(const acx_extrapolation* e, acx_estimator estimator, acx_status* status) {
    return guarded([&] {
        require(e && status, "null argument");
        const auto* r = find_report(e, estimator);
        require(r != nullptr, "estimator was not run");
        *status = r->ok ? ACX_OK : to_status(*r->error_code);
    });
}

const char* acx_extrapolation_message(const acx_extrapolation* e, acx_estimator estimator) {
    if (!e) return "";
    const auto* r = find_report(e, estimator);
    return r ? r->error_message.c_str() : "";
}

acx_status acx_extrapolation_value(const acx_extrapolation* e, acx_estimator estimator, int t, double* out) {
    return guarded([&] {
        require(e && out, "null argument");
        const auto* r = find_report(e, estimator);
        require(r != nullptr, "estimator was not run");
        if (!r->ok) throw acx::Error(*r->error_code, r->error_message);
        for (const auto& [tt, p] : r->targets) {
            if (tt == t) {
                *out = p;
                return;
            }
        }
        throw acx::Error(acx::ErrorCode::Range, "no value at t = " + std::to_string(t));
    });
}

acx_status acx_extrapolation_write_json(const acx_extrapolation* e, const char* path) {
    return guarded([&] {
        require(e != nullptr, "null extrapolation");
        auto out = open_output(path);
        acx::write_report_json(out, e->reports);
        finish(out, path);
    });
}

acx_status acx_extrapolation_write_curve_csv(const acx_extrapolation* e, const char* path) {
    return guarded([&] {
        require(e != nullptr, "null extrapolation");
        auto out = open_output(path);
        acx::write_curve_csv(out, e->reports, e->t_min, e->t_max);
        finish(out, path);
    });
}

void acx_extrapolation_free(acx_extrapolation* e) { delete e; }

acx_status acx_pi_bar(int t, double c, double* out) {
    return guarded([&] {
        require(out != nullptr, "null argument");
        *out = acx::pi_bar(t, c);
    });
}

acx_status acx_pi_bar_inverse(int t, double p, double* out) {
    return guarded([&] {
        require(out != nullptr, "null argument");
        *out = acx::pi_bar_inverse(t, p);
    });
}

acx_status acx_hd_extrapolate(double p_k, int k, int K, double* out) {
    return guarded([&] {
        require(out != nullptr, "null argument");
        *out = acx::hd_extrapolate(p_k, {k, K, 64});
    });
}

// Simulation

void acx_simulation_config_init(acx_simulation_config* c) {
    if (!c) return;
    const acx::sim::MetaConfig meta;
    const acx::ConsConfig cons;
    *c = acx_simulation_config{};
    c->p = meta.p;
    c->tau = meta.tau;
    c->covariance = "identity";
    c->r = meta.r;
    c->m = meta.m;
    c->K = meta.K;
    c->seed = meta.seed;
    c->replicates = 1;
    c->k_list = nullptr;
    c->k_list_length = 0;
    c->classifiers = "qda";
    c->rho = -1.0;
    c->estimators = ACX_EST_EXP | ACX_EST_CONS | ACX_EST_HD;
    c->grid_size = cons.grid_size;
    c->kappa_lo = 1e-4;
    c->kappa_hi = 10.0;
    c->kappa_n = 200;
    c->quadrature_order = 64;
}

acx_status acx_simulate(const acx_simulation_config* c, acx_replication** out) {
    return guarded([&] {
        require(c && out, "null argument");
        auto rep = std::make_unique<acx_replication>();
        auto& cfg = rep->config;
        std::vector<std::string> problems;
        auto attempt = [&](auto&& f) {
            try {
                f();
            } catch (const acx::Error& e) {
                problems.push_back(e.what());
            }
        };
        cfg.meta.p = c->p;
        cfg.meta.tau = c->tau;
        cfg.meta.r = c->r;
        cfg.meta.m = c->m;
        cfg.meta.K = c->K;
        cfg.meta.seed = c->seed;
        attempt([&] { cfg.meta.covariance = acx::sim::parse_covariance(c->covariance ? c->covariance : "identity"); });
        cfg.replicates = c->replicates;
        if (c->k_list && c->k_list_length > 0) {
            cfg.k_list.assign(c->k_list, c->k_list + c->k_list_length);
        } else {
            cfg.k_list = {std::min(10, c->K)};
        }
        cfg.meta.k = *std::min_element(cfg.k_list.begin(), cfg.k_list.end());
        cfg.classifiers.clear();
        attempt([&] {
            const std::string list = c->classifiers ? c->classifiers : "qda";
            std::size_t start = 0;
            while (start <= list.size()) {
                const std::size_t comma = std::min(list.find(',', start), list.size());
                const std::string name = list.substr(start, comma - start);
                if (!name.empty()) {
                    acx::sim::ClassifierSpec spec;
                    spec.kind = acx::sim::parse_classifier(name);
                    if (c->rho >= 0.0) spec.rho = c->rho;
                    const bool seen = std::any_of(cfg.classifiers.begin(), cfg.classifiers.end(),
                                                  [&](const auto& s) { return s.kind == spec.kind; });
                    if (!seen) cfg.classifiers.push_back(spec);
                }
                start = comma + 1;
            }
        });
        attempt([&] { cfg.estimators = estimators_from_mask(c->estimators); });
        attempt([&] { cfg.extrapolation.kappa_grid = acx::kappa_grid(c->kappa_lo, c->kappa_hi, c->kappa_n); });
        cfg.extrapolation.cons.grid_size = c->grid_size;
        cfg.extrapolation.quadrature_order = c->quadrature_order;
        for (auto& p : cfg.problems()) {
            if (p == "at least one classifier is required" && !problems.empty()) continue;
            problems.push_back(std::move(p));
        }
        if (!problems.empty()) {
            std::string msg = "invalid simulation config:";
            for (const auto& p : problems) msg += "\n  " + p;
            throw acx::Error(acx::ErrorCode::InvalidArgument, msg);
        }
        rep->records = acx::sim::run_replication(cfg);
        for (const auto& s : cfg.classifiers) rep->classifier_names.emplace_back(acx::sim::classifier_name(s.kind));
        *out = rep.release();
    });
}

size_t acx_replication_record_count(const acx_replication* rep) { return rep ? rep->records.size() : 0; }
size_t acx_replication_classifier_count(const acx_replication* rep) { return rep ? rep->classifier_names.size() : 0; }

const char* acx_replication_classifier_name(const acx_replication* rep, size_t index) {
    if (!rep || index >= rep->classifier_names.size()) return "";
    return rep->classifier_names[index].c_str();
}

acx_status acx_replication_write_csv(const acx_replication* rep, const char* path) {
    return guarded([&] {
        require(rep != nullptr, "null replication");
        auto out = open_output(path);
        acx::sim::write_replication_csv(out, rep->records);
        finish(out, path);
    });
}

acx_status acx_replication_write_config(const acx_replication* rep, const char* path) {
    return guarded([&] {
        require(rep != nullptr, "null replication");
        auto out = open_output(path);
        acx::sim::write_config_json(out, rep->config);
        finish(out, path);
    });
}

acx_status acx_replication_win_counts(const acx_replication* rep, size_t classifier_index, int replicate, int k,
                                      acx_win_counts** out) {
    return guarded([&] {
        require(rep && out, "null argument");
        require(classifier_index < rep->config.classifiers.size(), "classifier index out of range");
        *out = new acx_win_counts{acx::sim::replication_win_counts(
            rep->config, rep->config.classifiers[classifier_index], replicate, k)};
    });
}

void acx_replication_free(acx_replication* rep) { delete rep; }

// Reports

acx_status acx_report(const char* replication_csv, const char* svg_path, const char* summary_csv_path) {
    return guarded([&] {
        require(replication_csv != nullptr, "null argument");
        const auto records = acx::report::read_replication_csv_file(replication_csv);
        if (records.empty()) throw acx::Error(acx::ErrorCode::NoRecords, "no records");
        if (svg_path) {
            auto out = open_output(svg_path);
            acx::report::write_svg(out, records);
            finish(out, svg_path);
        }
        if (summary_csv_path) {
            auto out = open_output(summary_csv_path);
            acx::report::write_summary_csv(out, acx::report::summarize(records));
            finish(out, summary_csv_path);
        }
    });
}

}  // extern "C"
