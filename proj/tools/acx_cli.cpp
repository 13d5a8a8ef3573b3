// acx: extrapolate classification accuracy to larger class counts.
//
//   acx extrapolate --input wins.csv --target-K 400 --out results/
//   acx simulate --k-list 3:50 --replicates 20 --out sim/
//   acx report --input sim/replication.csv --out plots/

#include "acx/acx.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitEstimator = 2;

int fail(acx_status status) {
    std::cerr << "error: " << acx_status_name(status) << ": " << acx_last_error() << '\n';
    return kExitInput;
}

bool ensure_directory(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        std::cerr << "error: cannot create output directory '" << dir << "'\n";
        return false;
    }
    return true;
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

struct KappaGrid {
    double lo = 1e-4;
    double hi = 10.0;
    int n = 200;
};

std::optional<KappaGrid> parse_kappa(const std::string& text) {
    KappaGrid g;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%d%c", &g.lo, &g.hi, &g.n, &tail) != 3) return std::nullopt;
    return g;
}

// "3,5,10" or "3:50" (inclusive) or a mix: "2,5:8".
std::optional<std::vector<int>> parse_k_list(const std::string& text) {
    std::vector<int> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = std::min(text.find(',', start), text.size());
        const std::string item = text.substr(start, comma - start);
        int a = 0, b = 0;
        char tail = 0;
        if (std::sscanf(item.c_str(), "%d:%d%c", &a, &b, &tail) == 2) {
            if (b < a) return std::nullopt;
            for (int k = a; k <= b; ++k) out.push_back(k);
        } else if (std::sscanf(item.c_str(), "%d%c", &a, &tail) == 1) {
            out.push_back(a);
        } else {
            return std::nullopt;
        }
        start = comma + 1;
    }
    return out;
}

struct ExtrapolateArgs {
    std::string input;
    int k = 0;
    int target_K = 0;
    std::string estimators = "un,exp,cons,hd";
    std::size_t grid_size = 512;
    std::string kappa = "0.0001:10:200";
    std::string tie_policy = "strict";
    std::uint64_t seed = 1;
    std::string t_range;
    std::string out;
};

int run_extrapolate(const ExtrapolateArgs& a) {
    acx_extrapolation_options opt;
    acx_extrapolation_options_init(&opt);
    if (acx_status s = acx_parse_estimators(a.estimators.c_str(), &opt.estimators)) return fail(s);
    const auto kappa = parse_kappa(a.kappa);
    if (!kappa) {
        std::cerr << "error: --kappa-grid must look like lo:hi:n\n";
        return kExitInput;
    }
    opt.kappa_lo = kappa->lo;
    opt.kappa_hi = kappa->hi;
    opt.kappa_n = kappa->n;
    opt.grid_size = a.grid_size;
    acx_tie_policy policy = ACX_TIE_STRICT;
    if (a.tie_policy == "half") policy = ACX_TIE_HALF;
    else if (a.tie_policy == "random") policy = ACX_TIE_RANDOM;
    else if (a.tie_policy != "strict") {
        std::cerr << "error: --tie-policy must be strict, half or random\n";
        return kExitInput;
    }

    acx_win_counts* wins = nullptr;
    std::string header;
    {
        std::ifstream in(a.input);
        if (!in) {
            std::cerr << "error: cannot open '" << a.input << "'\n";
            return kExitInput;
        }
        std::getline(in, header);
    }
    if (header.rfind("label", 0) == 0) {
        acx_score_matrix* scores = nullptr;
        if (acx_status s = acx_score_matrix_read_csv(a.input.c_str(), &scores)) return fail(s);
        const acx_status s = acx_win_counts_from_scores(scores, policy, a.seed, &wins);
        acx_score_matrix_free(scores);
        if (s) return fail(s);
    } else {
        if (acx_status s = acx_win_counts_read_csv(a.input.c_str(), &wins)) return fail(s);
    }

    const int k = static_cast<int>(acx_win_counts_k(wins));
    if (a.k != 0 && a.k != k) {
        std::cerr << "error: --k " << a.k << " does not match the input's k = " << k << '\n';
        acx_win_counts_free(wins);
        return kExitInput;
    }
    opt.target_K = a.target_K == 0 ? k : a.target_K;
    if (opt.target_K < k) {
        std::cerr << "error: --target-K must be >= k = " << k << '\n';
        acx_win_counts_free(wins);
        return kExitInput;
    }
    if (!a.t_range.empty()) {
        char tail = 0;
        if (std::sscanf(a.t_range.c_str(), "%d:%d%c", &opt.t_min, &opt.t_max, &tail) != 2) {
            std::cerr << "error: --t-range must look like a:b\n";
            acx_win_counts_free(wins);
            return kExitInput;
        }
    }
    if (!ensure_directory(a.out)) {
        acx_win_counts_free(wins);
        return kExitInput;
    }

    acx_extrapolation* result = nullptr;
    const acx_status s = acx_extrapolate(wins, &opt, &result);
    acx_win_counts_free(wins);
    if (s) return fail(s);

    int code = kExitOk;
    const std::string json_path = join(a.out, "report.json");
    const std::string csv_path = join(a.out, "curve.csv");
    if (acx_status w = acx_extrapolation_write_json(result, json_path.c_str())) code = fail(w);
    if (acx_status w = acx_extrapolation_write_curve_csv(result, csv_path.c_str())) code = fail(w);

    const std::pair<acx_estimator, const char*> names[] = {
        {ACX_EST_UN, "un"}, {ACX_EST_EXP, "exp"}, {ACX_EST_CONS, "cons"}, {ACX_EST_HD, "hd"}};
    for (auto [est, name] : names) {
        if (!(opt.estimators & est)) continue;
        acx_status status = ACX_OK;
        acx_extrapolation_status(result, est, &status);
        if (status != ACX_OK) {
            std::cerr << name << ": " << acx_status_name(status) << ": " << acx_extrapolation_message(result, est) << '\n';
            if (code == kExitOk) code = kExitEstimator;
            continue;
        }
        const int t = est == ACX_EST_UN ? k : opt.target_K;
        double p = 0.0;
        if (acx_extrapolation_value(result, est, t, &p) == ACX_OK) {
            std::printf("%-4s p_hat(%d) = %.6f\n", name, t, p);
        }
    }
    acx_extrapolation_free(result);
    return code;
}

struct SimulateArgs {
    int p = 0;
    double tau = -1.0;
    std::string covariance = "identity";
    int r = 0;
    int m = 0;
    int K = 0;
    std::string k_list;
    int replicates = 1;
    std::string classifiers = "qda";
    double rho = -1.0;
    std::string estimators = "exp,cons,hd";
    std::size_t grid_size = 512;
    std::string kappa = "0.0001:10:200";
    std::uint64_t seed = 1;
    int export_k = 0;
    std::string out;
};

int run_simulate(const SimulateArgs& a) {
    acx_simulation_config cfg;
    acx_simulation_config_init(&cfg);
    if (a.p != 0) cfg.p = a.p;
    if (a.tau >= 0.0) cfg.tau = a.tau;
    if (a.r != 0) cfg.r = a.r;
    if (a.m != 0) cfg.m = a.m;
    if (a.K != 0) cfg.K = a.K;
    cfg.covariance = a.covariance.c_str();
    cfg.replicates = a.replicates;
    cfg.classifiers = a.classifiers.c_str();
    cfg.rho = a.rho;
    cfg.seed = a.seed;
    cfg.grid_size = a.grid_size;

    std::vector<std::string> problems;
    if (acx_parse_estimators(a.estimators.c_str(), &cfg.estimators) != ACX_OK) problems.push_back(acx_last_error());
    const auto kappa = parse_kappa(a.kappa);
    if (kappa) {
        cfg.kappa_lo = kappa->lo;
        cfg.kappa_hi = kappa->hi;
        cfg.kappa_n = kappa->n;
    } else {
        problems.push_back("--kappa-grid must look like lo:hi:n");
    }
    std::vector<int> ks;
    if (!a.k_list.empty()) {
        const auto parsed = parse_k_list(a.k_list);
        if (parsed) ks = *parsed;
        else problems.push_back("--k-list must look like 3,5,10 or 3:50");
    }
    if (!ks.empty()) {
        cfg.k_list = ks.data();
        cfg.k_list_length = ks.size();
    }
    if (!problems.empty()) {
        std::cerr << "error: invalid simulation config:\n";
        for (const auto& p : problems) std::cerr << "  " << p << '\n';
        return kExitInput;
    }
    if (!ensure_directory(a.out)) return kExitInput;

    acx_replication* rep = nullptr;
    if (acx_status s = acx_simulate(&cfg, &rep)) return fail(s);

    int code = kExitOk;
    auto check = [&](acx_status s) {
        if (s != ACX_OK && code == kExitOk) code = fail(s);
    };
    check(acx_replication_write_csv(rep, join(a.out, "replication.csv").c_str()));
    check(acx_replication_write_config(rep, join(a.out, "config.json").c_str()));

    int export_k = a.export_k;
    if (export_k == 0) export_k = ks.empty() ? std::min(10, cfg.K) : *std::max_element(ks.begin(), ks.end());
    for (std::size_t c = 0; c < acx_replication_classifier_count(rep); ++c) {
        acx_win_counts* wins = nullptr;
        const acx_status s = acx_replication_win_counts(rep, c, 1, export_k, &wins);
        check(s);
        if (s != ACX_OK) continue;
        const std::string name = std::string("wincounts_") + acx_replication_classifier_name(rep, c) + ".csv";
        check(acx_win_counts_write_csv(wins, join(a.out, name).c_str()));
        acx_win_counts_free(wins);
    }
    std::printf("%zu records written to %s\n", acx_replication_record_count(rep), join(a.out, "replication.csv").c_str());
    acx_replication_free(rep);
    return code;
}

int run_report(const std::string& input, const std::string& out) {
    if (!ensure_directory(out)) return kExitInput;
    const std::string svg = join(out, "report.svg");
    const std::string summary = join(out, "summary.csv");
    const acx_status s = acx_report(input.c_str(), svg.c_str(), summary.c_str());
    if (s == ACX_E_NO_RECORDS) {
        std::cerr << "error: no records\n";
        return kExitInput;
    }
    if (s) return fail(s);
    std::printf("wrote %s and %s\n", svg.c_str(), summary.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Extrapolate multiclass classification accuracy to larger class counts"};
    app.require_subcommand(1);

    ExtrapolateArgs ex;
    auto* extrapolate = app.add_subcommand("extrapolate", "Run estimators on a score matrix or win-count CSV");
    extrapolate->add_option("--input", ex.input, "ScoreMatrix or WinCounts CSV")->required();
    extrapolate->add_option("--k", ex.k, "Expected source class count (checked against the input)");
    extrapolate->add_option("--target-K", ex.target_K, "Target class count (default: k)");
    extrapolate->add_option("--estimators", ex.estimators, "Comma list of un,exp,cons,hd")->capture_default_str();
    extrapolate->add_option("--grid-size", ex.grid_size, "CONS grid size M")->capture_default_str();
    extrapolate->add_option("--kappa-grid", ex.kappa, "EXP decay-rate grid lo:hi:n (plus 0)")->capture_default_str();
    extrapolate->add_option("--tie-policy", ex.tie_policy, "strict, half or random")->capture_default_str();
    extrapolate->add_option("--seed", ex.seed, "Seed for the random tie policy")->capture_default_str();
    extrapolate->add_option("--t-range", ex.t_range, "Curve range a:b (default 2:target-K)");
    extrapolate->add_option("--out", ex.out, "Output directory")->required();

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Run the Gaussian replication study");
    simulate->add_option("--p", sim.p, "Feature dimension");
    simulate->add_option("--tau", sim.tau, "Scale of the class-mean prior");
    simulate->add_option("--covariance", sim.covariance, "identity, diagonal:lo:hi or spd:seed")->capture_default_str();
    simulate->add_option("--r", sim.r, "Training points per class");
    simulate->add_option("--m", sim.m, "Test points per class");
    simulate->add_option("--target-K", sim.K, "Target class count K");
    simulate->add_option("--k-list", sim.k_list, "Source class counts, e.g. 3,5,10 or 3:50");
    simulate->add_option("--replicates", sim.replicates, "Number of replicates")->capture_default_str();
    simulate->add_option("--classifiers", sim.classifiers, "Comma list of qda,gnb,nc")->capture_default_str();
    simulate->add_option("--rho", sim.rho, "Covariance regularization (default per classifier)");
    simulate->add_option("--estimators", sim.estimators, "Comma list of exp,cons,hd")->capture_default_str();
    simulate->add_option("--grid-size", sim.grid_size, "CONS grid size M")->capture_default_str();
    simulate->add_option("--kappa-grid", sim.kappa, "EXP decay-rate grid lo:hi:n")->capture_default_str();
    simulate->add_option("--seed", sim.seed, "Master seed")->capture_default_str();
    simulate->add_option("--export-k", sim.export_k, "k of the exported replicate-1 win counts (default: largest k)");
    simulate->add_option("--out", sim.out, "Output directory")->required();

    std::string report_input, report_out;
    auto* report = app.add_subcommand("report", "Plot and summarize a replication CSV");
    report->add_option("--input", report_input, "Replication CSV")->required();
    report->add_option("--out", report_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    if (extrapolate->parsed()) return run_extrapolate(ex);
    if (simulate->parsed()) return run_simulate(sim);
    return run_report(report_input, report_out);
}
