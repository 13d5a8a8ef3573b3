#include "acx/acx.h"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int status = -1;
    std::string output;  // stdout and stderr
};

Run run(const std::string& args) {
    const auto log = fs::temp_directory_path() / ("acx_cli_log_" + std::to_string(::getpid()));
    const std::string cmd = std::string(ACX_CLI_PATH) + " " + args + " >" + log.string() + " 2>&1";
    const int raw = std::system(cmd.c_str());
    Run r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream in(log);
    std::stringstream buf;
    buf << in.rdbuf();
    r.output = buf.str();
    fs::remove(log);
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("acx_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()) + "_" +
               std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    // Win counts of a 20-class problem, v = (class + repeat) mod 20, three repeats.
    fs::path write_counts(const std::string& name, bool all_wins = false) {
        std::ofstream out(dir / name);
        out << "class,repeat,v,k\n";
        for (int c = 1; c <= 20; ++c) {
            for (int j = 1; j <= 3; ++j) out << c << "," << j << "," << (all_wins ? 19 : (c * 7 + j * 3) % 20) << ",20\n";
        }
        return dir / name;
    }

    static json report_of(const json& doc, const std::string& est) {
        for (const auto& r : doc["reports"]) {
            if (r["estimator"] == est) return r;
        }
        return json();
    }

    static double value_at(const json& report, int t) {
        for (const auto& x : report["targets"]) {
            if (x["t"] == t) return x["p_hat"].get<double>();
        }
        return NAN;
    }

    fs::path dir;
};

}  // namespace

TEST_F(Cli, ExtrapolateWinCounts) {
    auto in = write_counts("w.csv");
    auto r = run("extrapolate --input " + in.string() + " --target-K 400 --out " + (dir / "o").string());
    ASSERT_EQ(r.status, 0) << r.output;
    auto doc = json::parse(slurp(dir / "o" / "report.json"));
    EXPECT_EQ(doc["schema"], 1);
    for (const char* est : {"exp", "cons", "hd"}) {
        const double p = value_at(report_of(doc, est), 400);
        EXPECT_TRUE(p >= 0.0 && p <= 1.0) << est;
    }
    const std::string curve = slurp(dir / "o" / "curve.csv");
    EXPECT_EQ(curve.substr(0, curve.find('\n')), "t,un,exp,cons,hd");
}

TEST_F(Cli, SourceKIsIdentity) {
    auto in = write_counts("w.csv");
    auto r = run("extrapolate --input " + in.string() + " --target-K 20 --out " + (dir / "o").string());
    ASSERT_EQ(r.status, 0) << r.output;
    auto doc = json::parse(slurp(dir / "o" / "report.json"));
    const double un = value_at(report_of(doc, "un"), 20);
    EXPECT_DOUBLE_EQ(value_at(report_of(doc, "exp"), 20), un);
    EXPECT_DOUBLE_EQ(value_at(report_of(doc, "hd"), 20), un);
    EXPECT_NEAR(value_at(report_of(doc, "cons"), 20), un, 1e-6);
}

TEST_F(Cli, AllWinsExitsTwoAndKeepsOthers) {
    auto in = write_counts("w.csv", true);
    auto r = run("extrapolate --input " + in.string() + " --target-K 400 --out " + (dir / "o").string());
    EXPECT_EQ(r.status, 2) << r.output;
    auto doc = json::parse(slurp(dir / "o" / "report.json"));
    auto cons = report_of(doc, "cons");
    EXPECT_EQ(cons["status"], "ConvergenceFailure");
    EXPECT_TRUE(cons["diagnostics"].contains("closest_feasible_anchor"));
    EXPECT_TRUE(std::isfinite(value_at(report_of(doc, "exp"), 400)));
    EXPECT_TRUE(std::isfinite(value_at(report_of(doc, "hd"), 400)));
}

TEST_F(Cli, ScoreMatrixInput) {
    {
        std::ofstream out(dir / "s.csv");
        out << "label,c1,c2,c3\n1,0.9,0.1,0.2\n2,0.3,0.8,0.1\n3,0.2,0.5,0.4\n1,0.6,0.7,0.1\n";
    }
    auto r = run("extrapolate --input " + (dir / "s.csv").string() + " --estimators un,hd --target-K 6 --out " +
                 (dir / "o").string());
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_TRUE(fs::exists(dir / "o" / "curve.csv"));
}

TEST_F(Cli, InputErrorsExitOne) {
    EXPECT_EQ(run("extrapolate --input " + (dir / "missing.csv").string() + " --out " + dir.string()).status, 1);
    auto in = write_counts("w.csv");
    EXPECT_EQ(run("extrapolate --input " + in.string() + " --estimators un,foo --out " + dir.string()).status, 1);
    EXPECT_EQ(run("extrapolate --input " + in.string() + " --target-K 5 --out " + dir.string()).status, 1);
    {
        std::ofstream out(dir / "bad.csv");
        out << "class,repeat,v,k\n1,1,x,5\n";
    }
    auto r = run("extrapolate --input " + (dir / "bad.csv").string() + " --out " + dir.string());
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.output.find("bad.csv:2:"), std::string::npos) << r.output;
    EXPECT_EQ(run("simulate --p 0 --r 1 --out " + dir.string()).status, 1);
}

TEST_F(Cli, SimulateDeterministicAndShaped) {
    const std::string args = "simulate --p 2 --target-K 10 --k-list 3:6 --replicates 2 --grid-size 64 --out ";
    ASSERT_EQ(run(args + (dir / "a").string()).status, 0);
    ASSERT_EQ(run(args + (dir / "b").string()).status, 0);
    for (const char* f : {"replication.csv", "config.json", "wincounts_qda.csv"}) {
        EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
    }
    std::istringstream lines(slurp(dir / "a" / "replication.csv"));
    std::string line;
    int rows = -1;
    while (std::getline(lines, line)) ++rows;
    EXPECT_EQ(rows, 2 * 4 * 4);  // replicates x k values x (benchmark + three estimators)
}

TEST_F(Cli, ExportedCountsRoundTrip) {
    ASSERT_EQ(run("simulate --p 2 --target-K 12 --k-list 4,8 --estimators hd,exp --out " + (dir / "s").string()).status, 0);
    auto r = run("extrapolate --input " + (dir / "s" / "wincounts_qda.csv").string() +
                 " --estimators exp,hd --target-K 12 --out " + (dir / "e").string());
    ASSERT_EQ(r.status, 0) << r.output;
    auto doc = json::parse(slurp(dir / "e" / "report.json"));

    acx_simulation_config cfg;
    acx_simulation_config_init(&cfg);
    cfg.p = 2;
    cfg.K = 12;
    const int ks[] = {4, 8};
    cfg.k_list = ks;
    cfg.k_list_length = 2;
    cfg.estimators = ACX_EST_EXP | ACX_EST_HD;
    acx_replication* rep = nullptr;
    ASSERT_EQ(acx_simulate(&cfg, &rep), ACX_OK);
    acx_win_counts* w = nullptr;
    ASSERT_EQ(acx_replication_win_counts(rep, 0, 1, 8, &w), ACX_OK);
    acx_extrapolation_options opt;
    acx_extrapolation_options_init(&opt);
    opt.target_K = 12;
    opt.estimators = ACX_EST_EXP | ACX_EST_HD;
    acx_extrapolation* e = nullptr;
    ASSERT_EQ(acx_extrapolate(w, &opt, &e), ACX_OK);
    for (auto [est, name] : {std::pair{ACX_EST_EXP, "exp"}, std::pair{ACX_EST_HD, "hd"}}) {
        double p = 0.0;
        ASSERT_EQ(acx_extrapolation_value(e, est, 12, &p), ACX_OK);
        EXPECT_EQ(p, value_at(report_of(doc, name), 12)) << name;
    }
    acx_extrapolation_free(e);
    acx_win_counts_free(w);
    acx_replication_free(rep);
}

TEST_F(Cli, ReportPanelsAndEmptyInput) {
    ASSERT_EQ(run("simulate --p 2 --target-K 8 --k-list 3,5 --classifiers qda,gnb,nc --estimators hd --out " +
                  (dir / "s").string())
                  .status,
              0);
    ASSERT_EQ(run("report --input " + (dir / "s" / "replication.csv").string() + " --out " + (dir / "p").string()).status,
              0);
    const std::string svg = slurp(dir / "p" / "report.svg");
    std::size_t panels = 0;
    for (auto pos = svg.find("class=\"panel\""); pos != std::string::npos; pos = svg.find("class=\"panel\"", pos + 1)) {
        ++panels;
    }
    EXPECT_EQ(panels, 3u);
    EXPECT_TRUE(fs::exists(dir / "p" / "summary.csv"));

    {
        std::ofstream out(dir / "empty.csv");
        out << "replicate,k,K,estimator,p_hat,truth,error,status\n";
    }
    auto r = run("report --input " + (dir / "empty.csv").string() + " --out " + (dir / "q").string());
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.output.find("no records"), std::string::npos) << r.output;
}
