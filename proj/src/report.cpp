#include "acx/report.hpp"

#include "acx/error.hpp"
#include "acx/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <string_view>

namespace acx::report {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        std::string field = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
        out.push_back(std::move(field));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& msg) {
    throw Error(ErrorCode::Parse, source + ":" + std::to_string(line) + ": " + msg);
}

double to_double(const std::string& s, const std::string& source, std::size_t line, bool allow_empty) {
    if (s.empty() && allow_empty) return std::numeric_limits<double>::quiet_NaN();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) fail(source, line, "expected a number, got '" + s + "'");
    return x;
}

int to_int(const std::string& s, const std::string& source, std::size_t line) {
    int x = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) fail(source, line, "expected an integer, got '" + s + "'");
    return x;
}

std::string fixed(double x, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

std::string color(const std::string& estimator) {
    static const std::map<std::string, std::string> palette{
        {"benchmark", "#7f7f7f"}, {"exp", "#1f77b4"}, {"cons", "#d62728"}, {"hd", "#2ca02c"}, {"truth", "#000000"}};
    const auto it = palette.find(estimator);
    return it == palette.end() ? "#9467bd" : it->second;
}

}  // namespace

std::vector<sim::ReplicationRecord> read_replication_csv(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::NoRecords, source + ": no records");
    const auto header = split(line);
    static const char* kRequired[] = {"replicate", "k", "K", "estimator", "p_hat", "truth", "error", "status"};
    std::map<std::string, std::size_t> column;
    for (std::size_t i = 0; i < header.size(); ++i) column.emplace(header[i], i);
    std::string missing;
    for (const char* name : kRequired) {
        if (!column.count(name)) missing += std::string(missing.empty() ? "" : ", ") + name;
    }
    if (!missing.empty()) fail(source, 1, "missing column(s): " + missing);
    const auto classifier_col = column.find("classifier");

    std::vector<sim::ReplicationRecord> records;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto f = split(line);
        if (f.size() != header.size()) {
            fail(source, lineno, "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
        }
        sim::ReplicationRecord r;
        r.replicate = to_int(f[column["replicate"]], source, lineno);
        r.k = to_int(f[column["k"]], source, lineno);
        r.K = to_int(f[column["K"]], source, lineno);
        r.estimator = f[column["estimator"]];
        r.p_hat = to_double(f[column["p_hat"]], source, lineno, true);
        r.truth = to_double(f[column["truth"]], source, lineno, false);
        r.error = to_double(f[column["error"]], source, lineno, true);
        r.status = f[column["status"]];
        r.classifier = classifier_col == column.end() ? "default" : f[classifier_col->second];
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<sim::ReplicationRecord> read_replication_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
    return read_replication_csv(in, path);
}

std::vector<SummaryRow> summarize(const std::vector<sim::ReplicationRecord>& records) {
    std::vector<SummaryRow> rows;
    std::vector<double> sums;
    for (const auto& r : records) {
        auto it = std::find_if(rows.begin(), rows.end(), [&](const SummaryRow& s) {
            return s.classifier == r.classifier && s.estimator == r.estimator && s.k == r.k;
        });
        if (it == rows.end()) {
            rows.push_back({r.classifier, r.estimator, r.k, 0.0, 0, 0});
            sums.push_back(0.0);
            it = rows.end() - 1;
        }
        const auto idx = static_cast<std::size_t>(it - rows.begin());
        if (r.status == "ok" && std::isfinite(r.p_hat)) {
            ++it->records;
            sums[idx] += std::abs(r.p_hat - r.truth);
        } else {
            ++it->failures;
        }
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].mean_abs_error =
            rows[i].records ? sums[i] / static_cast<double>(rows[i].records) : std::numeric_limits<double>::quiet_NaN();
    }
    return rows;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << "classifier,estimator,k,mean_abs_error,records,failures\n";
    for (const auto& r : rows) {
        out << r.classifier << ',' << r.estimator << ',' << r.k << ',';
        if (std::isfinite(r.mean_abs_error)) out << io::format_double(r.mean_abs_error);
        out << ',' << r.records << ',' << r.failures << '\n';
    }
}

void write_svg(std::ostream& out, const std::vector<sim::ReplicationRecord>& records) {
    if (records.empty()) throw Error(ErrorCode::NoRecords, "no records");

    std::vector<std::string> classifiers, estimators;
    int k_min = std::numeric_limits<int>::max(), k_max = std::numeric_limits<int>::min();
    for (const auto& r : records) {
        if (std::find(classifiers.begin(), classifiers.end(), r.classifier) == classifiers.end()) classifiers.push_back(r.classifier);
        if (std::find(estimators.begin(), estimators.end(), r.estimator) == estimators.end()) estimators.push_back(r.estimator);
        k_min = std::min(k_min, r.k);
        k_max = std::max(k_max, r.k);
    }
    estimators.push_back("truth");

    // series[classifier][estimator][k] = (sum, count)
    std::map<std::string, std::map<std::string, std::map<int, std::pair<double, int>>>> series;
    for (const auto& r : records) {
        auto& by_k = series[r.classifier];
        if (r.status == "ok" && std::isfinite(r.p_hat)) {
            auto& cell = by_k[r.estimator][r.k];
            cell.first += r.p_hat;
            ++cell.second;
        }
        auto& truth = by_k["truth"][r.k];
        truth.first += r.truth;
        ++truth.second;
    }

    constexpr double kPanelW = 360, kPanelH = 260, kMargin = 48, kGap = 24;
    const auto rows = summarize(records);
    const double table_y = kGap + kPanelH + 40;
    const double width = kGap + static_cast<double>(classifiers.size()) * (kPanelW + kGap);
    const double height = table_y + 30 + 18.0 * static_cast<double>(rows.size()) + kGap;

    auto x_of = [&](int k) {
        if (k_max == k_min) return kMargin + 0.5 * (kPanelW - kMargin - 12);
        return kMargin + (kPanelW - kMargin - 12) * static_cast<double>(k - k_min) / static_cast<double>(k_max - k_min);
    };
    auto y_of = [&](double p) { return (kPanelH - kMargin) - (kPanelH - kMargin - 12) * std::clamp(p, 0.0, 1.0); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(width, 0) << "\" height=\"" << fixed(height, 0)
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t c = 0; c < classifiers.size(); ++c) {
        const double ox = kGap + static_cast<double>(c) * (kPanelW + kGap);
        out << "<g class=\"panel\" data-classifier=\"" << classifiers[c] << "\" transform=\"translate(" << fixed(ox, 0)
            << "," << fixed(kGap, 0) << ")\">\n";
        out << "  <text x=\"" << fixed(kPanelW / 2, 0) << "\" y=\"4\" text-anchor=\"middle\" font-size=\"13\">"
            << classifiers[c] << "</text>\n";
        out << "  <line x1=\"" << fixed(kMargin, 0) << "\" y1=\"" << fixed(kPanelH - kMargin, 0) << "\" x2=\""
            << fixed(kPanelW - 12, 0) << "\" y2=\"" << fixed(kPanelH - kMargin, 0) << "\" stroke=\"black\"/>\n";
        out << "  <line x1=\"" << fixed(kMargin, 0) << "\" y1=\"12\" x2=\"" << fixed(kMargin, 0) << "\" y2=\""
            << fixed(kPanelH - kMargin, 0) << "\" stroke=\"black\"/>\n";
        for (double p : {0.0, 0.5, 1.0}) {
            out << "  <text x=\"" << fixed(kMargin - 4, 0) << "\" y=\"" << fixed(y_of(p) + 4) << "\" text-anchor=\"end\">"
                << fixed(p, 1) << "</text>\n";
        }
        for (int k : {k_min, k_max}) {
            out << "  <text x=\"" << fixed(x_of(k)) << "\" y=\"" << fixed(kPanelH - kMargin + 14, 0)
                << "\" text-anchor=\"middle\">" << k << "</text>\n";
        }
        out << "  <text x=\"" << fixed(kPanelW / 2, 0) << "\" y=\"" << fixed(kPanelH - 12, 0)
            << "\" text-anchor=\"middle\">k</text>\n";
        const auto& by_est = series[classifiers[c]];
        for (const auto& est : estimators) {
            const auto it = by_est.find(est);
            if (it == by_est.end() || it->second.empty()) continue;
            std::string points;
            for (const auto& [k, cell] : it->second) {
                points += fixed(x_of(k)) + "," + fixed(y_of(cell.first / cell.second)) + " ";
            }
            points.pop_back();
            const std::string dash = est == "truth" ? " stroke-dasharray=\"4 3\"" : "";
            out << "  <polyline class=\"series\" data-estimator=\"" << est << "\" fill=\"none\" stroke=\"" << color(est)
                << "\"" << dash << " points=\"" << points << "\"/>\n";
            for (const auto& [k, cell] : it->second) {
                out << "  <circle cx=\"" << fixed(x_of(k)) << "\" cy=\"" << fixed(y_of(cell.first / cell.second))
                    << "\" r=\"2\" fill=\"" << color(est) << "\"/>\n";
            }
        }
        double ly = 16;
        for (const auto& est : estimators) {
            out << "  <text x=\"" << fixed(kPanelW - 80, 0) << "\" y=\"" << fixed(ly, 0) << "\" fill=\"" << color(est)
                << "\">" << est << "</text>\n";
            ly += 13;
        }
        out << "</g>\n";
    }

    out << "<g class=\"summary\" transform=\"translate(" << fixed(kGap, 0) << "," << fixed(table_y, 0) << ")\">\n";
    out << "  <text y=\"0\" font-size=\"13\">mean absolute error</text>\n";
    const char* heads[] = {"classifier", "estimator", "k", "mean |error|", "n", "failed"};
    for (int i = 0; i < 6; ++i) {
        out << "  <text x=\"" << i * 90 << "\" y=\"18\" font-weight=\"bold\">" << heads[i] << "</text>\n";
    }
    double y = 36;
    for (const auto& r : rows) {
        const std::string err = std::isfinite(r.mean_abs_error) ? fixed(r.mean_abs_error, 4) : "-";
        const std::string cells[] = {r.classifier, r.estimator, std::to_string(r.k), err, std::to_string(r.records),
                                     std::to_string(r.failures)};
        for (int i = 0; i < 6; ++i) {
            out << "  <text x=\"" << i * 90 << "\" y=\"" << fixed(y, 0) << "\">" << cells[i] << "</text>\n";
        }
        y += 18;
    }
    out << "</g>\n</svg>\n";
}

}  // namespace acx::report
