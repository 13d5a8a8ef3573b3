#include "acx/io.hpp"

#include "acx/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string_view>
#include <vector>

namespace acx::io {

namespace {

struct Field {
    std::string_view text;
    std::size_t column;  // 1-based character column
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<Field> split(std::string_view line) {
    std::vector<Field> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        const std::size_t end = comma == std::string_view::npos ? line.size() : comma;
        out.push_back({trim(line.substr(start, end - start)), start + 1});
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

[[noreturn]] void parse_error(const std::string& source, std::size_t line, std::size_t column,
                              const std::string& msg) {
    throw Error(ErrorCode::Parse,
                source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + msg);
}

double parse_double(const Field& f, const std::string& source, std::size_t line) {
    double x = 0.0;
    const char* first = f.text.data();
    const char* last = first + f.text.size();
    if (!f.text.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, x);
    if (f.text.empty() || ec != std::errc() || ptr != last) {
        parse_error(source, line, f.column, "expected a number, got '" + std::string(f.text) + "'");
    }
    return x;
}

long parse_int(const Field& f, const std::string& source, std::size_t line) {
    long x = 0;
    auto [ptr, ec] = std::from_chars(f.text.data(), f.text.data() + f.text.size(), x);
    if (f.text.empty() || ec != std::errc() || ptr != f.text.data() + f.text.size()) {
        parse_error(source, line, f.column, "expected an integer, got '" + std::string(f.text) + "'");
    }
    return x;
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
    return in;
}

}  // namespace

std::string format_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

ScoreMatrix read_score_matrix(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw Error(ErrorCode::Parse, source + ": empty file");
    ++lineno;
    const auto header = split(line);
    if (header.size() < 3 || header[0].text != "label") {
        parse_error(source, 1, 1, "expected header 'label,c1,...,ck' with k >= 2");
    }
    for (std::size_t c = 1; c < header.size(); ++c) {
        if (header[c].text != "c" + std::to_string(c)) {
            parse_error(source, 1, header[c].column, "expected column name 'c" + std::to_string(c) + "'");
        }
    }
    const std::size_t k = header.size() - 1;

    std::vector<double> scores;
    std::vector<int> labels;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split(line);
        if (fields.size() != k + 1) {
            parse_error(source, lineno, 1,
                        "expected " + std::to_string(k + 1) + " fields, got " + std::to_string(fields.size()));
        }
        const long label = parse_int(fields[0], source, lineno);
        if (label < 1 || static_cast<std::size_t>(label) > k) {
            parse_error(source, lineno, fields[0].column, "label must lie in 1.." + std::to_string(k));
        }
        labels.push_back(static_cast<int>(label - 1));
        for (std::size_t c = 1; c <= k; ++c) {
            const double x = parse_double(fields[c], source, lineno);
            if (!std::isfinite(x)) parse_error(source, lineno, fields[c].column, "score is not finite");
            scores.push_back(x);
        }
    }
    if (labels.empty()) throw Error(ErrorCode::Parse, source + ": no data rows");
    return ScoreMatrix(std::move(scores), std::move(labels), k);
}

ScoreMatrix read_score_matrix_file(const std::string& path) {
    auto in = open_or_throw(path);
    return read_score_matrix(in, path);
}

void write_score_matrix(std::ostream& out, const ScoreMatrix& s) {
    out << "label";
    for (std::size_t c = 1; c <= s.k(); ++c) out << ",c" << c;
    out << '\n';
    for (std::size_t r = 0; r < s.rows(); ++r) {
        out << s.label(r) + 1;
        for (double x : s.row(r)) out << ',' << format_double(x);
        out << '\n';
    }
}

WinCounts read_win_counts(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw Error(ErrorCode::Parse, source + ": empty file");
    ++lineno;
    const auto header = split(line);
    static constexpr std::string_view kNames[] = {"class", "repeat", "v", "k"};
    if (header.size() != 4) parse_error(source, 1, 1, "expected header 'class,repeat,v,k'");
    for (std::size_t c = 0; c < 4; ++c) {
        if (header[c].text != kNames[c]) {
            parse_error(source, 1, header[c].column, "expected column name '" + std::string(kNames[c]) + "'");
        }
    }

    struct Row {
        long cls, repeat;
        double v;
        std::size_t line, column;
    };
    std::vector<Row> rows;
    long k = -1;
    bool doubled = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split(line);
        if (f.size() != 4) {
            parse_error(source, lineno, 1, "expected 4 fields, got " + std::to_string(f.size()));
        }
        const long cls = parse_int(f[0], source, lineno);
        const long rep = parse_int(f[1], source, lineno);
        const bool decimal = f[2].text.find('.') != std::string_view::npos;
        const double v = decimal ? parse_double(f[2], source, lineno)
                                 : static_cast<double>(parse_int(f[2], source, lineno));
        const long row_k = parse_int(f[3], source, lineno);
        if (row_k < 2) parse_error(source, lineno, f[3].column, "k must be >= 2");
        if (k == -1) k = row_k;
        if (row_k != k) parse_error(source, lineno, f[3].column, "k differs from earlier rows");
        if (cls < 1 || cls > k) parse_error(source, lineno, f[0].column, "class must lie in 1..k");
        if (rep < 1) parse_error(source, lineno, f[1].column, "repeat must be >= 1");
        if (decimal) {
            doubled = true;
            if (2.0 * v != std::floor(2.0 * v)) {
                parse_error(source, lineno, f[2].column, "fractional win counts must be multiples of 0.5");
            }
        }
        if (v < 0 || v > static_cast<double>(k - 1)) {
            parse_error(source, lineno, f[2].column, "v must lie in 0..k-1");
        }
        rows.push_back({cls, rep, v, lineno, f[1].column});
    }
    if (rows.empty()) throw Error(ErrorCode::Parse, source + ": no data rows");

    std::vector<std::map<long, std::pair<int, std::size_t>>> by_class(static_cast<std::size_t>(k));
    for (const auto& r : rows) {
        const int raw = static_cast<int>(doubled ? 2.0 * r.v : r.v);
        auto [it, inserted] = by_class[static_cast<std::size_t>(r.cls - 1)].emplace(r.repeat, std::pair{raw, r.line});
        if (!inserted) parse_error(source, r.line, r.column, "duplicate (class, repeat) pair");
    }
    std::vector<std::vector<int>> v(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < by_class.size(); ++i) {
        long expect = 1;
        for (const auto& [rep, value] : by_class[i]) {
            if (rep != expect) {
                parse_error(source, value.second, 1,
                            "repeats of class " + std::to_string(i + 1) + " are not numbered 1..m");
            }
            ++expect;
            v[i].push_back(value.first);
        }
    }
    return WinCounts(std::move(v), static_cast<std::size_t>(k), doubled);
}

WinCounts read_win_counts_file(const std::string& path) {
    auto in = open_or_throw(path);
    return read_win_counts(in, path);
}

void write_win_counts(std::ostream& out, const WinCounts& w) {
    if (w.num_classes() > w.k()) throw Error(ErrorCode::InvalidArgument, "win counts have more classes than k");
    out << "class,repeat,v,k\n";
    char buf[32];
    for (std::size_t i = 0; i < w.num_classes(); ++i) {
        for (std::size_t j = 0; j < w.repeats(i); ++j) {
            out << i + 1 << ',' << j + 1 << ',';
            if (w.doubled()) {
                std::snprintf(buf, sizeof buf, "%.1f", w.value(i, j));
                out << buf;
            } else {
                out << w.raw(i, j);
            }
            out << ',' << w.k() << '\n';
        }
    }
}

CsvKind sniff_csv_kind(const std::string& path) {
    auto in = open_or_throw(path);
    std::string line;
    if (!std::getline(in, line)) return CsvKind::Unknown;
    const auto header = split(line);
    if (!header.empty() && header[0].text == "label") return CsvKind::ScoreMatrix;
    if (!header.empty() && header[0].text == "class") return CsvKind::WinCounts;
    return CsvKind::Unknown;
}

}  // namespace acx::io
