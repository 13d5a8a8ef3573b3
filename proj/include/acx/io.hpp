#pragma once

#include "acx/core.hpp"

#include <iosfwd>
#include <string>

namespace acx::io {

// ScoreMatrix CSV: header `label,c1,...,ck`, one row per test point, 1-based labels.
ScoreMatrix read_score_matrix(std::istream& in, const std::string& source = "<stream>");
ScoreMatrix read_score_matrix_file(const std::string& path);
void write_score_matrix(std::ostream& out, const ScoreMatrix& s);

// WinCounts CSV: header `class,repeat,v,k`, 1-based class and repeat. Counts from
// the half tie policy are written with one decimal place (e.g. 2.5, 3.0) and
// read back as doubled counts.
WinCounts read_win_counts(std::istream& in, const std::string& source = "<stream>");
WinCounts read_win_counts_file(const std::string& path);
void write_win_counts(std::ostream& out, const WinCounts& w);

// Shortest representation that parses back to the same double.
std::string format_double(double x);

enum class CsvKind { ScoreMatrix, WinCounts, Unknown };
CsvKind sniff_csv_kind(const std::string& path);

}  // namespace acx::io
