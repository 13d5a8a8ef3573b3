#pragma once

// Summaries and plots of replication records.

#include "acx/simlab.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace acx::report {

// Reads the replication CSV. Columns may come in any order; `classifier` is
// optional. Missing required columns raise a Parse error naming them all.
std::vector<sim::ReplicationRecord> read_replication_csv(std::istream& in, const std::string& source = "<stream>");
std::vector<sim::ReplicationRecord> read_replication_csv_file(const std::string& path);

struct SummaryRow {
    std::string classifier;
    std::string estimator;
    int k = 0;
    double mean_abs_error = 0.0;  // over successful records
    std::size_t records = 0;
    std::size_t failures = 0;
};

// One row per (classifier, estimator, k), in order of first appearance.
std::vector<SummaryRow> summarize(const std::vector<sim::ReplicationRecord>& records);

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

// Prediction against k, one panel per classifier, followed by the summary
// table of mean absolute error per estimator. Throws NoRecords when empty.
void write_svg(std::ostream& out, const std::vector<sim::ReplicationRecord>& records);

}  // namespace acx::report
