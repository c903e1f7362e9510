#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "svwa/harness/experiment.hpp"

namespace svwa::harness {

/// Column order used by every row file.
const std::vector<std::string>& row_columns();

std::string rows_to_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> rows_from_csv(const std::string& text);
std::string rows_to_json(const std::vector<ResultRow>& rows);
std::vector<ResultRow> rows_from_json(const std::string& text);

/// Rows whose method / corruption match; empty filter strings match anything.
std::vector<ResultRow> filter_rows(const std::vector<ResultRow>& rows, const std::string& method,
                                   const std::string& corruption);

/// Variants x corruptions of seed-mean accuracy in percent, plus a Mean
/// column averaging the corruption columns. Rows and columns keep the order in
/// which they first appear.
struct SummaryTable {
  std::vector<std::string> corruptions;
  std::vector<std::string> variants;
  std::vector<std::vector<std::optional<double>>> accuracy;  // [variant][corruption]
  std::vector<std::optional<double>> mean;                   // nullopt when a cell is missing
};

SummaryTable summarize(const std::vector<ResultRow>& rows);
std::string summary_to_csv(const SummaryTable& table);

/// One line per (variant, corruption): seeds, mean and sample std of accuracy.
std::string sweep_to_csv(const std::vector<ResultRow>& rows);

/// Writes rows.csv or rows.json, summary.csv and sweep.csv into dir. Throws
/// ConfigError("no rows ...") before touching the filesystem when rows is
/// empty.
void emit_report(const std::vector<ResultRow>& rows, const std::filesystem::path& dir, const std::string& format);

/// Reads rows.json if present, else rows.csv.
std::vector<ResultRow> load_rows(const std::filesystem::path& dir);

struct OrderingCheck {
  std::string name;
  double lhs = 0.0;  // percent
  double rhs = 0.0;  // percent, margin included
  bool pass = false;
};

/// Directional comparisons between seed-mean accuracies, per corruption, for
/// whichever variants are present: svwa vs tent vs source-only, largest vs
/// smallest V, sampling vs the augmentation sources, parallel vs sequential.
std::vector<OrderingCheck> ordering_checks(const std::vector<ResultRow>& rows);

}  // namespace svwa::harness
