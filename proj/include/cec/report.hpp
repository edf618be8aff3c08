#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cec/pipeline.hpp"
#include "cec/probscore.hpp"

namespace cec {

enum class ReportFormat { Csv, Json, Markdown };

ReportFormat parse_report_format(std::string_view name);
std::string_view file_extension(ReportFormat format);

/// "mean ± sd" to three decimals, or "n/a" for a metric with no values.
std::string format_stat(const MetricStat& stat);

/// One row per report: model, tau_A, tau_D, tau_all, CGP, IGC, scored,
/// failed. JSON output carries full precision. Throws NothingScored for an
/// empty list or a report with nothing scored.
std::string emit_aggregate(std::span<const AggregateReport> reports, ReportFormat format);
std::string emit_aggregate(const AggregateReport& report, ReportFormat format);

/// CSV with rows and columns labeled -m..-1, +1..+n, percentages to one
/// decimal and a trailing row_sum column.
std::string emit_confusion(const ConfusionMatrix& matrix);

struct DeltaRow {
  Conjunction conjunction;
  double tau_all = 0.0;
  double cgp = 0.0;
  double igc = 0.0;
};

/// Probability-mode mean minus prompting-mode mean, per conjunction. Throws
/// DigestMismatch when the model or dataset digest differs between inputs.
std::vector<DeltaRow> compute_delta(const AggregateReport& prompt_report,
                                    const std::map<Conjunction, AggregateReport>& prob_reports);
std::string emit_delta(const AggregateReport& prompt_report,
                       const std::map<Conjunction, AggregateReport>& prob_reports);

/// Parsed row of an aggregate CSV.
struct AggregateRow {
  std::string model;
  /// tau_A, tau_D, tau_all, CGP, IGC; empty for "n/a".
  std::array<std::optional<std::pair<double, double>>, 5> metrics;
  std::size_t scored = 0;
  std::size_t failed = 0;
};

std::vector<AggregateRow> parse_aggregate_csv(std::string_view csv);

/// Percentages of a confusion CSV, without the row_sum column.
std::vector<std::vector<double>> parse_confusion_csv(std::string_view csv);

}  // namespace cec
