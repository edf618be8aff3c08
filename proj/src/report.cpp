#include "cec/report.hpp"

#include <fmt/format.h>

#include <cstdlib>
#include <numeric>

#include "cec/errors.hpp"
#include "cec/records.hpp"
#include "cec/text.hpp"

namespace cec {
namespace {

constexpr std::string_view kPlusMinus = " ± ";

std::string fixed(double v, int decimals) {
  std::string s = fmt::format("{:.{}f}", v, decimals);
  if (s.starts_with('-') && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string signed_fixed(double v, int decimals) {
  std::string s = fixed(v, decimals);
  return s.starts_with('-') ? s : "+" + s;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

double parse_number(std::string_view s) {
  const std::string tmp(text::trim(s));
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size()) {
    throw Error(ErrorKind::BadInput, fmt::format("not a number: '{}'", s));
  }
  return v;
}

std::string slot_label(const Layout& layout, std::size_t index) {
  const int slot = slot_for_index(layout, index);
  return slot > 0 ? fmt::format("+{}", slot) : std::to_string(slot);
}

std::array<const MetricStat*, 5> metric_columns(const AggregateReport& r) {
  return {&r.tau_supporters, &r.tau_defeaters, &r.tau_all, &r.cgp, &r.igc};
}

}  // namespace

ReportFormat parse_report_format(std::string_view name) {
  const std::string lower = text::to_lower(text::trim(name));
  if (lower == "csv") return ReportFormat::Csv;
  if (lower == "json") return ReportFormat::Json;
  if (lower == "markdown" || lower == "md") return ReportFormat::Markdown;
  throw Error(ErrorKind::UnknownName, fmt::format("unknown report format '{}'", name));
}

std::string_view file_extension(ReportFormat format) {
  switch (format) {
    case ReportFormat::Csv: return "csv";
    case ReportFormat::Json: return "json";
    case ReportFormat::Markdown: return "md";
  }
  return "txt";
}

std::string format_stat(const MetricStat& stat) {
  if (stat.count == 0) return "n/a";
  return fmt::format("{}{}{}", fixed(stat.mean, 3), kPlusMinus, fixed(stat.sd, 3));
}

std::string emit_aggregate(std::span<const AggregateReport> reports, ReportFormat format) {
  if (reports.empty()) throw Error(ErrorKind::NothingScored, "no reports to emit");
  for (const auto& r : reports) {
    if (r.scored == 0) throw Error(ErrorKind::NothingScored, fmt::format("report '{}' has nothing scored", r.model));
  }

  std::string out;
  switch (format) {
    case ReportFormat::Csv:
      out = "model,tau_A,tau_D,tau_all,CGP,IGC,scored,failed\n";
      for (const auto& r : reports) {
        out += csv_field(r.model);
        for (const MetricStat* s : metric_columns(r)) out += "," + format_stat(*s);
        out += fmt::format(",{},{}\n", r.scored, r.failed);
      }
      break;
    case ReportFormat::Markdown:
      out = "| model | τ-A | τ-D | τ-all | CGP | IGC | scored | failed |\n"
            "|---|---|---|---|---|---|---|---|\n";
      for (const auto& r : reports) {
        out += "| " + r.model;
        for (const MetricStat* s : metric_columns(r)) out += " | " + format_stat(*s);
        out += fmt::format(" | {} | {} |\n", r.scored, r.failed);
      }
      break;
    case ReportFormat::Json:
      if (reports.size() == 1) return report_to_json(reports[0]);
      out = "[\n";
      for (std::size_t i = 0; i < reports.size(); ++i) {
        std::string one = report_to_json(reports[i]);
        one.pop_back();
        out += one + (i + 1 < reports.size() ? ",\n" : "\n");
      }
      out += "]\n";
      break;
  }
  return out;
}

std::string emit_aggregate(const AggregateReport& report, ReportFormat format) {
  return emit_aggregate(std::span<const AggregateReport>(&report, 1), format);
}

std::string emit_confusion(const ConfusionMatrix& m) {
  const std::size_t k = m.layout.size();
  if (k == 0 || m.percentages.size() != k) throw Error(ErrorKind::BadArity, "confusion matrix does not match its layout");
  std::string out = "generated\\ranked";
  for (std::size_t j = 0; j < k; ++j) out += "," + slot_label(m.layout, j);
  out += ",row_sum\n";
  for (std::size_t i = 0; i < k; ++i) {
    out += slot_label(m.layout, i);
    double sum = 0.0;
    for (double p : m.percentages[i]) {
      out += "," + fixed(p, 1);
      sum += p;
    }
    out += "," + fixed(sum, 1) + "\n";
  }
  return out;
}

std::vector<DeltaRow> compute_delta(const AggregateReport& prompt,
                                    const std::map<Conjunction, AggregateReport>& prob_reports) {
  const auto digest = [](const AggregateReport& r) {
    auto it = r.metadata.find("dataset_digest");
    return it == r.metadata.end() ? std::string() : it->second;
  };
  std::vector<DeltaRow> rows;
  for (Conjunction c : kAllConjunctions) {
    auto it = prob_reports.find(c);
    if (it == prob_reports.end()) continue;
    const AggregateReport& prob = it->second;
    if (prob.model != prompt.model || digest(prob) != digest(prompt)) {
      throw Error(ErrorKind::DigestMismatch,
                  fmt::format("'{}' run ({} / {}) does not match the prompting run ({} / {})", to_string(c),
                              prob.model, digest(prob), prompt.model, digest(prompt)));
    }
    rows.push_back({c, prob.tau_all.mean - prompt.tau_all.mean, prob.cgp.mean - prompt.cgp.mean,
                    prob.igc.mean - prompt.igc.mean});
  }
  return rows;
}

std::string emit_delta(const AggregateReport& prompt_report,
                       const std::map<Conjunction, AggregateReport>& prob_reports) {
  std::string out = "conjunction,delta_tau_all,delta_CGP,delta_IGC\n";
  for (const auto& row : compute_delta(prompt_report, prob_reports)) {
    out += fmt::format("{},{},{},{}\n", to_string(row.conjunction), signed_fixed(row.tau_all, 3),
                       signed_fixed(row.cgp, 3), signed_fixed(row.igc, 3));
  }
  return out;
}

std::vector<AggregateRow> parse_aggregate_csv(std::string_view csv) {
  std::vector<AggregateRow> rows;
  bool header = true;
  for (std::string_view line : text::split_lines(csv)) {
    if (text::trim(line).empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != 8) throw Error(ErrorKind::BadInput, fmt::format("expected 8 fields, got {}", fields.size()));
    AggregateRow row;
    row.model = fields[0];
    for (std::size_t m = 0; m < 5; ++m) {
      const std::string_view cell = fields[m + 1];
      if (cell == "n/a") continue;
      const auto at = cell.find(kPlusMinus);
      if (at == std::string_view::npos) throw Error(ErrorKind::BadInput, fmt::format("bad cell '{}'", cell));
      row.metrics[m] = std::make_pair(parse_number(cell.substr(0, at)), parse_number(cell.substr(at + kPlusMinus.size())));
    }
    row.scored = static_cast<std::size_t>(parse_number(fields[6]));
    row.failed = static_cast<std::size_t>(parse_number(fields[7]));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::vector<double>> parse_confusion_csv(std::string_view csv) {
  std::vector<std::vector<double>> out;
  bool header = true;
  for (std::string_view line : text::split_lines(csv)) {
    if (text::trim(line).empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() < 3) throw Error(ErrorKind::BadInput, "confusion row too short");
    std::vector<double> row;
    for (std::size_t i = 1; i + 1 < fields.size(); ++i) row.push_back(parse_number(fields[i]));
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace cec
