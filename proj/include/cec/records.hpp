#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cec/pipeline.hpp"

namespace cec {

/// One JSON object per line; field order is fixed so identical results give
/// identical bytes.
std::string result_to_line(const PairResult& result);
PairResult result_from_line(std::string_view line);

std::string results_to_jsonl(const std::vector<PairResult>& results);
/// Throws BadInput naming the source and line on malformed records.
std::vector<PairResult> parse_results(std::string_view jsonl, std::string_view source = "<memory>");
std::vector<PairResult> load_results(const std::filesystem::path& path);

/// Joins phase (i) records with ranking records by pair id. A pair missing
/// from `rankings` is recorded as failed; failures on either side carry over.
std::vector<PairResult> join_rankings(std::vector<PairResult> sequences, const std::vector<PairResult>& rankings);

/// Full-precision JSON of an aggregate report, and its inverse.
std::string report_to_json(const AggregateReport& report);
AggregateReport report_from_json(std::string_view json);

RankingMode parse_mode(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
/// Writes via a temporary file and rename. Throws IoFailure.
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace cec
