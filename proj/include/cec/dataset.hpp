#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cec/core.hpp"

namespace cec {

/// Reads line-delimited JSON records {id, cause, effect, supporter, defeater}.
/// Blank lines are skipped. Throws BadInput naming the offending line for
/// malformed JSON, missing or empty fields, and duplicate ids.
std::vector<CauseEffectPair> parse_dataset(std::string_view jsonl, std::string_view source = "<memory>");

std::vector<CauseEffectPair> load_dataset(const std::filesystem::path& path);

std::string dataset_to_jsonl(const std::vector<CauseEffectPair>& pairs);

}  // namespace cec
