#include "cec/dataset.hpp"

#include <fmt/format.h>

#include <fstream>
#include <iterator>
#include <json.hpp>
#include <unordered_set>

#include "cec/errors.hpp"
#include "cec/text.hpp"

namespace cec {

using nlohmann::json;

std::vector<CauseEffectPair> parse_dataset(std::string_view jsonl, std::string_view source) {
  std::vector<CauseEffectPair> pairs;
  std::unordered_set<std::string> ids;
  std::size_t line_no = 0;
  for (std::string_view line : text::split_lines(jsonl)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto where = [&] { return fmt::format("{}:{}", source, line_no); };

    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::BadInput, fmt::format("{}: {}", where(), e.what()));
    }
    if (!record.is_object()) throw Error(ErrorKind::BadInput, where() + ": expected an object");

    const auto field = [&](const char* name) -> std::string {
      auto it = record.find(name);
      if (it == record.end() || !it->is_string()) {
        throw Error(ErrorKind::BadInput, fmt::format("{}: missing string field '{}'", where(), name));
      }
      return it->get<std::string>();
    };

    CauseEffectPair pair{field("id"), field("cause"), field("effect"), field("supporter"),
                         field("defeater")};
    try {
      validate_pair(pair);
    } catch (const InvariantViolation& e) {
      throw Error(ErrorKind::BadInput, fmt::format("{}: {}", where(), e.what()));
    }
    if (!ids.insert(pair.id).second) {
      throw Error(ErrorKind::BadInput, fmt::format("{}: duplicate id '{}'", where(), pair.id));
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::vector<CauseEffectPair> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot read dataset " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_dataset(bytes, path.string());
}

std::string dataset_to_jsonl(const std::vector<CauseEffectPair>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    json record = {{"id", p.id},
                   {"cause", p.cause},
                   {"effect", p.effect},
                   {"supporter", p.original_supporter},
                   {"defeater", p.original_defeater}};
    out += record.dump();
    out += '\n';
  }
  return out;
}

}  // namespace cec
