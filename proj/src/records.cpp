#include "cec/records.hpp"

#include <fmt/format.h>

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <unordered_map>

#include "cec/errors.hpp"
#include "cec/text.hpp"

namespace cec {

using nlohmann::ordered_json;

namespace {

ordered_json bundle_json(const MetricBundle& b) {
  ordered_json j;
  j["tau_supporters"] = b.tau_supporters ? ordered_json(*b.tau_supporters) : ordered_json(nullptr);
  j["tau_defeaters"] = b.tau_defeaters ? ordered_json(*b.tau_defeaters) : ordered_json(nullptr);
  j["tau_all"] = b.tau_all;
  j["cgp"] = b.cgp;
  j["igc"] = b.igc;
  return j;
}

std::optional<double> opt_double(const ordered_json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

ordered_json stat_json(const MetricStat& s) { return {{"mean", s.mean}, {"sd", s.sd}, {"count", s.count}}; }

MetricStat stat_from(const ordered_json& j) {
  return {j.at("mean").get<double>(), j.at("sd").get<double>(), j.at("count").get<std::size_t>()};
}

}  // namespace

RankingMode parse_mode(std::string_view text) {
  if (text == "prompt") return {};
  const auto parts = [&] {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
      if (i == text.size() || text[i] == ':') {
        out.push_back(text.substr(start, i - start));
        start = i + 1;
      }
    }
    return out;
  }();
  if (parts.size() != 3 || parts[0] != "prob") {
    throw Error(ErrorKind::BadInput, fmt::format("unknown ranking mode '{}'", text));
  }
  return {RankingMode::Kind::Prob, parse_conjunction(parts[1]), parse_score_kind(parts[2])};
}

std::string result_to_line(const PairResult& r) {
  ordered_json j;
  j["pair_id"] = r.pair_id;
  j["mode"] = describe(r.mode);
  if (r.sequence) {
    ordered_json items = ordered_json::array();
    for (const auto& item : r.sequence->items) {
      items.push_back({{"slot", item.slot}, {"polarity", to_string(item.polarity)}, {"text", item.text}});
    }
    j["sequence"] = std::move(items);
  } else {
    j["sequence"] = nullptr;
  }
  if (r.presentation) {
    j["presentation"] = {{"seed", r.presentation->seed}, {"shuffled", r.presentation->shuffled_indices}};
  } else {
    j["presentation"] = nullptr;
  }
  j["ranked"] = r.ranked ? ordered_json(r.ranked->order) : ordered_json(nullptr);
  j["bundle"] = r.bundle ? bundle_json(*r.bundle) : ordered_json(nullptr);
  if (r.failure) {
    j["failure"] = {{"kind", to_string(r.failure->kind)},
                    {"phase", r.failure->phase},
                    {"message", r.failure->message}};
  } else {
    j["failure"] = nullptr;
  }
  j["warnings"] = r.warnings;
  return j.dump();
}

PairResult result_from_line(std::string_view line) {
  const ordered_json j = ordered_json::parse(line);
  PairResult r;
  r.pair_id = j.at("pair_id").get<std::string>();
  r.mode = parse_mode(j.value("mode", std::string("prompt")));
  if (j.contains("sequence") && !j["sequence"].is_null()) {
    GenerationSequence seq;
    seq.pair_id = r.pair_id;
    for (const auto& item : j["sequence"]) {
      const auto polarity = item.at("polarity").get<std::string>();
      if (polarity != "defeater" && polarity != "supporter") {
        throw Error(ErrorKind::BadInput, fmt::format("unknown polarity '{}'", polarity));
      }
      seq.items.push_back({item.at("text").get<std::string>(),
                           polarity == "defeater" ? Polarity::Defeater : Polarity::Supporter,
                           item.at("slot").get<int>()});
    }
    validate_sequence(seq);
    r.sequence = std::move(seq);
  }
  if (j.contains("presentation") && !j["presentation"].is_null()) {
    PresentationOrder p;
    p.pair_id = r.pair_id;
    p.seed = j["presentation"].at("seed").get<std::uint64_t>();
    p.shuffled_indices = j["presentation"].at("shuffled").get<std::vector<std::size_t>>();
    r.presentation = std::move(p);
  }
  if (j.contains("ranked") && !j["ranked"].is_null()) {
    r.ranked = RankedPermutation{r.pair_id, j["ranked"].get<std::vector<std::size_t>>()};
  }
  if (j.contains("bundle") && !j["bundle"].is_null()) {
    const auto& b = j["bundle"];
    r.bundle = MetricBundle{opt_double(b.at("tau_supporters")), opt_double(b.at("tau_defeaters")),
                            b.at("tau_all").get<double>(), b.at("cgp").get<double>(), b.at("igc").get<double>()};
  }
  if (j.contains("failure") && !j["failure"].is_null()) {
    const auto& f = j["failure"];
    r.failure = Failure{parse_error_kind(f.at("kind").get<std::string>()), f.value("phase", std::string()),
                        f.value("message", std::string())};
  }
  if (j.contains("warnings")) r.warnings = j["warnings"].get<std::vector<std::string>>();
  return r;
}

std::string results_to_jsonl(const std::vector<PairResult>& results) {
  std::string out;
  for (const auto& r : results) {
    out += result_to_line(r);
    out += '\n';
  }
  return out;
}

std::vector<PairResult> parse_results(std::string_view jsonl, std::string_view source) {
  std::vector<PairResult> out;
  std::size_t line_no = 0;
  for (std::string_view line : text::split_lines(jsonl)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(result_from_line(line));
    } catch (const ordered_json::exception& e) {
      throw Error(ErrorKind::BadInput, fmt::format("{}:{}: {}", source, line_no, e.what()));
    } catch (const Error& e) {
      throw Error(ErrorKind::BadInput, fmt::format("{}:{}: {}", source, line_no, e.what()));
    }
  }
  return out;
}

std::vector<PairResult> load_results(const std::filesystem::path& path) {
  return parse_results(read_text_file(path), path.string());
}

std::vector<PairResult> join_rankings(std::vector<PairResult> sequences, const std::vector<PairResult>& rankings) {
  std::unordered_map<std::string, const PairResult*> by_id;
  for (const auto& r : rankings) by_id[r.pair_id] = &r;
  for (auto& s : sequences) {
    if (s.failure) continue;
    auto it = by_id.find(s.pair_id);
    if (it == by_id.end()) {
      s.failure = Failure{ErrorKind::BadInput, "score", "no ranking record"};
      continue;
    }
    const PairResult& r = *it->second;
    s.mode = r.mode;
    s.presentation = r.presentation;
    s.ranked = r.ranked;
    s.failure = r.failure;
    s.warnings.insert(s.warnings.end(), r.warnings.begin(), r.warnings.end());
    if (r.sequence && s.sequence && *r.sequence != *s.sequence) {
      s.failure = Failure{ErrorKind::IdMismatch, "score", "ranking record was made for a different sequence"};
    }
    if (!s.failure && !s.ranked) s.failure = Failure{ErrorKind::BadInput, "score", "no ranking record"};
  }
  return sequences;
}

std::string report_to_json(const AggregateReport& r) {
  ordered_json j;
  j["model"] = r.model;
  j["tau_A"] = stat_json(r.tau_supporters);
  j["tau_D"] = stat_json(r.tau_defeaters);
  j["tau_all"] = stat_json(r.tau_all);
  j["CGP"] = stat_json(r.cgp);
  j["IGC"] = stat_json(r.igc);
  j["scored"] = r.scored;
  j["failed"] = r.failed;
  j["failures"] = r.failures;
  j["metadata"] = r.metadata;
  return j.dump(2) + "\n";
}

AggregateReport report_from_json(std::string_view text) {
  try {
    const ordered_json j = ordered_json::parse(text);
    AggregateReport r;
    r.model = j.at("model").get<std::string>();
    r.tau_supporters = stat_from(j.at("tau_A"));
    r.tau_defeaters = stat_from(j.at("tau_D"));
    r.tau_all = stat_from(j.at("tau_all"));
    r.cgp = stat_from(j.at("CGP"));
    r.igc = stat_from(j.at("IGC"));
    r.scored = j.at("scored").get<std::size_t>();
    r.failed = j.at("failed").get<std::size_t>();
    r.failures = j.at("failures").get<std::map<std::string, std::size_t>>();
    r.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
    return r;
  } catch (const ordered_json::exception& e) {
    throw Error(ErrorKind::BadInput, fmt::format("malformed aggregate report: {}", e.what()));
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorKind::IoFailure, "write failed on " + path.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::IoFailure, fmt::format("cannot move {} into place: {}", path.string(), ec.message()));
}

}  // namespace cec
