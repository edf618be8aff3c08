#include "cec/extraction.hpp"

#include <fmt/format.h>

#include <cctype>
#include <optional>
#include <unordered_map>
#include <vector>

#include "cec/errors.hpp"
#include "cec/text.hpp"

namespace cec {
namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Values too long to be an index become 0, which is never in range.
std::size_t to_index(std::string_view digits) {
  if (digits.size() > 6) return 0;
  std::size_t v = 0;
  for (char c : digits) v = v * 10 + static_cast<std::size_t>(c - '0');
  return v;
}

bool is_preamble(std::string_view line) {
  if (line.ends_with(':')) return true;
  std::string lower = text::to_lower(line);
  std::string_view s = lower;
  for (std::string_view opener : {"sure", "okay", "ok", "certainly", "of course", "absolutely"}) {
    if (s.starts_with(opener)) {
      s.remove_prefix(opener.size());
      while (!s.empty() && (s.front() == ',' || s.front() == '!' || s.front() == '.' ||
                            s.front() == ' ')) {
        s.remove_prefix(1);
      }
      break;
    }
  }
  return s.starts_with("here is") || s.starts_with("here are") || s.starts_with("here's");
}

std::string_view strip_list_marker(std::string_view s) {
  if (s.starts_with("- ") || s.starts_with("* ") || s.starts_with("• ")) {
    return text::trim(s.substr(s.find(' ')));
  }
  std::size_t i = 0;
  while (i < s.size() && is_digit(s[i])) ++i;
  if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')')) {
    const std::size_t after = i + 1;
    if (after == s.size() || s[after] == ' ' || s[after] == '\t') return text::trim(s.substr(after));
  }
  return s;
}

std::vector<std::string_view> integer_tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_digit(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && is_digit(s[j])) ++j;
    out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

RankedPermutation make_local(std::vector<std::size_t> order) {
  RankedPermutation r;
  r.order = std::move(order);
  return r;
}

// Strategy a: a line that is nothing but k integers and separators.
std::optional<RankedPermutation> single_line(std::string_view text, std::size_t k,
                                             std::string& log) {
  std::size_t candidates = 0;
  for (std::string_view line : text::split_lines(text)) {
    std::string_view s = text::trim(line);
    if (auto colon = s.rfind(':'); colon != std::string_view::npos) s = text::trim(s.substr(colon + 1));
    if (s.ends_with('.')) s.remove_suffix(1);
    if (s.size() >= 2 && ((s.front() == '[' && s.back() == ']') || (s.front() == '(' && s.back() == ')'))) {
      s = text::trim(s.substr(1, s.size() - 2));
    }
    if (s.empty() || !is_digit(s.front())) continue;

    bool clean = true;
    for (char c : s) {
      if (!is_digit(c) && c != ' ' && c != ',' && c != '\t') {
        clean = false;
        break;
      }
    }
    if (!clean) continue;

    std::vector<std::size_t> values;
    for (auto tok : integer_tokens(s)) values.push_back(to_index(tok));
    if (values.size() != k) continue;
    ++candidates;
    if (is_permutation_of_range(values, k)) return make_local(std::move(values));
  }
  log = candidates == 0
            ? fmt::format("single-line: no line of exactly {} integers", k)
            : fmt::format("single-line: {} line(s) of {} integers, none a permutation", candidates, k);
  return std::nullopt;
}

// Strategy b: k consecutive non-blank lines, each led by an integer.
std::optional<RankedPermutation> per_line(std::string_view text, std::size_t k, std::string& log) {
  std::vector<std::optional<std::size_t>> leads;
  for (std::string_view line : text::split_lines(text)) {
    std::string_view s = text::trim(line);
    if (s.empty()) continue;
    if (s.starts_with("- ") || s.starts_with("* ")) s = text::trim(s.substr(2));
    std::size_t i = 0;
    while (i < s.size() && is_digit(s[i])) ++i;
    leads.push_back(i > 0 ? std::optional<std::size_t>(to_index(s.substr(0, i))) : std::nullopt);
  }

  std::size_t longest_run = 0, run = 0;
  for (std::size_t end = 0; end < leads.size(); ++end) {
    run = leads[end] ? run + 1 : 0;
    longest_run = std::max(longest_run, run);
    if (run < k) continue;
    std::vector<std::size_t> values;
    for (std::size_t i = end + 1 - k; i <= end; ++i) values.push_back(*leads[i]);
    if (is_permutation_of_range(values, k)) return make_local(std::move(values));
  }
  log = fmt::format("per-line: longest run of integer-led lines is {}, no permutation of 1..{}",
                    longest_run, k);
  return std::nullopt;
}

// Strategy c: first window of k distinct in-range integers in reading order.
std::optional<RankedPermutation> first_run(std::string_view text, std::size_t k, std::string& log) {
  std::vector<std::size_t> values;
  for (auto tok : integer_tokens(text)) values.push_back(to_index(tok));
  for (std::size_t start = 0; start + k <= values.size(); ++start) {
    std::span<const std::size_t> window(values.data() + start, k);
    if (is_permutation_of_range(window, k)) {
      return make_local(std::vector<std::size_t>(window.begin(), window.end()));
    }
  }
  log = fmt::format("first-run: {} integer(s) in text, no window of {} distinct values in 1..{}",
                    values.size(), k, k);
  return std::nullopt;
}

}  // namespace

GeneratedPair parse_generated_pair(std::string_view text) {
  std::vector<std::string> candidates;
  for (std::string_view line : text::split_lines(text)) {
    std::string_view s = text::trim(line);
    if (s.empty() || is_preamble(s)) continue;
    std::string norm = text::normalize(strip_list_marker(s));
    if (!norm.empty()) candidates.push_back(std::move(norm));
  }
  if (candidates.size() != 2) throw GenerationParseError(candidates.size());
  return {std::move(candidates[0]), std::move(candidates[1])};
}

GenerationSequence assemble_sequence(const CauseEffectPair& pair, const GeneratedIntermediates& g) {
  const auto D = Polarity::Defeater;
  const auto A = Polarity::Supporter;
  GenerationSequence seq;
  seq.pair_id = pair.id;
  seq.items = {
      {g.stronger_defeaters[1], D, -5}, {g.stronger_defeaters[0], D, -4},
      {pair.original_defeater, D, -3},  {g.weaker_defeaters[0], D, -2},
      {g.weaker_defeaters[1], D, -1},   {g.weaker_supporters[1], A, +1},
      {g.weaker_supporters[0], A, +2},  {pair.original_supporter, A, +3},
      {g.stronger_supporters[0], A, +4}, {g.stronger_supporters[1], A, +5},
  };

  std::unordered_map<std::string, int> seen;
  for (auto& item : seq.items) {
    item.text = text::normalize(item.text);
    if (item.text.empty()) {
      throw InvariantViolation(Violation::EmptyText, fmt::format("slot {}", item.slot));
    }
    auto [it, inserted] = seen.emplace(item.text, item.slot);
    if (!inserted) {
      throw Error(ErrorKind::DuplicateIntermediate,
                  fmt::format("slots {} and {} share the text '{}'", it->second, item.slot, item.text));
    }
  }
  validate_sequence(seq, Layout{5, 5});
  return seq;
}

RankedPermutation parse_ranking(std::string_view text, std::size_t k) {
  if (k < 2) throw Error(ErrorKind::BadArity, fmt::format("ranking size {} < 2", k));
  std::vector<std::string> log(3);
  if (auto r = single_line(text, k, log[0])) return *r;
  if (auto r = per_line(text, k, log[1])) return *r;
  if (auto r = first_run(text, k, log[2])) return *r;
  throw RankExtractionError(std::move(log));
}

RankedPermutation apply_presentation(const RankedPermutation& local, const PresentationOrder& presentation) {
  const std::size_t k = presentation.shuffled_indices.size();
  validate_permutation(presentation.shuffled_indices, k);
  validate_permutation(local.order, k);
  RankedPermutation out;
  out.pair_id = presentation.pair_id;
  out.order.reserve(k);
  for (std::size_t presented : local.order) out.order.push_back(presentation.shuffled_indices[presented - 1]);
  return out;
}

}  // namespace cec
