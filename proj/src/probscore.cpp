#include "cec/probscore.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cec/errors.hpp"
#include "cec/text.hpp"

namespace cec {
namespace {

using enum Conjunction;
using enum ConjunctionCategory;

constexpr std::array<ConjunctionTemplate, 7> kTemplates = {{
    {So, Coordinating, "{cause}, so {effect}"},
    {Because, Subordinating, "Because {cause}, {effect}"},
    {Since, Subordinating, "Since {cause}, {effect}"},
    {As, Subordinating, "As {cause}, {effect}"},
    {Therefore, ConjunctiveAdverb, "{cause}; therefore, {effect}"},
    {Thus, ConjunctiveAdverb, "{cause}; thus, {effect}"},
    {Hence, ConjunctiveAdverb, "{cause}; hence, {effect}"},
}};

constexpr std::string_view kCauseHole = "{cause}";
constexpr std::string_view kEffectHole = "{effect}";

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?' || c == ';' || c == ','; }

std::string_view strip_trailing(std::string_view s, bool (*pred)(char)) {
  s = text::trim(s);
  while (!s.empty() && pred(s.back())) s = text::trim(s.substr(0, s.size() - 1));
  return s;
}

}  // namespace

const ConjunctionTemplate& conjunction_template(Conjunction word) {
  return kTemplates[static_cast<std::size_t>(word)];
}

std::string_view to_string(Conjunction word) {
  switch (word) {
    case So: return "so";
    case Because: return "because";
    case Since: return "since";
    case As: return "as";
    case Therefore: return "therefore";
    case Thus: return "thus";
    case Hence: return "hence";
  }
  return "?";
}

std::string_view to_string(ConjunctionCategory category) {
  switch (category) {
    case Coordinating: return "coordinating";
    case Subordinating: return "subordinating";
    case ConjunctiveAdverb: return "conjunctive_adverb";
  }
  return "?";
}

Conjunction parse_conjunction(std::string_view name) {
  const std::string lower = text::to_lower(text::trim(name));
  if (lower == "for") {
    throw Error(ErrorKind::InapplicableConjunction,
                "'for' puts the effect before the cause and cannot be scored left to right");
  }
  for (Conjunction c : kAllConjunctions) {
    if (to_string(c) == lower) return c;
  }
  throw Error(ErrorKind::UnknownName, fmt::format("unknown conjunction '{}'", name));
}

std::string_view to_string(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::CausalStrength: return "causal-strength";
    case ScoreKind::AvgConditionalProb: return "avg-prob";
    case ScoreKind::PmiDomainConditional: return "pmi-dc";
  }
  return "?";
}

ScoreKind parse_score_kind(std::string_view name) {
  const std::string lower = text::to_lower(text::trim(name));
  if (lower == "causal-strength" || lower == "causalstrength" || lower == "cs") return ScoreKind::CausalStrength;
  if (lower == "avg-prob" || lower == "avgconditionalprob" || lower == "p_avg") return ScoreKind::AvgConditionalProb;
  if (lower == "pmi-dc" || lower == "pmidomainconditional" || lower == "pmi_dc") return ScoreKind::PmiDomainConditional;
  throw Error(ErrorKind::UnknownName, fmt::format("unknown score kind '{}'", name));
}

std::string combine_events(std::string_view cause, std::string_view intermediate) {
  const auto c = strip_trailing(cause, is_terminal);
  const auto i = strip_trailing(intermediate, [](char ch) { return ch == '.'; });
  if (c.empty() || i.empty()) throw Error(ErrorKind::BadInput, "cannot combine an empty event");
  return fmt::format("{}. {}", c, i);
}

RenderedTemplate render_template(const ConjunctionTemplate& t, std::string_view combined_cause,
                                 std::string_view effect) {
  const std::string_view pattern = t.pattern;
  const auto cause_at = pattern.find(kCauseHole);
  const auto effect_at = pattern.find(kEffectHole);
  if (cause_at == std::string_view::npos || effect_at == std::string_view::npos || cause_at > effect_at) {
    throw Error(ErrorKind::InapplicableConjunction, fmt::format("pattern '{}' is not cause-first", pattern));
  }
  const std::string_view before = pattern.substr(0, cause_at);
  const std::string_view between = pattern.substr(cause_at + kCauseHole.size(), effect_at - cause_at - kCauseHole.size());

  RenderedTemplate r;
  r.context = std::string(text::trim(fmt::format("{}{}{}", before, text::trim(combined_cause), between)));
  r.continuation = std::string(text::trim(effect));
  return r;
}

double causal_strength(std::span<const TokenLogprob> logprobs) {
  if (logprobs.empty()) throw Error(ErrorKind::EmptyScore, "no tokens to score");
  double sum = 0.0;
  for (const auto& t : logprobs) sum += t.logprob;
  return sum;
}

double avg_conditional_prob(std::span<const TokenLogprob> logprobs) {
  if (logprobs.empty()) throw Error(ErrorKind::EmptyScore, "no tokens to score");
  double sum = 0.0;
  for (const auto& t : logprobs) sum += std::exp(t.logprob);
  return sum / static_cast<double>(logprobs.size());
}

PmiScore pmi_dc(std::span<const TokenLogprob> conditional, std::span<const TokenLogprob> domain) {
  if (conditional.empty() || domain.empty()) throw Error(ErrorKind::EmptyScore, "no tokens to score");
  return {causal_strength(conditional) - causal_strength(domain), conditional.size() != domain.size()};
}

RankedPermutation rank_by_score(const GenerationSequence& seq, std::span<const double> scores) {
  if (scores.size() != seq.items.size()) {
    throw Error(ErrorKind::BadArity,
                fmt::format("{} scores for {} intermediates", scores.size(), seq.items.size()));
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) {
      throw Error(ErrorKind::NonFiniteScore, fmt::format("score at position {} is {}", i + 1, scores[i]));
    }
  }
  RankedPermutation r;
  r.pair_id = seq.pair_id;
  r.order.resize(scores.size());
  std::iota(r.order.begin(), r.order.end(), std::size_t{1});
  std::stable_sort(r.order.begin(), r.order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a - 1] < scores[b - 1]; });
  return r;
}

}  // namespace cec
