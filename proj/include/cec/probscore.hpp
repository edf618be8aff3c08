#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cec/backends.hpp"
#include "cec/core.hpp"

namespace cec {

enum class Conjunction { So, Because, Since, As, Therefore, Thus, Hence };

enum class ConjunctionCategory { Coordinating, Subordinating, ConjunctiveAdverb };

struct ConjunctionTemplate {
  Conjunction word;
  ConjunctionCategory category;
  /// Contains "{cause}" before "{effect}".
  std::string_view pattern;
};

inline constexpr std::array<Conjunction, 7> kAllConjunctions = {
    Conjunction::So,        Conjunction::Because, Conjunction::Since, Conjunction::As,
    Conjunction::Therefore, Conjunction::Thus,    Conjunction::Hence};

const ConjunctionTemplate& conjunction_template(Conjunction word);
std::string_view to_string(Conjunction word);
std::string_view to_string(ConjunctionCategory category);

/// Case-insensitive. "for" raises InapplicableConjunction (its effect comes
/// first, so a left-to-right model cannot score it); anything else unknown
/// raises UnknownName.
Conjunction parse_conjunction(std::string_view name);

enum class ScoreKind { CausalStrength, AvgConditionalProb, PmiDomainConditional };

std::string_view to_string(ScoreKind kind);
/// Accepts "causal-strength", "avg-prob", "pmi-dc" (and the enum spellings).
ScoreKind parse_score_kind(std::string_view name);

/// Cause with trailing terminal punctuation removed, ". ", then the
/// intermediate with its trailing periods removed.
std::string combine_events(std::string_view cause, std::string_view intermediate);

struct RenderedTemplate {
  std::string context;
  std::string continuation;
};

/// Instantiates the pattern and splits it where the effect begins.
RenderedTemplate render_template(const ConjunctionTemplate& t, std::string_view combined_cause,
                                 std::string_view effect);

/// Sum of token logprobs. Throws EmptyScore on an empty list.
double causal_strength(std::span<const TokenLogprob> logprobs);

/// Mean token probability. Throws EmptyScore on an empty list.
double avg_conditional_prob(std::span<const TokenLogprob> logprobs);

struct PmiScore {
  double value = 0.0;
  /// The two contexts tokenized the continuation differently.
  bool length_mismatch = false;
};

/// Sum of conditional logprobs minus sum of domain logprobs.
PmiScore pmi_dc(std::span<const TokenLogprob> conditional, std::span<const TokenLogprob> domain);

/// Generation positions sorted by ascending score; ties keep generation
/// order. Throws NonFiniteScore for NaN or infinite scores and BadArity when
/// the score count differs from the sequence length.
RankedPermutation rank_by_score(const GenerationSequence& seq, std::span<const double> scores);

}  // namespace cec
