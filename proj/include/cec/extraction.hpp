#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include "cec/core.hpp"

namespace cec {

struct GeneratedPair {
  std::string first;
  std::string second;
};

/// Pulls the two generated arguments out of a model reply. Blank lines,
/// preamble lines ("Sure, here are ...", anything ending in ':') are dropped;
/// list markers ("1.", "2)", "-", "*") and surrounding quotes are stripped.
/// Throws GenerationParseError unless exactly two candidate lines remain.
GeneratedPair parse_generated_pair(std::string_view text);

/// Output of the four generation prompts for one pair. Within each array the
/// order is the model's output order.
struct GeneratedIntermediates {
  std::array<std::string, 2> weaker_defeaters;
  std::array<std::string, 2> stronger_defeaters;
  std::array<std::string, 2> weaker_supporters;
  std::array<std::string, 2> stronger_supporters;
};

/// Lays out the 5+5 generation sequence. Each prompt asks for a first
/// argument stronger/weaker than the original and a second one stronger/weaker
/// than the first, so:
///
///   -5 stronger_def[1]  -4 stronger_def[0]  -3 original  -2 weaker_def[0]  -1 weaker_def[1]
///   +1 weaker_sup[1]    +2 weaker_sup[0]    +3 original  +4 stronger_sup[0] +5 stronger_sup[1]
///
/// Throws DuplicateIntermediate if any two of the ten texts coincide after
/// normalization and InvariantViolation if any is empty.
GenerationSequence assemble_sequence(const CauseEffectPair& pair, const GeneratedIntermediates& generated);

/// Recovers a permutation of 1..k (indices as presented to the model) from a
/// ranking reply. Strategies, first success wins:
///   a) one line holding exactly k integers separated by spaces/commas
///      (an optional "label:" prefix and surrounding brackets are allowed);
///   b) k consecutive non-blank lines, each starting with an integer;
///   c) the first window of k consecutive integers in reading order that are
///      distinct and within 1..k.
/// Throws RankExtractionError carrying one log entry per strategy. Throws
/// BadArity if k < 2.
RankedPermutation parse_ranking(std::string_view text, std::size_t k);

/// Maps a ranking over presented indices back to generation positions:
/// result[r] = presentation.shuffled_indices[local[r] - 1]. Throws IdMismatch
/// if either side is not a permutation of the same size.
RankedPermutation apply_presentation(const RankedPermutation& local, const PresentationOrder& presentation);

}  // namespace cec
