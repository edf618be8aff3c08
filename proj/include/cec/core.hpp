#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cec {

enum class Polarity : std::uint8_t { Defeater, Supporter };

std::string_view to_string(Polarity p);
Polarity opposite(Polarity p);

struct CauseEffectPair {
  std::string id;
  std::string cause;
  std::string effect;
  std::string original_supporter;
  std::string original_defeater;
};

/// Throws InvariantViolation(EmptyText) if any text field is blank after
/// normalization.
void validate_pair(const CauseEffectPair& pair);

/// An intermediate with its intensity slot: -m..-1 for defeaters, +1..+n for
/// supporters. Larger |slot| means stronger influence.
struct Intermediate {
  std::string text;
  Polarity polarity = Polarity::Defeater;
  int slot = 0;

  bool operator==(const Intermediate&) const = default;
};

/// Group sizes: `defeaters` is m, `supporters` is n.
struct Layout {
  std::size_t defeaters = 5;
  std::size_t supporters = 5;

  std::size_t size() const { return defeaters + supporters; }
  bool operator==(const Layout&) const = default;
};

/// Expected slot for 0-based generation index `index` under `layout`.
int slot_for_index(const Layout& layout, std::size_t index);
Polarity polarity_for_index(const Layout& layout, std::size_t index);

/// Intermediates in generation order. Item i sits at generation position i+1.
struct GenerationSequence {
  std::string pair_id;
  std::vector<Intermediate> items;

  Layout layout() const;
  std::vector<Polarity> polarities() const;
  bool operator==(const GenerationSequence&) const = default;
};

/// Throws InvariantViolation unless `seq` has the canonical layout: defeaters
/// slotted -m..-1 followed by supporters +1..+n, both groups non-empty, all
/// texts non-empty and distinct after normalization. If `expected` is given the
/// group sizes must match it.
void validate_sequence(const GenerationSequence& seq,
                       std::optional<Layout> expected = std::nullopt);

/// A ranking over generation positions (1-based). order[0] is the item ranked
/// as weakening the relationship the most.
struct RankedPermutation {
  std::string pair_id;
  std::vector<std::size_t> order;

  bool operator==(const RankedPermutation&) const = default;
};

bool is_permutation_of_range(std::span<const std::size_t> values, std::size_t k);

/// Throws IdMismatch unless `order` is a permutation of 1..k.
void validate_permutation(std::span<const std::size_t> order, std::size_t k);

/// The identity ranking 1..m+n. Throws BadArity if m+n < 2.
RankedPermutation ideal_permutation(std::size_t m, std::size_t n);

/// Polarity labels in ranked order.
std::vector<Polarity> ranked_labels(const GenerationSequence& seq, const RankedPermutation& ranked);

/// Order in which intermediates are shown to the model in the ranking prompt.
/// Presented argument p (1-based) is generation position shuffled_indices[p-1].
struct PresentationOrder {
  std::string pair_id;
  std::vector<std::size_t> shuffled_indices;
  std::uint64_t seed = 0;

  bool operator==(const PresentationOrder&) const = default;
};

/// Seeded shuffle of 1..k, a pure function of (seed, pair_id, k).
PresentationOrder make_presentation(std::string_view pair_id, std::size_t k, std::uint64_t seed);

PresentationOrder identity_presentation(std::string_view pair_id, std::size_t k);

}  // namespace cec
