#include "cec/core.hpp"

#include <fmt/format.h>

#include <numeric>
#include <random>
#include <set>
#include <unordered_set>

#include "cec/digest.hpp"
#include "cec/errors.hpp"
#include "cec/text.hpp"

namespace cec {

std::string_view to_string(Polarity p) {
  return p == Polarity::Defeater ? "defeater" : "supporter";
}

Polarity opposite(Polarity p) {
  return p == Polarity::Defeater ? Polarity::Supporter : Polarity::Defeater;
}

void validate_pair(const CauseEffectPair& pair) {
  const std::pair<std::string_view, const std::string*> fields[] = {
      {"cause", &pair.cause},
      {"effect", &pair.effect},
      {"supporter", &pair.original_supporter},
      {"defeater", &pair.original_defeater},
  };
  for (const auto& [name, value] : fields) {
    if (text::normalize(*value).empty()) {
      throw InvariantViolation(Violation::EmptyText,
                               fmt::format("pair '{}' has an empty {}", pair.id, name));
    }
  }
}

int slot_for_index(const Layout& layout, std::size_t index) {
  const auto m = static_cast<int>(layout.defeaters);
  const auto i = static_cast<int>(index);
  return i < m ? i - m : i - m + 1;
}

Polarity polarity_for_index(const Layout& layout, std::size_t index) {
  return index < layout.defeaters ? Polarity::Defeater : Polarity::Supporter;
}

Layout GenerationSequence::layout() const {
  Layout l{0, 0};
  for (const auto& item : items) {
    (item.polarity == Polarity::Defeater ? l.defeaters : l.supporters) += 1;
  }
  return l;
}

std::vector<Polarity> GenerationSequence::polarities() const {
  std::vector<Polarity> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(item.polarity);
  return out;
}

void validate_sequence(const GenerationSequence& seq, std::optional<Layout> expected) {
  const Layout layout = seq.layout();
  if (expected && layout != *expected) {
    throw InvariantViolation(
        Violation::WrongLength,
        fmt::format("expected {}+{} intermediates, got {}+{}", expected->defeaters,
                    expected->supporters, layout.defeaters, layout.supporters));
  }
  if (layout.defeaters == 0 || layout.supporters == 0) {
    throw InvariantViolation(Violation::MissingGroup, "both polarities must be present");
  }

  std::set<int> slots;
  for (std::size_t i = 0; i < seq.items.size(); ++i) {
    const auto& item = seq.items[i];
    const bool sign_ok = item.polarity == Polarity::Defeater ? item.slot < 0 : item.slot > 0;
    if (!sign_ok) {
      throw InvariantViolation(Violation::SlotLayout,
                               fmt::format("item {} has slot {} for a {}", i + 1, item.slot,
                                           to_string(item.polarity)));
    }
    if (!slots.insert(item.slot).second) {
      throw InvariantViolation(Violation::DuplicateSlot, fmt::format("slot {}", item.slot));
    }
  }
  for (std::size_t i = 0; i < seq.items.size(); ++i) {
    const auto& item = seq.items[i];
    if (item.slot != slot_for_index(layout, i) || item.polarity != polarity_for_index(layout, i)) {
      throw InvariantViolation(Violation::SlotLayout,
                               fmt::format("item {} has slot {}, expected {}", i + 1, item.slot,
                                           slot_for_index(layout, i)));
    }
  }

  std::unordered_set<std::string> seen;
  for (const auto& item : seq.items) {
    std::string norm = text::normalize(item.text);
    if (norm.empty()) {
      throw InvariantViolation(Violation::EmptyText, fmt::format("slot {}", item.slot));
    }
    if (!seen.insert(std::move(norm)).second) {
      throw InvariantViolation(Violation::DuplicateText, fmt::format("slot {}", item.slot));
    }
  }
}

bool is_permutation_of_range(std::span<const std::size_t> values, std::size_t k) {
  if (values.size() != k) return false;
  std::vector<bool> seen(k + 1, false);
  for (std::size_t v : values) {
    if (v < 1 || v > k || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

void validate_permutation(std::span<const std::size_t> order, std::size_t k) {
  if (!is_permutation_of_range(order, k)) {
    throw Error(ErrorKind::IdMismatch,
                fmt::format("[{}] is not a permutation of 1..{}", fmt::join(order, " "), k));
  }
}

RankedPermutation ideal_permutation(std::size_t m, std::size_t n) {
  if (m + n < 2) throw Error(ErrorKind::BadArity, "need at least two intermediates");
  RankedPermutation out;
  out.order.resize(m + n);
  std::iota(out.order.begin(), out.order.end(), std::size_t{1});
  return out;
}

std::vector<Polarity> ranked_labels(const GenerationSequence& seq, const RankedPermutation& ranked) {
  validate_permutation(ranked.order, seq.items.size());
  std::vector<Polarity> labels;
  labels.reserve(ranked.order.size());
  for (std::size_t pos : ranked.order) labels.push_back(seq.items[pos - 1].polarity);
  return labels;
}

PresentationOrder make_presentation(std::string_view pair_id, std::size_t k, std::uint64_t seed) {
  PresentationOrder p = identity_presentation(pair_id, k);
  p.seed = seed;
  std::mt19937_64 rng(splitmix64(seed ^ fnv1a64(pair_id)));
  portable_shuffle(p.shuffled_indices, rng);
  return p;
}

PresentationOrder identity_presentation(std::string_view pair_id, std::size_t k) {
  PresentationOrder p;
  p.pair_id = std::string(pair_id);
  p.shuffled_indices.resize(k);
  std::iota(p.shuffled_indices.begin(), p.shuffled_indices.end(), std::size_t{1});
  return p;
}

}  // namespace cec
