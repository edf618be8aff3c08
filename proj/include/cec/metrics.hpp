#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cec/core.hpp"

namespace cec {

/// Kendall tau between two orderings of the same distinct ids:
/// (concordant - discordant) / (k(k-1)/2). No ties are possible.
///
/// Throws BadArity if k < 2 and IdMismatch if `observed` is not a permutation
/// of `reference` (or `reference` repeats an id).
double kendall_tau(std::span<const std::size_t> reference, std::span<const std::size_t> observed);

/// Kendall tau restricted to one polarity group: the group's generation order
/// against the order in which its members appear in `ranked`. Empty when the
/// group has fewer than two members.
std::optional<double> tau_group(const GenerationSequence& seq, const RankedPermutation& ranked,
                                Polarity polarity);

/// Kendall tau over all intermediates against generation order.
double tau_all(const GenerationSequence& seq, const RankedPermutation& ranked);

/// Cross-group position: 1 - (#supporter-before-defeater pairs) / (|A||D|),
/// computed from the polarity labels in ranked order. Throws EmptyGroup if
/// either polarity is missing.
double cgp(std::span<const Polarity> ranked_labels);
double cgp(const GenerationSequence& seq, const RankedPermutation& ranked);

/// Polarity-change distance between 0-based positions i < j:
///
///   d(i, j) = sum_{k=i}^{j-1} [L_k != L_{k+1} and L_{k+1} != L_i]
///
/// i.e. transitions away from the starting label are counted, returns to it
/// are not. Throws IndexOutOfRange or BadOrder (i >= j).
std::size_t polarity_distance(std::span<const Polarity> labels, std::size_t i, std::size_t j);

/// Symmetric matrix of polarity_distance(min(i,j), max(i,j)) with zero diagonal.
class DistanceMatrix {
 public:
  explicit DistanceMatrix(std::size_t size) : size_(size), entries_(size * size, 0) {}

  std::size_t size() const { return size_; }
  std::size_t operator()(std::size_t i, std::size_t j) const { return entries_[i * size_ + j]; }
  std::size_t& at(std::size_t i, std::size_t j) { return entries_[i * size_ + j]; }

  bool operator==(const DistanceMatrix&) const = default;

 private:
  std::size_t size_;
  std::vector<std::size_t> entries_;
};

/// Throws BadArity if fewer than two labels.
DistanceMatrix distance_matrix(std::span<const Polarity> labels);

/// Per-element silhouette over the polarity-change distance. An element that
/// is the only member of its polarity scores exactly 1. Otherwise
/// s = (b - a) / max(a, b) with a the mean distance to its own group and b the
/// mean distance to the other group.
///
/// Throws BadArity for fewer than two labels and SingleCluster when only one
/// polarity is present.
std::vector<double> silhouette(std::span<const Polarity> labels);

/// Intra-group clustering: the mean silhouette.
double igc(std::span<const Polarity> labels);

struct MetricBundle {
  std::optional<double> tau_supporters;
  std::optional<double> tau_defeaters;
  double tau_all = 0.0;
  double cgp = 0.0;
  double igc = 0.0;

  bool operator==(const MetricBundle&) const = default;
};

/// All five metrics for one ranking of one generation sequence.
MetricBundle metric_bundle(const GenerationSequence& seq, const RankedPermutation& ranked);

/// Same, from labels alone; generation layout is defeaters then supporters.
MetricBundle metric_bundle(const Layout& layout, std::span<const std::size_t> order);

}  // namespace cec
