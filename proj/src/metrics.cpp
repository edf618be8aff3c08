#include "cec/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>

#include "cec/errors.hpp"

namespace cec {
namespace {

// Inversion count by merge sort.
std::size_t count_inversions(std::vector<std::size_t>& v, std::vector<std::size_t>& scratch,
                             std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::size_t inv = count_inversions(v, scratch, lo, mid) + count_inversions(v, scratch, mid, hi);
  std::size_t i = lo, j = mid, out = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += mid - i;
      scratch[out++] = v[j++];
    } else {
      scratch[out++] = v[i++];
    }
  }
  while (i < mid) scratch[out++] = v[i++];
  while (j < hi) scratch[out++] = v[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo),
            scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

std::vector<Polarity> layout_labels(const Layout& layout, std::span<const std::size_t> order) {
  std::vector<Polarity> labels;
  labels.reserve(order.size());
  for (std::size_t pos : order) labels.push_back(polarity_for_index(layout, pos - 1));
  return labels;
}

}  // namespace

double kendall_tau(std::span<const std::size_t> reference, std::span<const std::size_t> observed) {
  const std::size_t k = reference.size();
  if (k < 2) throw Error(ErrorKind::BadArity, fmt::format("need at least 2 ids, got {}", k));
  if (observed.size() != k) {
    throw Error(ErrorKind::IdMismatch,
                fmt::format("orderings differ in length ({} vs {})", k, observed.size()));
  }

  // (id, index in observed), sorted by id, for lookups.
  std::vector<std::pair<std::size_t, std::size_t>> where(k);
  for (std::size_t i = 0; i < k; ++i) where[i] = {observed[i], i};
  std::sort(where.begin(), where.end());
  for (std::size_t i = 1; i < k; ++i) {
    if (where[i].first == where[i - 1].first) {
      throw Error(ErrorKind::IdMismatch, fmt::format("id {} repeated in observed order", where[i].first));
    }
  }

  std::vector<std::size_t> positions(k);
  std::vector<bool> used(k, false);
  for (std::size_t i = 0; i < k; ++i) {
    auto it = std::lower_bound(where.begin(), where.end(), std::make_pair(reference[i], std::size_t{0}));
    if (it == where.end() || it->first != reference[i]) {
      throw Error(ErrorKind::IdMismatch, fmt::format("id {} missing from observed order", reference[i]));
    }
    const std::size_t slot = static_cast<std::size_t>(it - where.begin());
    if (used[slot]) {
      throw Error(ErrorKind::IdMismatch, fmt::format("id {} repeated in reference order", reference[i]));
    }
    used[slot] = true;
    positions[i] = it->second;
  }

  std::vector<std::size_t> scratch(k);
  const std::size_t discordant = count_inversions(positions, scratch, 0, k);
  const double total = static_cast<double>(k) * static_cast<double>(k - 1) / 2.0;
  return (total - 2.0 * static_cast<double>(discordant)) / total;
}

std::optional<double> tau_group(const GenerationSequence& seq, const RankedPermutation& ranked,
                                Polarity polarity) {
  validate_permutation(ranked.order, seq.items.size());
  std::vector<std::size_t> reference;
  for (std::size_t i = 0; i < seq.items.size(); ++i) {
    if (seq.items[i].polarity == polarity) reference.push_back(i + 1);
  }
  if (reference.size() < 2) return std::nullopt;
  std::vector<std::size_t> observed;
  observed.reserve(reference.size());
  for (std::size_t pos : ranked.order) {
    if (seq.items[pos - 1].polarity == polarity) observed.push_back(pos);
  }
  return kendall_tau(reference, observed);
}

double tau_all(const GenerationSequence& seq, const RankedPermutation& ranked) {
  const auto identity = ideal_permutation(seq.items.size(), 0);
  return kendall_tau(identity.order, ranked.order);
}

double cgp(std::span<const Polarity> ranked_labels) {
  std::size_t supporters_seen = 0;
  std::size_t defeaters = 0;
  std::size_t violations = 0;
  for (Polarity p : ranked_labels) {
    if (p == Polarity::Supporter) {
      ++supporters_seen;
    } else {
      ++defeaters;
      violations += supporters_seen;
    }
  }
  if (supporters_seen == 0 || defeaters == 0) {
    throw Error(ErrorKind::EmptyGroup, "cross-group position needs both polarities");
  }
  return 1.0 - static_cast<double>(violations) /
                   (static_cast<double>(supporters_seen) * static_cast<double>(defeaters));
}

double cgp(const GenerationSequence& seq, const RankedPermutation& ranked) {
  return cgp(ranked_labels(seq, ranked));
}

std::size_t polarity_distance(std::span<const Polarity> labels, std::size_t i, std::size_t j) {
  if (i >= labels.size() || j >= labels.size()) {
    throw Error(ErrorKind::IndexOutOfRange,
                fmt::format("({}, {}) outside sequence of length {}", i, j, labels.size()));
  }
  if (i >= j) throw Error(ErrorKind::BadOrder, fmt::format("need i < j, got ({}, {})", i, j));
  std::size_t d = 0;
  for (std::size_t k = i; k < j; ++k) {
    if (labels[k] != labels[k + 1] && labels[k + 1] != labels[i]) ++d;
  }
  return d;
}

DistanceMatrix distance_matrix(std::span<const Polarity> labels) {
  const std::size_t n = labels.size();
  if (n < 2) throw Error(ErrorKind::BadArity, "distance matrix needs at least 2 labels");
  DistanceMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t d = 0;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (labels[j - 1] != labels[j] && labels[j] != labels[i]) ++d;
      m.at(i, j) = d;
      m.at(j, i) = d;
    }
  }
  return m;
}

std::vector<double> silhouette(std::span<const Polarity> labels) {
  const std::size_t n = labels.size();
  if (n < 2) throw Error(ErrorKind::BadArity, "silhouette needs at least 2 labels");
  const auto defeaters = static_cast<std::size_t>(
      std::count(labels.begin(), labels.end(), Polarity::Defeater));
  if (defeaters == 0 || defeaters == n) {
    throw Error(ErrorKind::SingleCluster, "only one polarity present");
  }

  const DistanceMatrix d = distance_matrix(labels);
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t own = labels[i] == Polarity::Defeater ? defeaters : n - defeaters;
    if (own == 1) {
      s[i] = 1.0;
      continue;
    }
    std::size_t intra = 0;
    std::size_t inter = 0;
    for (std::size_t j = 0; j < n; ++j) {
      (labels[j] == labels[i] ? intra : inter) += d(i, j);
    }
    const double a = static_cast<double>(intra) / static_cast<double>(own - 1);
    const double b = static_cast<double>(inter) / static_cast<double>(n - own);
    // b >= 1: any path into the other group crosses at least one counted change.
    s[i] = (b - a) / std::max(a, b);
  }
  return s;
}

double igc(std::span<const Polarity> labels) {
  const auto s = silhouette(labels);
  return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

MetricBundle metric_bundle(const GenerationSequence& seq, const RankedPermutation& ranked) {
  const auto labels = ranked_labels(seq, ranked);
  MetricBundle b;
  b.tau_defeaters = tau_group(seq, ranked, Polarity::Defeater);
  b.tau_supporters = tau_group(seq, ranked, Polarity::Supporter);
  b.tau_all = tau_all(seq, ranked);
  b.cgp = cgp(labels);
  b.igc = igc(labels);
  return b;
}

MetricBundle metric_bundle(const Layout& layout, std::span<const std::size_t> order) {
  validate_permutation(order, layout.size());
  const auto labels = layout_labels(layout, order);

  std::vector<std::size_t> defeaters, supporters;
  for (std::size_t pos : order) {
    (pos <= layout.defeaters ? defeaters : supporters).push_back(pos);
  }
  const auto sorted = [](std::vector<std::size_t> v) {
    std::sort(v.begin(), v.end());
    return v;
  };

  MetricBundle b;
  if (defeaters.size() >= 2) b.tau_defeaters = kendall_tau(sorted(defeaters), defeaters);
  if (supporters.size() >= 2) b.tau_supporters = kendall_tau(sorted(supporters), supporters);
  std::vector<std::size_t> identity(order.size());
  std::iota(identity.begin(), identity.end(), std::size_t{1});
  b.tau_all = kendall_tau(identity, order);
  b.cgp = cgp(labels);
  b.igc = igc(labels);
  return b;
}

}  // namespace cec
