#pragma once

// Slow, obviously-correct reference implementations and random generators
// used by the unit and acceptance tests. Nothing here calls into the library's
// metric code.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "cec/core.hpp"

namespace oracle {

using cec::Polarity;

inline constexpr Polarity D = Polarity::Defeater;
inline constexpr Polarity S = Polarity::Supporter;

inline std::string fixtures_dir() { return CEC_FIXTURES_DIR; }

/// Position of `id` in `order`, by linear scan.
inline std::size_t position_of(const std::vector<std::size_t>& order, std::size_t id) {
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i] == id) return i;
  }
  return order.size();
}

/// Kendall tau by counting every pair.
inline double tau_pairs(const std::vector<std::size_t>& reference, const std::vector<std::size_t>& observed) {
  long concordant = 0, discordant = 0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    for (std::size_t j = i + 1; j < reference.size(); ++j) {
      const bool same = position_of(observed, reference[i]) < position_of(observed, reference[j]);
      (same ? concordant : discordant) += 1;
    }
  }
  const double total = static_cast<double>(reference.size() * (reference.size() - 1)) / 2.0;
  return static_cast<double>(concordant - discordant) / total;
}

/// CGP by checking every (supporter, defeater) pair.
inline double cgp_pairs(const std::vector<Polarity>& labels) {
  double supporters = 0, defeaters = 0, wrong = 0;
  for (std::size_t a = 0; a < labels.size(); ++a) {
    if (labels[a] == S) ++supporters;
    if (labels[a] == D) ++defeaters;
  }
  for (std::size_t a = 0; a < labels.size(); ++a) {
    for (std::size_t d = 0; d < labels.size(); ++d) {
      if (labels[a] == S && labels[d] == D && a < d) ++wrong;
    }
  }
  return 1.0 - wrong / (supporters * defeaters);
}

/// Polarity-change distance straight from its definition.
inline std::size_t distance(const std::vector<Polarity>& l, std::size_t i, std::size_t j) {
  if (i == j) return 0;
  if (i > j) std::swap(i, j);
  std::size_t d = 0;
  for (std::size_t k = i; k < j; ++k) {
    if (l[k] != l[k + 1] && l[k + 1] != l[i]) ++d;
  }
  return d;
}

inline std::vector<double> silhouettes(const std::vector<Polarity>& l) {
  const std::size_t n = l.size();
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    double intra = 0, inter = 0, own = 0, other = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (l[j] == l[i]) {
        own += 1;
        intra += static_cast<double>(distance(l, i, j));
      } else {
        other += 1;
        inter += static_cast<double>(distance(l, i, j));
      }
    }
    if (own == 1) {
      s[i] = 1.0;
      continue;
    }
    const double a = intra / (own - 1);
    const double b = inter / other;
    s[i] = (b - a) / std::max(a, b);
  }
  return s;
}

inline double igc(const std::vector<Polarity>& l) {
  const auto s = silhouettes(l);
  return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

/// Exact mean IGC over uniformly random rankings of an m+n layout: every
/// placement of the m defeater labels is equally likely.
inline double exact_mean_igc(std::size_t m, std::size_t n) {
  std::vector<Polarity> labels(m + n, S);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(m), D);
  std::sort(labels.begin(), labels.end());
  double sum = 0;
  std::size_t count = 0;
  do {
    sum += igc(labels);
    ++count;
  } while (std::next_permutation(labels.begin(), labels.end()));
  return sum / static_cast<double>(count);
}

/// Labels from a compact string: 'D' or 'S' per position.
inline std::vector<Polarity> labels(const std::string& pattern) {
  std::vector<Polarity> out;
  for (char c : pattern) out.push_back(c == 'D' ? D : S);
  return out;
}

/// Generation positions for a ranking written as slots (-5..-1, +1..+5).
inline std::vector<std::size_t> order_from_slots(const std::vector<int>& slots, std::size_t m = 5) {
  std::vector<std::size_t> out;
  for (int s : slots) {
    out.push_back(s < 0 ? static_cast<std::size_t>(static_cast<int>(m) + 1 + s)
                        : m + static_cast<std::size_t>(s));
  }
  return out;
}

inline cec::GenerationSequence sequence(std::size_t m, std::size_t n, const std::string& pair_id = "p") {
  cec::GenerationSequence seq;
  seq.pair_id = pair_id;
  const cec::Layout layout{m, n};
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const int slot = cec::slot_for_index(layout, i);
    seq.items.push_back({"argument " + std::to_string(slot), cec::polarity_for_index(layout, i), slot});
  }
  return seq;
}

inline std::vector<std::size_t> random_permutation(std::size_t k, std::mt19937_64& rng) {
  std::vector<std::size_t> v(k);
  std::iota(v.begin(), v.end(), std::size_t{1});
  for (std::size_t i = k; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(v[i - 1], v[pick(rng)]);
  }
  return v;
}

/// Random labels with both polarities present.
inline std::vector<Polarity> random_labels(std::size_t n, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  std::vector<Polarity> l(n);
  do {
    for (auto& p : l) p = coin(rng) ? S : D;
  } while (std::count(l.begin(), l.end(), D) == 0 || std::count(l.begin(), l.end(), S) == 0);
  return l;
}

inline std::vector<Polarity> swapped(std::vector<Polarity> l) {
  for (auto& p : l) p = p == D ? S : D;
  return l;
}

}  // namespace oracle
