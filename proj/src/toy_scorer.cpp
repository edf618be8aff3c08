#include <array>
#include <cmath>
#include <unordered_map>

#include "cec/backends.hpp"
#include "cec/errors.hpp"
#include "cec/text.hpp"

namespace cec {
namespace {

constexpr std::string_view kCorpus =
    "the rain fell all night so the river rose and the fields flooded. "
    "she studied every evening because the exam was hard, and she passed it. "
    "the road was icy, therefore the bus arrived late and the children missed class. "
    "prices went up since the harvest was poor, thus families bought less bread. "
    "he forgot to water the plants, hence they wilted in the summer heat. "
    "the team trained hard as the final was near, so they won the cup. "
    "smoking damages the lungs and raises the risk of cancer. "
    "exercise strengthens the heart, which lowers the chance of illness. "
    "a strong wind broke the branch and it fell on the car. "
    "the battery was dead so the phone would not turn on. "
    "people who sleep well tend to think more clearly at work. "
    "the factory closed, so many workers lost their jobs in the town. ";

struct BigramTable {
  std::array<std::array<std::uint32_t, 256>, 256> counts{};
  std::array<std::uint32_t, 256> totals{};

  void add(std::string_view s) {
    for (std::size_t i = 1; i < s.size(); ++i) {
      const auto p = static_cast<unsigned char>(s[i - 1]);
      const auto c = static_cast<unsigned char>(s[i]);
      ++counts[p][c];
      ++totals[p];
    }
  }
};

const BigramTable& base_table() {
  static const BigramTable table = [] {
    BigramTable t;
    t.add(kCorpus);
    return t;
  }();
  return table;
}

}  // namespace

ToyBigramScorer::ToyBigramScorer(double smoothing) : smoothing_(smoothing) {
  if (!(smoothing > 0.0) || !std::isfinite(smoothing)) {
    throw Error(ErrorKind::BadInput, "smoothing must be positive");
  }
}

std::string ToyBigramScorer::complete(const ChatRequest&) {
  throw Error(ErrorKind::UnsupportedOperation, "the bigram scorer cannot generate text");
}

std::vector<TokenLogprob> ToyBigramScorer::score_continuation(std::string_view context,
                                                              std::string_view continuation,
                                                              std::string_view) {
  if (text::trim(continuation).empty()) throw Error(ErrorKind::BadInput, "empty continuation");
  const std::string ctx = text::to_lower(text::trim(context));

  std::unordered_map<std::uint16_t, std::uint32_t> local;
  std::array<std::uint32_t, 256> local_totals{};
  for (std::size_t i = 1; i < ctx.size(); ++i) {
    const auto p = static_cast<unsigned char>(ctx[i - 1]);
    const auto c = static_cast<unsigned char>(ctx[i]);
    ++local[static_cast<std::uint16_t>(p << 8 | c)];
    ++local_totals[p];
  }

  const BigramTable& base = base_table();
  const auto logp = [&](unsigned char p, unsigned char c) {
    const auto it = local.find(static_cast<std::uint16_t>(p << 8 | c));
    const double hits = base.counts[p][c] + (it == local.end() ? 0 : it->second);
    const double total = base.totals[p] + local_totals[p];
    return std::log((hits + smoothing_) / (total + 256.0 * smoothing_));
  };

  std::vector<TokenLogprob> out;
  unsigned char prev = ctx.empty() ? 0 : static_cast<unsigned char>(ctx.back());
  for (auto word : text::split_words(continuation)) {
    std::string token = (ctx.empty() && out.empty()) ? std::string(word) : " " + std::string(word);
    double sum = 0.0;
    for (char raw : text::to_lower(token)) {
      const auto c = static_cast<unsigned char>(raw);
      sum += logp(prev, c);
      prev = c;
    }
    out.push_back({std::move(token), sum});
  }
  return out;
}

}  // namespace cec
