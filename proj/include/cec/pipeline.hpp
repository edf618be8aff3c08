#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "cec/backends.hpp"
#include "cec/core.hpp"
#include "cec/errors.hpp"
#include "cec/metrics.hpp"
#include "cec/probscore.hpp"

namespace cec {

struct RunConfig {
  /// Attempts per generation prompt when the reply cannot be parsed.
  std::size_t retries = 3;
  std::size_t workers = 4;
  /// Seeds the ranking-prompt presentation shuffle.
  std::uint64_t seed = 0;
  /// When false the arguments are shown in generation order.
  bool shuffle_presentation = true;
  std::string model;
  std::size_t max_tokens = 512;
  std::optional<double> temperature;
  /// Context for the PMI denominator.
  std::string domain_context;
};

enum class Strength { Weaker, Stronger };

std::string_view to_string(Strength s);

/// Word-length hint: the rounded mean word count of the two original
/// arguments.
std::size_t word_hint(const CauseEffectPair& pair);

std::string generation_prompt(const CauseEffectPair& pair, Polarity type, Strength strength,
                              std::size_t words);

/// Phase tag for a generation request; attempts after the first are tagged
/// "#n" so each retry is its own cache entry.
std::string generation_phase(Polarity type, Strength strength, std::size_t attempt);

inline constexpr std::string_view kRankPhase = "rank";

/// Issues the four generation prompts and assembles the 5+5 sequence. A reply
/// that cannot be parsed is retried up to `config.retries` attempts, after
/// which GenerationFailed is thrown. Backend errors propagate unchanged.
GenerationSequence run_generation(const CauseEffectPair& pair, Backend& backend, const RunConfig& config);

/// Presentation used for `pair_id` under `config`.
PresentationOrder presentation_for(std::string_view pair_id, std::size_t k, const RunConfig& config);

/// Ranking prompt listing the sequence's texts in presentation order.
std::string ranking_prompt(const CauseEffectPair& pair, const GenerationSequence& seq,
                           const PresentationOrder& presentation);

struct RankingOutcome {
  RankedPermutation ranked;
  PresentationOrder presentation;
  std::string reply;
};

/// Throws RankingFailed carrying the extraction log when no permutation can
/// be recovered.
RankingOutcome run_ranking(const CauseEffectPair& pair, const GenerationSequence& seq, Backend& backend,
                           const RunConfig& config);

struct ProbRankingOutcome {
  RankedPermutation ranked;
  std::vector<double> scores;
  std::vector<std::string> warnings;
};

/// Scores every intermediate with `backend.score_continuation` and ranks by
/// ascending score. Throws ScoringFailed naming the position on any failure.
ProbRankingOutcome run_prob_ranking(const CauseEffectPair& pair, const GenerationSequence& seq,
                                    Backend& backend, Conjunction conjunction, ScoreKind kind,
                                    const RunConfig& config);

struct RankingMode {
  enum class Kind { Prompt, Prob };
  Kind kind = Kind::Prompt;
  std::optional<Conjunction> conjunction;
  std::optional<ScoreKind> score_kind;

  bool operator==(const RankingMode&) const = default;
};

std::string describe(const RankingMode& mode);

struct Failure {
  ErrorKind kind = ErrorKind::BadInput;
  std::string phase;
  std::string message;

  bool operator==(const Failure&) const = default;
};

struct PairResult {
  std::string pair_id;
  std::optional<GenerationSequence> sequence;
  std::optional<PresentationOrder> presentation;
  std::optional<RankedPermutation> ranked;
  std::optional<MetricBundle> bundle;
  std::optional<Failure> failure;
  RankingMode mode;
  std::vector<std::string> warnings;

  bool scored() const { return bundle.has_value(); }
};

/// Attaches the metric bundle when a ranking is present and nothing failed.
/// A bundle that cannot be computed becomes a failure.
PairResult evaluate_pair(PairResult result);

/// Runs `fn(i)` for i in [0, count) on up to `workers` threads. Results keep
/// index order. The first exception is rethrown after every worker stops.
template <typename T>
std::vector<T> parallel_map(std::size_t count, std::size_t workers, const std::function<T(std::size_t)>& fn) {
  std::vector<std::optional<T>> slots(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        slots[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next = count;
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(workers, count));
  if (n == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  std::vector<T> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// Phase (i) over a dataset. Failures are recorded per pair.
std::vector<PairResult> generate_all(std::span<const CauseEffectPair> pairs, Backend& backend,
                                     const RunConfig& config);

/// Phase (ii), prompting mode, over results from phase (i). Pairs already
/// failed pass through unchanged. `pairs` is looked up by id.
std::vector<PairResult> rank_all(std::span<const CauseEffectPair> pairs, std::vector<PairResult> results,
                                 Backend& backend, const RunConfig& config);

/// Phase (ii), probability mode.
std::vector<PairResult> prob_rank_all(std::span<const CauseEffectPair> pairs, std::vector<PairResult> results,
                                      Backend& backend, Conjunction conjunction, ScoreKind kind,
                                      const RunConfig& config);

/// Phase (iii) over every result.
std::vector<PairResult> evaluate_all(std::vector<PairResult> results);

struct MetricStat {
  double mean = 0.0;
  /// Sample (n-1) standard deviation; 0 for a single value.
  double sd = 0.0;
  std::size_t count = 0;

  bool operator==(const MetricStat&) const = default;
};

struct AggregateReport {
  std::string model;
  MetricStat tau_supporters;
  MetricStat tau_defeaters;
  MetricStat tau_all;
  MetricStat cgp;
  MetricStat igc;
  std::size_t scored = 0;
  std::size_t failed = 0;
  /// Failure counts keyed by error kind name.
  std::map<std::string, std::size_t> failures;
  /// Seeds, mode, dataset digest and similar.
  std::map<std::string, std::string> metadata;

  bool operator==(const AggregateReport&) const = default;
};

/// Streaming mean and sample standard deviation per metric.
class MetricAccumulator {
 public:
  void add(const MetricBundle& bundle);
  std::size_t count() const { return n_; }
  AggregateReport finish() const;

 private:
  struct Running {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    void add(double x);
    MetricStat stat() const;
  };
  std::size_t n_ = 0;
  Running tau_supporters_, tau_defeaters_, tau_all_, cgp_, igc_;
};

/// Throws NothingScored when no result carries a bundle.
AggregateReport aggregate(std::span<const PairResult> results);

struct ConfusionMatrix {
  Layout layout;
  /// counts[i][j]: generation position i+1 ranked at position j+1.
  std::vector<std::vector<std::size_t>> counts;
  /// Row-normalized percentages.
  std::vector<std::vector<double>> percentages;
};

/// Throws NothingScored when no result carries a ranking and a bundle, and
/// BadArity when scored results disagree on the layout.
ConfusionMatrix confusion_matrix(std::span<const PairResult> results);

/// Metrics over `samples` uniformly random rankings of a fixed layout.
/// Deterministic in `seed`. Throws BadInput when samples is 0.
AggregateReport random_baseline(std::size_t samples, std::uint64_t seed, Layout layout = {});

}  // namespace cec
