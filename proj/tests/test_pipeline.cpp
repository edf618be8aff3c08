#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cec/backends.hpp"
#include "cec/dataset.hpp"
#include "cec/errors.hpp"
#include "cec/pipeline.hpp"
#include "cec/text.hpp"
#include "oracles.hpp"

using namespace cec;

namespace {

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::BadInput;
}

std::vector<CauseEffectPair> fixture_pairs() { return load_dataset(oracle::fixtures_dir() + "/e2e/dataset.jsonl"); }

std::shared_ptr<CacheStore> fixture_store() { return CacheStore::open_readonly(oracle::fixtures_dir() + "/e2e/replay"); }

RunConfig fixture_config() {
  RunConfig c;
  c.model = "fixture-model";
  c.seed = 7;
  return c;
}

/// Reads the numbered listing of a ranking prompt built from
/// oracle::sequence texts ("argument <slot>") and answers with the presented
/// indices ordered by descending slot.
class ReversingRanker final : public Backend {
 public:
  std::string complete(const ChatRequest& request) override {
    std::vector<std::pair<int, std::size_t>> listed;
    for (auto line : text::split_lines(request.prompt)) {
      const auto dot = line.find(". argument ");
      if (dot == std::string_view::npos) continue;
      const auto presented = std::stoul(std::string(line.substr(0, dot)));
      const int slot = std::stoi(std::string(line.substr(dot + 11)));
      listed.emplace_back(slot, presented);
    }
    std::sort(listed.rbegin(), listed.rend());
    std::string out = "Here you go:\n";
    for (const auto& [slot, presented] : listed) out += std::to_string(presented) + " ";
    return out;
  }
};

PairResult with_bundle(const std::string& id, const std::vector<std::size_t>& order) {
  PairResult r;
  r.pair_id = id;
  r.sequence = oracle::sequence(5, 5, id);
  r.ranked = RankedPermutation{id, order};
  return evaluate_pair(r);
}

}  // namespace

TEST(Prompts, GenerationShape) {
  const CauseEffectPair pair{"p", "It rained ", "The match was cancelled", "The pitch was flooded by noon.",
                             "The roof was closed."};
  EXPECT_EQ(word_hint(pair), 5u);
  const auto prompt = generation_prompt(pair, Polarity::Supporter, Strength::Weaker, word_hint(pair));
  EXPECT_NE(prompt.find("Generate two supporters"), std::string::npos);
  EXPECT_NE(prompt.find("'It rained' leads to 'The match was cancelled'"), std::string::npos);
  EXPECT_NE(prompt.find("should be weaker than the original supporter"), std::string::npos);
  EXPECT_NE(prompt.find("around 5 words"), std::string::npos);
  EXPECT_NE(prompt.find("'The pitch was flooded by noon.'"), std::string::npos);
  EXPECT_EQ(generation_phase(Polarity::Defeater, Strength::Stronger, 1), "generate:stronger_defeater");
  EXPECT_EQ(generation_phase(Polarity::Defeater, Strength::Stronger, 2), "generate:stronger_defeater#2");
}

TEST(Prompts, RankingListsPresentationOrder) {
  const CauseEffectPair pair{"p", "C", "E", "s", "d"};
  const auto seq = oracle::sequence(5, 5);
  const auto presentation = make_presentation("p", 10, 3);
  const auto prompt = ranking_prompt(pair, seq, presentation);
  EXPECT_NE(prompt.find("ten arguments"), std::string::npos);
  EXPECT_NE(prompt.find("five supporting arguments and five defeating arguments"), std::string::npos);
  for (std::size_t p = 0; p < 10; ++p) {
    const auto line = std::to_string(p + 1) + ". " + seq.items[presentation.shuffled_indices[p] - 1].text;
    EXPECT_NE(prompt.find(line), std::string::npos) << line;
  }
  RunConfig c;
  c.shuffle_presentation = false;
  EXPECT_EQ(presentation_for("p", 10, c).shuffled_indices, identity_presentation("p", 10).shuffled_indices);
}

TEST(Generation, ReplayWithRetry) {
  const auto pairs = fixture_pairs();
  ReplayBackend replay(fixture_store());
  const auto p03 = std::find_if(pairs.begin(), pairs.end(), [](const auto& p) { return p.id == "p03"; });
  auto config = fixture_config();
  const auto seq = run_generation(*p03, replay, config);
  EXPECT_NO_THROW(validate_sequence(seq, Layout{5, 5}));
  EXPECT_EQ(seq.items[2].text, p03->original_defeater);
  EXPECT_EQ(seq.items[7].text, p03->original_supporter);

  config.retries = 1;
  EXPECT_EQ(kind_of([&] { run_generation(*p03, replay, config); }), ErrorKind::GenerationFailed);
}

TEST(Generation, AllFixturePairsAndFailuresRecorded) {
  const auto pairs = fixture_pairs();
  ReplayBackend replay(fixture_store());
  auto config = fixture_config();
  auto results = generate_all(pairs, replay, config);
  ASSERT_EQ(results.size(), 10u);
  for (const auto& r : results) EXPECT_TRUE(r.sequence.has_value()) << r.pair_id;

  config.model = "unknown-model";
  results = generate_all(pairs, replay, config);
  for (const auto& r : results) {
    ASSERT_TRUE(r.failure.has_value());
    EXPECT_EQ(r.failure->kind, ErrorKind::ReplayMiss);
  }
}

TEST(Ranking, PresentationIsComposedBackToGenerationOrder) {
  ReversingRanker ranker;
  const CauseEffectPair pair{"p", "C", "E", "s", "d"};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RunConfig config;
    config.seed = seed;
    const auto out = run_ranking(pair, oracle::sequence(5, 5), ranker, config);
    EXPECT_EQ(out.ranked.order, (std::vector<std::size_t>{10, 9, 8, 7, 6, 5, 4, 3, 2, 1}));
  }
}

TEST(Ranking, UnparseableReplyFails) {
  auto store = CacheStore::in_memory();
  const CauseEffectPair pair{"p", "C", "E", "s", "d"};
  const auto seq = oracle::sequence(5, 5);
  RunConfig config;
  config.model = "m";
  store->append(make_record("m", "p", kRankPhase, ranking_prompt(pair, seq, presentation_for("p", 10, config)),
                            "I refuse."));
  ReplayBackend replay(store);
  EXPECT_EQ(kind_of([&] { run_ranking(pair, seq, replay, config); }), ErrorKind::RankingFailed);
}

TEST(Ranking, FixtureReplayGivesIdentity) {
  const auto pairs = fixture_pairs();
  ReplayBackend replay(fixture_store());
  const auto config = fixture_config();
  auto results = evaluate_all(rank_all(pairs, generate_all(pairs, replay, config), replay, config));
  for (const auto& r : results) {
    ASSERT_TRUE(r.scored()) << r.pair_id;
    EXPECT_EQ(r.ranked->order, ideal_permutation(5, 5).order);
  }
}

TEST(ParallelMap, KeepsOrderAndRethrows) {
  const auto out = parallel_map<int>(100, 8, [](std::size_t i) { return static_cast<int>(i * i); });
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], static_cast<int>(i * i));
  EXPECT_THROW(parallel_map<int>(10, 4,
                                 [](std::size_t i) -> int {
                                   if (i == 5) throw Error(ErrorKind::BadInput, "boom");
                                   return 0;
                                 }),
               Error);
}

TEST(Aggregate, TwoPointSampleSd) {
  std::vector<PairResult> results = {with_bundle("a", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}),
                                     with_bundle("b", {10, 9, 8, 7, 6, 5, 4, 3, 2, 1})};
  PairResult failed;
  failed.pair_id = "c";
  failed.failure = Failure{ErrorKind::ReplayMiss, "rank", "none"};
  results.push_back(failed);
  const auto report = aggregate(results);
  EXPECT_EQ(report.scored, 2u);
  EXPECT_EQ(report.failed, 1u);
  EXPECT_EQ(report.failures.at("ReplayMiss"), 1u);
  EXPECT_DOUBLE_EQ(report.tau_all.mean, 0.0);
  EXPECT_NEAR(report.tau_all.sd, std::sqrt(2.0), 1e-12);
  EXPECT_DOUBLE_EQ(report.cgp.mean, 0.5);
  EXPECT_NEAR(report.cgp.sd, std::sqrt(0.5), 1e-12);
  EXPECT_EQ(kind_of([&] { aggregate(std::vector<PairResult>{failed}); }), ErrorKind::NothingScored);
}

TEST(Aggregate, AccumulatorMatchesTwoPassOnRandomData) {
  std::mt19937_64 rng(47);
  MetricAccumulator acc;
  std::vector<double> values;
  for (int i = 0; i < 500; ++i) {
    const auto order = oracle::random_permutation(10, rng);
    const auto b = metric_bundle(Layout{5, 5}, order);
    acc.add(b);
    values.push_back(b.igc);
  }
  double mean = 0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const auto report = acc.finish();
  EXPECT_NEAR(report.igc.mean, mean, 1e-12);
  EXPECT_NEAR(report.igc.sd, std::sqrt(ss / static_cast<double>(values.size() - 1)), 1e-12);
  EXPECT_EQ(report.igc.count, 500u);
}

TEST(Confusion, IdentityReversedAndUniform) {
  const auto identity = confusion_matrix(std::vector<PairResult>{with_bundle("a", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10})});
  const auto reversed = confusion_matrix(std::vector<PairResult>{with_bundle("a", {10, 9, 8, 7, 6, 5, 4, 3, 2, 1})});
  std::vector<PairResult> shifts;
  for (std::size_t s = 0; s < 10; ++s) {
    std::vector<std::size_t> order(10);
    for (std::size_t i = 0; i < 10; ++i) order[i] = (i + s) % 10 + 1;
    shifts.push_back(with_bundle("s" + std::to_string(s), order));
  }
  const auto uniform = confusion_matrix(shifts);
  for (std::size_t i = 0; i < 10; ++i) {
    for (std::size_t j = 0; j < 10; ++j) {
      EXPECT_EQ(identity.percentages[i][j], i == j ? 100.0 : 0.0);
      EXPECT_EQ(reversed.percentages[i][j], i + j == 9 ? 100.0 : 0.0);
      EXPECT_DOUBLE_EQ(uniform.percentages[i][j], 10.0);
    }
  }
  EXPECT_EQ(kind_of([] { confusion_matrix(std::vector<PairResult>{}); }), ErrorKind::NothingScored);
}

TEST(Confusion, MixedLayoutsRejected) {
  PairResult small;
  small.pair_id = "x";
  small.sequence = oracle::sequence(2, 2, "x");
  small.ranked = RankedPermutation{"x", {1, 2, 3, 4}};
  small = evaluate_pair(small);
  const std::vector<PairResult> mixed = {with_bundle("a", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}), small};
  EXPECT_EQ(kind_of([&] { confusion_matrix(mixed); }), ErrorKind::BadArity);
}

TEST(Baseline, DeterministicAndNearExpectations) {
  const auto a = random_baseline(20000, 7);
  EXPECT_EQ(a, random_baseline(20000, 7));
  EXPECT_NE(a.igc.mean, random_baseline(20000, 8).igc.mean);
  EXPECT_EQ(a.model, "Random");
  EXPECT_EQ(a.scored, 20000u);
  EXPECT_NEAR(a.tau_all.mean, 0.0, 0.01);
  EXPECT_NEAR(a.tau_supporters.mean, 0.0, 0.02);
  EXPECT_NEAR(a.tau_defeaters.mean, 0.0, 0.02);
  EXPECT_NEAR(a.cgp.mean, 0.5, 0.01);
  EXPECT_NEAR(a.igc.mean, oracle::exact_mean_igc(5, 5), 0.01);
  EXPECT_EQ(kind_of([] { random_baseline(0, 1); }), ErrorKind::BadInput);
}

TEST(Baseline, SmallLayoutMatchesExactEnumeration) {
  const auto report = random_baseline(50000, 3, Layout{3, 2});
  EXPECT_NEAR(report.igc.mean, oracle::exact_mean_igc(3, 2), 0.01);
  EXPECT_EQ(report.tau_supporters.count, 50000u);
}
