#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <random>

#include "cec/backends.hpp"
#include "cec/dataset.hpp"
#include "cec/errors.hpp"
#include "cec/metrics.hpp"
#include "cec/pipeline.hpp"
#include "cec/probscore.hpp"
#include "oracles.hpp"

using namespace cec;
using json = nlohmann::json;

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

const std::vector<std::string> kWords = {"rain", "river", "bank", "wall", "storm", "heavy", "small", "water",
                                         "town", "road",  "field", "crop", "price", "slow",  "quick", "cold"};

std::string sentence(std::mt19937_64& rng, std::size_t words) {
  std::string s;
  for (std::size_t i = 0; i < words; ++i) {
    if (i) s += ' ';
    s += kWords[rng() % kWords.size()];
  }
  s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s + ".";
}

/// A 5+5 sequence of distinct random sentences.
GenerationSequence random_sequence(std::mt19937_64& rng) {
  auto seq = oracle::sequence(5, 5);
  for (std::size_t i = 0; i < seq.items.size(); ++i) {
    seq.items[i].text = sentence(rng, 2 + rng() % 5) + " " + std::to_string(i);
  }
  return seq;
}

}  // namespace

TEST(Templates, ExactPatternsAndCategories) {
  const std::vector<std::pair<Conjunction, std::string>> expected = {
      {Conjunction::So, "{cause}, so {effect}"},           {Conjunction::Because, "Because {cause}, {effect}"},
      {Conjunction::Since, "Since {cause}, {effect}"},     {Conjunction::As, "As {cause}, {effect}"},
      {Conjunction::Therefore, "{cause}; therefore, {effect}"}, {Conjunction::Thus, "{cause}; thus, {effect}"},
      {Conjunction::Hence, "{cause}; hence, {effect}"}};
  for (const auto& [word, pattern] : expected) EXPECT_EQ(conjunction_template(word).pattern, pattern);
  EXPECT_EQ(conjunction_template(Conjunction::So).category, ConjunctionCategory::Coordinating);
  EXPECT_EQ(conjunction_template(Conjunction::As).category, ConjunctionCategory::Subordinating);
  EXPECT_EQ(conjunction_template(Conjunction::Hence).category, ConjunctionCategory::ConjunctiveAdverb);
}

TEST(Templates, Render) {
  auto r = render_template(conjunction_template(Conjunction::So), "C", "E");
  EXPECT_EQ(r.context, "C, so");
  EXPECT_EQ(r.continuation, "E");
  r = render_template(conjunction_template(Conjunction::Because), "C", "E");
  EXPECT_EQ(r.context, "Because C,");
  r = render_template(conjunction_template(Conjunction::Therefore), "C", "E");
  EXPECT_EQ(r.context, "C; therefore,");
  EXPECT_EQ(r.continuation, "E");
}

TEST(Conjunctions, ParseNames) {
  for (auto c : kAllConjunctions) EXPECT_EQ(parse_conjunction(to_string(c)), c);
  EXPECT_EQ(parse_conjunction("Because"), Conjunction::Because);
  EXPECT_EQ(kind_of([] { parse_conjunction("for"); }), ErrorKind::InapplicableConjunction);
  EXPECT_EQ(kind_of([] { parse_conjunction("and"); }), ErrorKind::UnknownName);
  EXPECT_EQ(parse_score_kind("pmi-dc"), ScoreKind::PmiDomainConditional);
  EXPECT_EQ(parse_score_kind("avg-prob"), ScoreKind::AvgConditionalProb);
  EXPECT_EQ(kind_of([] { parse_score_kind("bogus"); }), ErrorKind::UnknownName);
}

TEST(CombineEvents, Examples) {
  EXPECT_EQ(combine_events("John leaves.", "He hates the platform."), "John leaves. He hates the platform");
  EXPECT_EQ(combine_events("John leaves", "He hates the platform"), "John leaves. He hates the platform");
}

TEST(CombineEvents, StrippingIsIdempotent) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 500; ++i) {
    const auto cause = sentence(rng, 3), inter = sentence(rng, 4);
    const auto once = combine_events(cause, inter);
    EXPECT_EQ(combine_events(cause + "..", inter + ".."), once);
    EXPECT_EQ(once.find(".."), std::string::npos);
  }
}

TEST(Scores, Arithmetic) {
  const std::vector<TokenLogprob> one = {{"a", -1.0}};
  const std::vector<TokenLogprob> two = {{"a", -1.0}, {"b", -2.0}};
  EXPECT_EQ(causal_strength(one), -1.0);
  EXPECT_EQ(causal_strength(two), -3.0);
  EXPECT_NEAR(avg_conditional_prob(std::vector<TokenLogprob>{{"a", std::log(0.5)}}), 0.5, 1e-12);
  EXPECT_NEAR(avg_conditional_prob(std::vector<TokenLogprob>{{"a", std::log(0.2)}, {"b", std::log(0.4)}}), 0.3, 1e-12);
  EXPECT_EQ(pmi_dc(two, two).value, 0.0);
  const std::vector<TokenLogprob> domain = {{"a", -4.0}, {"b", -1.0}};
  EXPECT_EQ(pmi_dc(two, domain).value, 2.0);
  EXPECT_FALSE(pmi_dc(two, domain).length_mismatch);
  EXPECT_TRUE(pmi_dc(two, one).length_mismatch);
  EXPECT_EQ(kind_of([] { causal_strength({}); }), ErrorKind::EmptyScore);
  EXPECT_EQ(kind_of([] { avg_conditional_prob({}); }), ErrorKind::EmptyScore);
}

TEST(Scores, LogAdditivityUnderTokenSplit) {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double p1 = u(rng), p2 = u(rng);
    const std::vector<TokenLogprob> joined = {{"x", -0.3}, {"ab", std::log(p1 * p2)}};
    const std::vector<TokenLogprob> split = {{"x", -0.3}, {"a", std::log(p1)}, {"b", std::log(p2)}};
    ASSERT_NEAR(causal_strength(joined), causal_strength(split), 1e-12);
  }
}

TEST(RankByScore, OrderingAndTies) {
  const auto seq = oracle::sequence(5, 5);
  std::vector<double> up(10), down(10);
  for (std::size_t i = 0; i < 10; ++i) {
    up[i] = static_cast<double>(i);
    down[i] = -static_cast<double>(i);
  }
  const auto identity = rank_by_score(seq, up);
  EXPECT_EQ(identity.order, ideal_permutation(5, 5).order);
  EXPECT_EQ(metric_bundle(seq, identity).igc, 1.0);
  EXPECT_EQ(tau_all(seq, rank_by_score(seq, down)), -1.0);

  std::vector<double> tied = {0, 1, 2, 5, 6, 7, 5, 8, 9, 10};
  const auto order = rank_by_score(seq, tied).order;
  const auto four = std::find(order.begin(), order.end(), 4u);
  const auto seven = std::find(order.begin(), order.end(), 7u);
  EXPECT_LT(four, seven);

  tied[2] = std::nan("");
  EXPECT_EQ(kind_of([&] { rank_by_score(seq, tied); }), ErrorKind::NonFiniteScore);
  EXPECT_EQ(kind_of([&] { rank_by_score(seq, std::vector<double>{1, 2}); }), ErrorKind::BadArity);
}

TEST(Equivalence, PmiRankingEqualsCausalStrengthOnToyFixtures) {
  ToyBigramScorer toy;
  RunConfig config;
  config.model = "toy";
  config.domain_context = "In the valley";
  std::mt19937_64 rng(41);
  for (int fixture = 0; fixture < 1000; ++fixture) {
    const CauseEffectPair pair{"t" + std::to_string(fixture), sentence(rng, 4), sentence(rng, 3 + rng() % 4),
                               "s.", "d."};
    const auto seq = random_sequence(rng);
    const auto conj = kAllConjunctions[static_cast<std::size_t>(fixture) % kAllConjunctions.size()];
    const auto cs = run_prob_ranking(pair, seq, toy, conj, ScoreKind::CausalStrength, config);
    const auto pmi = run_prob_ranking(pair, seq, toy, conj, ScoreKind::PmiDomainConditional, config);
    ASSERT_EQ(cs.ranked.order, pmi.ranked.order) << pair.effect;
  }
}

TEST(Equivalence, SingleTokenEffectsAgreeAcrossAllKinds) {
  ToyBigramScorer toy;
  RunConfig config;
  config.model = "toy";
  std::mt19937_64 rng(43);
  for (int fixture = 0; fixture < 200; ++fixture) {
    const CauseEffectPair pair{"s" + std::to_string(fixture), sentence(rng, 4), kWords[rng() % kWords.size()],
                               "s.", "d."};
    const auto seq = random_sequence(rng);
    const auto conj = kAllConjunctions[static_cast<std::size_t>(fixture) % kAllConjunctions.size()];
    const auto cs = run_prob_ranking(pair, seq, toy, conj, ScoreKind::CausalStrength, config);
    const auto avg = run_prob_ranking(pair, seq, toy, conj, ScoreKind::AvgConditionalProb, config);
    const auto pmi = run_prob_ranking(pair, seq, toy, conj, ScoreKind::PmiDomainConditional, config);
    ASSERT_EQ(cs.ranked.order, avg.ranked.order);
    ASSERT_EQ(cs.ranked.order, pmi.ranked.order);
  }
}

TEST(Equivalence, CausalStrengthIsTheToySequenceLogProbability) {
  ToyBigramScorer toy;
  const CauseEffectPair pair{"x", "It rained.", "The river rose", "s.", "d."};
  auto seq = oracle::sequence(5, 5);
  RunConfig config;
  config.model = "toy";
  const auto out = run_prob_ranking(pair, seq, toy, Conjunction::So, ScoreKind::CausalStrength, config);
  for (std::size_t i = 0; i < seq.items.size(); ++i) {
    const auto r = render_template(conjunction_template(Conjunction::So),
                                   combine_events(pair.cause, seq.items[i].text), pair.effect);
    EXPECT_DOUBLE_EQ(out.scores[i], causal_strength(toy.score_continuation(r.context, r.continuation, "toy")));
  }
}

TEST(Golden, ToyScorerRankingsOverReplayFixtures) {
  std::ifstream in(oracle::fixtures_dir() + "/toy_golden.json");
  const auto golden = json::parse(in);
  const auto pairs = load_dataset(oracle::fixtures_dir() + "/e2e/dataset.jsonl");
  RunConfig config;
  config.model = "fixture-model";
  config.seed = 7;
  ReplayBackend replay(CacheStore::open_readonly(oracle::fixtures_dir() + "/e2e/replay"));
  const auto sequences = generate_all(pairs, replay, config);
  ToyBigramScorer toy;
  ASSERT_EQ(golden["rankings"].size(), pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto out =
        run_prob_ranking(pairs[i], *sequences[i].sequence, toy, Conjunction::So, ScoreKind::CausalStrength, config);
    EXPECT_EQ(out.ranked.order, golden["rankings"][pairs[i].id].get<std::vector<std::size_t>>()) << pairs[i].id;
    // The replayed records give the same ranking as the live toy scorer.
    const auto replayed = run_prob_ranking(pairs[i], *sequences[i].sequence, replay, Conjunction::So,
                                           ScoreKind::CausalStrength, config);
    EXPECT_EQ(replayed.ranked, out.ranked);
  }
}
