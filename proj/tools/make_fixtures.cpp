// Regenerates tests/fixtures: the 10-pair replay set, the worked-example
// score fixture and the toy-scorer golden rankings.
//
//   make_fixtures <fixtures-dir>

#include <fmt/format.h>

#include <array>
#include <iostream>
#include <json.hpp>
#include <map>
#include <mutex>

#include "cec/backends.hpp"
#include "cec/dataset.hpp"
#include "cec/extraction.hpp"
#include "cec/pipeline.hpp"
#include "cec/records.hpp"

namespace fs = std::filesystem;
using namespace cec;

namespace {

constexpr std::string_view kModel = "fixture-model";
constexpr std::uint64_t kSeed = 7;
constexpr std::string_view kStamp = "1970-01-01T00:00:00Z";

struct Topic {
  CauseEffectPair pair;
  std::string subject;
};

std::vector<Topic> topics() {
  return {
      {{"p01", "Heavy rain fell on the valley all night", "The river burst its banks by morning",
        "The ground was already saturated from a wet week.", "A new flood wall had just been finished upstream."},
       "the flooding"},
      {{"p02", "Maria studied every evening for a month", "She passed the final exam with a high mark",
        "Regular study is known to improve exam results.", "The exam covered topics that were never taught."},
       "the good result"},
      {{"p03", "The road froze overnight", "The school bus arrived late",
        "Drivers slow down a lot on icy roads.", "The council gritted the route before dawn."},
       "the delay"},
      {{"p04", "The harvest failed after a dry summer", "Bread prices rose in the autumn",
        "Flour is the main cost in making bread.", "The government released large grain reserves."},
       "the price rise"},
      {{"p05", "Tom forgot to water his tomato plants", "The plants wilted within a week",
        "Tomato plants need water every day in summer.", "It rained heavily for most of that week."},
       "the wilting"},
      {{"p06", "The factory in town closed down", "Many local families lost their main income",
        "The factory was the largest employer in the area.", "A new plant opened nearby and hired everyone."},
       "the income loss"},
      {{"p07", "John left the democratic party", "Months later he joined the republican party",
        "Leaving one party often signals a move to another.", "John announced he would stay independent."},
       "the party switch"},
      {{"p08", "The phone battery was fully drained", "The phone would not turn on",
        "A phone cannot boot without any charge.", "The phone was plugged into a charger."},
       "the phone failing"},
      {{"p09", "Anna trained for the marathon for a year", "She finished the race in under four hours",
        "Long training builds the endurance needed.", "Anna sprained her ankle a week before the race."},
       "the fast finish"},
      {{"p10", "A storm knocked down the power lines", "The village lost electricity for two days",
        "Repairs to rural lines usually take a long time.", "The village has its own backup generator."},
       "the blackout"},
  };
}

std::array<std::string, 2> generated(const Topic& t, Polarity type, Strength strength) {
  const std::string& s = t.subject;
  if (type == Polarity::Defeater && strength == Strength::Weaker) {
    return {fmt::format("A minor detail slightly complicates {}.", s),
            fmt::format("A trivial detail barely complicates {}.", s)};
  }
  if (type == Polarity::Defeater) {
    return {fmt::format("A serious obstacle largely prevents {}.", s),
            fmt::format("An insurmountable obstacle completely prevents {}.", s)};
  }
  if (strength == Strength::Weaker) {
    return {fmt::format("Some evidence loosely favors {}.", s), fmt::format("A faint hint vaguely favors {}.", s)};
  }
  return {fmt::format("Strong evidence directly favors {}.", s),
          fmt::format("Overwhelming evidence guarantees {}.", s)};
}

std::string format_generation(const std::array<std::string, 2>& g, std::size_t style, Polarity type,
                              Strength strength) {
  const auto& [a, b] = g;
  switch (style % 6) {
    case 0: return fmt::format("{}\n{}", a, b);
    case 1: return fmt::format("1. {}\n2. {}", a, b);
    case 2:
      return fmt::format("Sure, here are two {} {}s:\n\n1. {}\n2. {}", to_string(strength), to_string(type), a, b);
    case 3: return fmt::format("- {}\n- {}", a, b);
    case 4: return fmt::format("\"{}\"\n\"{}\"", a, b);
    default: return fmt::format("Here are the arguments:\n{}\n\n{}\n", a, b);
  }
}

std::string format_ranking(const std::vector<std::size_t>& local, std::size_t style) {
  switch (style % 5) {
    case 0: return fmt::format("{}", fmt::join(local, " "));
    case 1: return fmt::format("{}", fmt::join(local, ", "));
    case 2: return fmt::format("Ranking: [{}]", fmt::join(local, ", "));
    case 3: return fmt::format("{}", fmt::join(local, "\n"));
    default:
      return fmt::format("Here is the ranking:\n{}\nThis ordering places the defeaters first.", fmt::join(local, " "));
  }
}

CacheRecord record(std::string_view pair_id, std::string_view phase, std::string_view prompt, std::string payload) {
  CacheRecord r = make_record(kModel, pair_id, phase, prompt, std::move(payload));
  r.created_at = std::string(kStamp);
  return r;
}

std::string lines(const std::vector<CacheRecord>& records) {
  std::string out;
  for (const auto& r : records) out += record_to_line(r) + "\n";
  return out;
}

/// Toy scorer that remembers every call as a replay record.
class RecordingScorer final : public Backend {
 public:
  std::string complete(const ChatRequest&) override { return inner_.complete({}); }
  std::vector<TokenLogprob> score_continuation(std::string_view context, std::string_view continuation,
                                               std::string_view model) override {
    auto lp = inner_.score_continuation(context, continuation, model);
    CacheRecord r = make_record(model, "", kScorePhase, scoring_prompt(context, continuation), encode_logprobs(lp));
    r.created_at = std::string(kStamp);
    std::lock_guard lock(mutex_);
    records_.emplace(r.key, r);
    return lp;
  }
  std::vector<CacheRecord> records() const {
    std::vector<CacheRecord> out;
    for (const auto& [k, r] : records_) out.push_back(r);
    return out;
  }

 private:
  ToyBigramScorer inner_;
  std::mutex mutex_;
  std::map<std::string, CacheRecord> records_;
};

void write_e2e(const fs::path& dir) {
  const auto all = topics();
  std::vector<CauseEffectPair> pairs;
  for (const auto& t : all) pairs.push_back(t.pair);
  write_text_file(dir / "dataset.jsonl", dataset_to_jsonl(pairs));

  std::vector<CacheRecord> gen;
  const std::array<std::pair<Polarity, Strength>, 4> prompts = {{{Polarity::Defeater, Strength::Weaker},
                                                                 {Polarity::Defeater, Strength::Stronger},
                                                                 {Polarity::Supporter, Strength::Weaker},
                                                                 {Polarity::Supporter, Strength::Stronger}}};
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto& t = all[i];
    const std::size_t words = word_hint(t.pair);
    for (std::size_t j = 0; j < prompts.size(); ++j) {
      const auto [type, strength] = prompts[j];
      const auto prompt = generation_prompt(t.pair, type, strength, words);
      const auto texts = generated(t, type, strength);
      std::size_t attempt = 1;
      // One pair needs a retry: its first reply has an extra line.
      if (t.pair.id == "p03" && j == 0) {
        gen.push_back(record(t.pair.id, generation_phase(type, strength, attempt++), prompt,
                             fmt::format("1. {}\n2. {}\n3. Both are minor.", texts[0], texts[1])));
      }
      gen.push_back(record(t.pair.id, generation_phase(type, strength, attempt), prompt,
                           format_generation(texts, i + j, type, strength)));
    }
  }
  write_text_file(dir / "replay" / "generate.jsonl", lines(gen));

  RunConfig config;
  config.seed = kSeed;
  config.model = std::string(kModel);
  config.workers = 1;
  auto store = CacheStore::in_memory();
  for (const auto& r : gen) store->append(r);
  ReplayBackend replay(store);
  const auto sequences = generate_all(pairs, replay, config);

  std::vector<CacheRecord> rank;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& seq = *sequences[i].sequence;
    const auto presentation = presentation_for(pairs[i].id, seq.items.size(), config);
    // Identity ranking: presented index of generation position 1, 2, ...
    std::vector<std::size_t> local(seq.items.size());
    for (std::size_t p = 0; p < presentation.shuffled_indices.size(); ++p) {
      local[presentation.shuffled_indices[p] - 1] = p + 1;
    }
    rank.push_back(record(pairs[i].id, kRankPhase, ranking_prompt(pairs[i], seq, presentation),
                          format_ranking(local, i)));
  }
  write_text_file(dir / "replay" / "rank.jsonl", lines(rank));

  RecordingScorer scorer;
  nlohmann::ordered_json golden;
  golden["conjunction"] = "so";
  golden["score_kind"] = "causal-strength";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto out =
        run_prob_ranking(pairs[i], *sequences[i].sequence, scorer, Conjunction::So, ScoreKind::CausalStrength, config);
    golden["rankings"][pairs[i].id] = out.ranked.order;
  }
  write_text_file(dir / "replay" / "score.jsonl", lines(scorer.records()));
  write_text_file(dir.parent_path() / "toy_golden.json", golden.dump(2) + "\n");
}

void write_worked_example(const fs::path& dir) {
  PairResult seq;
  seq.pair_id = "worked-example";
  GenerationSequence s;
  s.pair_id = seq.pair_id;
  const Layout layout{5, 5};
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const int slot = slot_for_index(layout, i);
    s.items.push_back({fmt::format("Argument with intensity {}.", slot), polarity_for_index(layout, i), slot});
  }
  seq.sequence = s;
  write_text_file(dir / "sequences.jsonl", results_to_jsonl({seq}));

  // Ranked labels: D D S D D S S S D S.
  PairResult ranked = seq;
  ranked.ranked = RankedPermutation{seq.pair_id, {1, 2, 6, 3, 4, 7, 8, 9, 5, 10}};
  write_text_file(dir / "rankings.jsonl", results_to_jsonl({ranked}));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <fixtures-dir>\n";
    return 2;
  }
  try {
    const fs::path root = argv[1];
    write_e2e(root / "e2e");
    write_worked_example(root / "worked_example");
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
