#include "cec/pipeline.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include "cec/digest.hpp"
#include "cec/extraction.hpp"
#include "cec/text.hpp"

namespace cec {
namespace {

constexpr std::array<std::string_view, 21> kNumberWords = {
    "zero",  "one",   "two",    "three",    "four",     "five",    "six",
    "seven", "eight", "nine",   "ten",      "eleven",   "twelve",  "thirteen",
    "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen", "twenty"};

std::string number_word(std::size_t n) {
  return n < kNumberWords.size() ? std::string(kNumberWords[n]) : std::to_string(n);
}

std::string_view type_word(Polarity p) { return p == Polarity::Defeater ? "defeater" : "supporter"; }

std::string_view original_of(const CauseEffectPair& pair, Polarity p) {
  return p == Polarity::Defeater ? pair.original_defeater : pair.original_supporter;
}

Failure failure_from(const Error& e, std::string_view phase) {
  return {e.kind(), std::string(phase), e.what()};
}

const CauseEffectPair& find_pair(const std::unordered_map<std::string, const CauseEffectPair*>& index,
                                 const std::string& id) {
  auto it = index.find(id);
  if (it == index.end()) throw Error(ErrorKind::BadInput, fmt::format("pair '{}' is not in the dataset", id));
  return *it->second;
}

std::unordered_map<std::string, const CauseEffectPair*> index_pairs(std::span<const CauseEffectPair> pairs) {
  std::unordered_map<std::string, const CauseEffectPair*> index;
  for (const auto& p : pairs) index.emplace(p.id, &p);
  return index;
}

bool pending(const PairResult& r) { return !r.failure && r.sequence.has_value(); }

}  // namespace

std::string_view to_string(Strength s) { return s == Strength::Weaker ? "weaker" : "stronger"; }

std::size_t word_hint(const CauseEffectPair& pair) {
  const double mean =
      static_cast<double>(text::word_count(pair.original_supporter) + text::word_count(pair.original_defeater)) / 2.0;
  return static_cast<std::size_t>(std::lround(mean));
}

std::string generation_prompt(const CauseEffectPair& pair, Polarity type, Strength strength,
                              std::size_t words) {
  const auto t = type_word(type);
  const auto s = to_string(strength);
  return fmt::format(
      "Generate two {t}s for the cause-effect relationship in which '{cause}' leads to '{effect}', "
      "without explanations, additional commentary, index or quotation marks.\n\n"
      "The two generated {t}s vary in strength. More specifically, the first generated {t} should be {s} "
      "than the original {t}, while the second generated {t} should be {s} than the first {t}.\n\n"
      "Please ensure that the generated {t}s are around {words} words in length. In addition, the generated "
      "{s} {t}s should have similar style to the original {t}. The original {t} is: '{original}'. Make sure "
      "that there are no explanations or additional commentary for the output and that the generated "
      "arguments are separated by a new line character.",
      fmt::arg("t", t), fmt::arg("s", s), fmt::arg("cause", text::trim(pair.cause)),
      fmt::arg("effect", text::trim(pair.effect)), fmt::arg("words", words),
      fmt::arg("original", text::trim(original_of(pair, type))));
}

std::string generation_phase(Polarity type, Strength strength, std::size_t attempt) {
  std::string phase = fmt::format("generate:{}_{}", to_string(strength), type_word(type));
  if (attempt > 1) phase += fmt::format("#{}", attempt);
  return phase;
}

GenerationSequence run_generation(const CauseEffectPair& pair, Backend& backend, const RunConfig& config) {
  validate_pair(pair);
  const std::size_t words = word_hint(pair);
  const std::size_t attempts = std::max<std::size_t>(1, config.retries);

  const auto ask = [&](Polarity type, Strength strength) -> std::array<std::string, 2> {
    ChatRequest request;
    request.prompt = generation_prompt(pair, type, strength, words);
    request.max_tokens = config.max_tokens;
    request.temperature = config.temperature;
    request.model_name = config.model;
    request.pair_id = pair.id;
    std::size_t last_count = 0;
    for (std::size_t attempt = 1; attempt <= attempts; ++attempt) {
      request.phase = generation_phase(type, strength, attempt);
      try {
        auto parsed = parse_generated_pair(backend.complete(request));
        return {std::move(parsed.first), std::move(parsed.second)};
      } catch (const GenerationParseError& e) {
        last_count = e.found_count();
      }
    }
    throw Error(ErrorKind::GenerationFailed,
                fmt::format("pair '{}': {} {} reply unparseable after {} attempt(s) (last had {} candidate lines)",
                            pair.id, to_string(strength), type_word(type), attempts, last_count));
  };

  GeneratedIntermediates g;
  g.weaker_defeaters = ask(Polarity::Defeater, Strength::Weaker);
  g.stronger_defeaters = ask(Polarity::Defeater, Strength::Stronger);
  g.weaker_supporters = ask(Polarity::Supporter, Strength::Weaker);
  g.stronger_supporters = ask(Polarity::Supporter, Strength::Stronger);
  return assemble_sequence(pair, g);
}

PresentationOrder presentation_for(std::string_view pair_id, std::size_t k, const RunConfig& config) {
  return config.shuffle_presentation ? make_presentation(pair_id, k, config.seed)
                                     : identity_presentation(pair_id, k);
}

std::string ranking_prompt(const CauseEffectPair& pair, const GenerationSequence& seq,
                           const PresentationOrder& presentation) {
  const Layout layout = seq.layout();
  const std::string total = number_word(layout.size());
  std::string listing;
  for (std::size_t p = 0; p < presentation.shuffled_indices.size(); ++p) {
    if (p > 0) listing += '\n';
    listing += fmt::format("{}. {}", p + 1, seq.items.at(presentation.shuffled_indices[p] - 1).text);
  }
  return fmt::format(
      "Given a defeasible cause-effect pair and {total} arguments with varying strength, please give a ranking "
      "of the arguments based on whether they strengthen or weaken the argumentative strength of the "
      "cause-effect pair. Note that the {total} arguments consist of {sup} supporting arguments and {def} "
      "defeating arguments. The ranking should be in the order from the argument that weakens the "
      "argumentative strength of the pair the most to the argument that strengthens the argumentative "
      "strength the most.\n\n"
      "In addition, please ensure that the result only contains indices referring to each argument, "
      "separated by a single space and without any additional explanation or comments.\n\n"
      "The cause is '{cause}' and the effect is '{effect}'.\n\n"
      "The {total} arguments are:\n\n{listing}",
      fmt::arg("total", total), fmt::arg("sup", number_word(layout.supporters)),
      fmt::arg("def", number_word(layout.defeaters)), fmt::arg("cause", text::trim(pair.cause)),
      fmt::arg("effect", text::trim(pair.effect)), fmt::arg("listing", listing));
}

RankingOutcome run_ranking(const CauseEffectPair& pair, const GenerationSequence& seq, Backend& backend,
                           const RunConfig& config) {
  validate_sequence(seq);
  const std::size_t k = seq.items.size();
  RankingOutcome out;
  out.presentation = presentation_for(pair.id, k, config);

  ChatRequest request;
  request.prompt = ranking_prompt(pair, seq, out.presentation);
  request.max_tokens = config.max_tokens;
  request.temperature = config.temperature;
  request.model_name = config.model;
  request.pair_id = pair.id;
  request.phase = std::string(kRankPhase);
  out.reply = backend.complete(request);

  try {
    out.ranked = apply_presentation(parse_ranking(out.reply, k), out.presentation);
  } catch (const RankExtractionError& e) {
    throw Error(ErrorKind::RankingFailed,
                fmt::format("pair '{}': {}", pair.id, fmt::join(e.strategy_log(), "; ")));
  }
  out.ranked.pair_id = pair.id;
  return out;
}

ProbRankingOutcome run_prob_ranking(const CauseEffectPair& pair, const GenerationSequence& seq,
                                    Backend& backend, Conjunction conjunction, ScoreKind kind,
                                    const RunConfig& config) {
  validate_sequence(seq);
  const ConjunctionTemplate& t = conjunction_template(conjunction);
  ProbRankingOutcome out;

  std::vector<TokenLogprob> domain;
  if (kind == ScoreKind::PmiDomainConditional) {
    try {
      domain = backend.score_continuation(config.domain_context, pair.effect, config.model);
    } catch (const Error& e) {
      throw Error(ErrorKind::ScoringFailed, fmt::format("pair '{}': domain context: {}", pair.id, e.what()));
    }
  }

  out.scores.reserve(seq.items.size());
  for (std::size_t i = 0; i < seq.items.size(); ++i) {
    try {
      const auto rendered = render_template(t, combine_events(pair.cause, seq.items[i].text), pair.effect);
      const auto lp = backend.score_continuation(rendered.context, rendered.continuation, config.model);
      switch (kind) {
        case ScoreKind::CausalStrength:
          out.scores.push_back(causal_strength(lp));
          break;
        case ScoreKind::AvgConditionalProb:
          out.scores.push_back(avg_conditional_prob(lp));
          break;
        case ScoreKind::PmiDomainConditional: {
          const auto pmi = pmi_dc(lp, domain);
          if (pmi.length_mismatch) {
            out.warnings.push_back(fmt::format("LengthMismatch at position {}: {} vs {} tokens", i + 1,
                                               lp.size(), domain.size()));
          }
          out.scores.push_back(pmi.value);
          break;
        }
      }
    } catch (const Error& e) {
      throw Error(ErrorKind::ScoringFailed, fmt::format("pair '{}' position {}: {}", pair.id, i + 1, e.what()));
    }
  }
  try {
    out.ranked = rank_by_score(seq, out.scores);
  } catch (const Error& e) {
    throw Error(ErrorKind::ScoringFailed, fmt::format("pair '{}': {}", pair.id, e.what()));
  }
  return out;
}

std::string describe(const RankingMode& mode) {
  if (mode.kind == RankingMode::Kind::Prompt) return "prompt";
  return fmt::format("prob:{}:{}", mode.conjunction ? to_string(*mode.conjunction) : "?",
                     mode.score_kind ? to_string(*mode.score_kind) : "?");
}

PairResult evaluate_pair(PairResult result) {
  result.bundle.reset();
  if (result.failure || !result.sequence || !result.ranked) return result;
  try {
    result.bundle = metric_bundle(*result.sequence, *result.ranked);
  } catch (const Error& e) {
    result.failure = failure_from(e, "score");
  }
  return result;
}

std::vector<PairResult> generate_all(std::span<const CauseEffectPair> pairs, Backend& backend,
                                     const RunConfig& config) {
  return parallel_map<PairResult>(pairs.size(), config.workers, [&](std::size_t i) {
    PairResult r;
    r.pair_id = pairs[i].id;
    try {
      r.sequence = run_generation(pairs[i], backend, config);
    } catch (const Error& e) {
      r.failure = failure_from(e, "generate");
    }
    return r;
  });
}

std::vector<PairResult> rank_all(std::span<const CauseEffectPair> pairs, std::vector<PairResult> results,
                                 Backend& backend, const RunConfig& config) {
  const auto index = index_pairs(pairs);
  return parallel_map<PairResult>(results.size(), config.workers, [&](std::size_t i) {
    PairResult r = results[i];
    r.mode = RankingMode{};
    if (!pending(r)) return r;
    try {
      auto out = run_ranking(find_pair(index, r.pair_id), *r.sequence, backend, config);
      r.presentation = std::move(out.presentation);
      r.ranked = std::move(out.ranked);
    } catch (const Error& e) {
      r.failure = failure_from(e, "rank");
    }
    return r;
  });
}

std::vector<PairResult> prob_rank_all(std::span<const CauseEffectPair> pairs, std::vector<PairResult> results,
                                      Backend& backend, Conjunction conjunction, ScoreKind kind,
                                      const RunConfig& config) {
  const auto index = index_pairs(pairs);
  return parallel_map<PairResult>(results.size(), config.workers, [&](std::size_t i) {
    PairResult r = results[i];
    r.mode = RankingMode{RankingMode::Kind::Prob, conjunction, kind};
    if (!pending(r)) return r;
    try {
      auto out = run_prob_ranking(find_pair(index, r.pair_id), *r.sequence, backend, conjunction, kind, config);
      r.ranked = std::move(out.ranked);
      r.warnings.insert(r.warnings.end(), out.warnings.begin(), out.warnings.end());
    } catch (const Error& e) {
      r.failure = failure_from(e, "prob-rank");
    }
    return r;
  });
}

std::vector<PairResult> evaluate_all(std::vector<PairResult> results) {
  for (auto& r : results) r = evaluate_pair(std::move(r));
  return results;
}

void MetricAccumulator::Running::add(double x) {
  ++n;
  const double delta = x - mean;
  mean += delta / static_cast<double>(n);
  m2 += delta * (x - mean);
}

MetricStat MetricAccumulator::Running::stat() const {
  MetricStat s;
  s.count = n;
  s.mean = mean;
  s.sd = n > 1 ? std::sqrt(std::max(0.0, m2 / static_cast<double>(n - 1))) : 0.0;
  return s;
}

void MetricAccumulator::add(const MetricBundle& b) {
  ++n_;
  if (b.tau_supporters) tau_supporters_.add(*b.tau_supporters);
  if (b.tau_defeaters) tau_defeaters_.add(*b.tau_defeaters);
  tau_all_.add(b.tau_all);
  cgp_.add(b.cgp);
  igc_.add(b.igc);
}

AggregateReport MetricAccumulator::finish() const {
  if (n_ == 0) throw Error(ErrorKind::NothingScored, "no scored results to aggregate");
  AggregateReport r;
  r.tau_supporters = tau_supporters_.stat();
  r.tau_defeaters = tau_defeaters_.stat();
  r.tau_all = tau_all_.stat();
  r.cgp = cgp_.stat();
  r.igc = igc_.stat();
  r.scored = n_;
  return r;
}

AggregateReport aggregate(std::span<const PairResult> results) {
  MetricAccumulator acc;
  std::map<std::string, std::size_t> failures;
  std::size_t failed = 0;
  for (const auto& r : results) {
    if (r.bundle) {
      acc.add(*r.bundle);
    } else {
      ++failed;
      ++failures[r.failure ? std::string(to_string(r.failure->kind)) : "Unranked"];
    }
  }
  AggregateReport report = acc.finish();
  report.failed = failed;
  report.failures = std::move(failures);
  return report;
}

ConfusionMatrix confusion_matrix(std::span<const PairResult> results) {
  ConfusionMatrix m;
  bool any = false;
  for (const auto& r : results) {
    if (!r.bundle || !r.ranked || !r.sequence) continue;
    const Layout layout = r.sequence->layout();
    if (!any) {
      m.layout = layout;
      m.counts.assign(layout.size(), std::vector<std::size_t>(layout.size(), 0));
      any = true;
    } else if (layout != m.layout) {
      throw Error(ErrorKind::BadArity, fmt::format("pair '{}' has a {}+{} layout, expected {}+{}", r.pair_id,
                                                   layout.defeaters, layout.supporters, m.layout.defeaters,
                                                   m.layout.supporters));
    }
    for (std::size_t j = 0; j < r.ranked->order.size(); ++j) ++m.counts[r.ranked->order[j] - 1][j];
  }
  if (!any) throw Error(ErrorKind::NothingScored, "no scored results for a confusion matrix");

  m.percentages.assign(m.counts.size(), std::vector<double>(m.counts.size(), 0.0));
  for (std::size_t i = 0; i < m.counts.size(); ++i) {
    const auto total = std::accumulate(m.counts[i].begin(), m.counts[i].end(), std::size_t{0});
    for (std::size_t j = 0; j < m.counts[i].size(); ++j) {
      m.percentages[i][j] = 100.0 * static_cast<double>(m.counts[i][j]) / static_cast<double>(total);
    }
  }
  return m;
}

AggregateReport random_baseline(std::size_t samples, std::uint64_t seed, Layout layout) {
  if (samples == 0) throw Error(ErrorKind::BadInput, "baseline needs at least one sample");
  if (layout.defeaters == 0 || layout.supporters == 0) {
    throw Error(ErrorKind::EmptyGroup, "baseline layout needs both polarities");
  }
  std::mt19937_64 rng(splitmix64(seed));
  std::vector<std::size_t> order(layout.size());
  MetricAccumulator acc;
  for (std::size_t s = 0; s < samples; ++s) {
    std::iota(order.begin(), order.end(), std::size_t{1});
    portable_shuffle(order, rng);
    acc.add(metric_bundle(layout, order));
  }
  AggregateReport report = acc.finish();
  report.model = "Random";
  report.metadata["mode"] = "baseline";
  report.metadata["samples"] = std::to_string(samples);
  report.metadata["seed"] = std::to_string(seed);
  report.metadata["layout"] = fmt::format("{}+{}", layout.defeaters, layout.supporters);
  return report;
}

}  // namespace cec
