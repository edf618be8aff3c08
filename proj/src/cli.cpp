#include "cec/cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <json.hpp>

#include "cec/backends.hpp"
#include "cec/dataset.hpp"
#include "cec/digest.hpp"
#include "cec/errors.hpp"
#include "cec/pipeline.hpp"
#include "cec/probscore.hpp"
#include "cec/records.hpp"
#include "cec/report.hpp"

namespace cec {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct UsageError : Error {
  explicit UsageError(const std::string& message) : Error(ErrorKind::BadInput, message) {}
};

struct Globals {
  std::string dataset;
  std::string backend = "replay";
  std::string base_url;
  std::string model = "model";
  std::string cache_dir;
  std::size_t workers = 4;
  std::uint64_t seed = 0;
  std::string out = ".";
  std::size_t retries = 3;
  bool no_shuffle = false;
  std::size_t max_tokens = 512;
  std::optional<double> temperature;
};

struct PhaseFiles {
  std::string sequences;
  std::string rankings;
};

struct ProbFlags {
  std::string conjunction;
  std::string score_kind = "causal-strength";
  std::string domain_context;
};

struct BaselineFlags {
  std::size_t samples = 100000;
  std::size_t defeaters = 5;
  std::size_t supporters = 5;
};

struct ReportFlags {
  std::vector<std::string> runs;
  std::string prompt_run;
  std::vector<std::string> prob_runs;
};

fs::path out_dir(const Globals& g) { return fs::path(g.out); }

fs::path or_default(const std::string& given, const fs::path& fallback) {
  return given.empty() ? fallback : fs::path(given);
}

std::vector<CauseEffectPair> require_dataset(const Globals& g) {
  if (g.dataset.empty()) throw UsageError("--dataset is required");
  return load_dataset(g.dataset);
}

RunConfig make_config(const Globals& g) {
  RunConfig c;
  c.retries = g.retries;
  c.workers = g.workers;
  c.seed = g.seed;
  c.shuffle_presentation = !g.no_shuffle;
  c.model = g.model;
  c.max_tokens = g.max_tokens;
  c.temperature = g.temperature;
  return c;
}

std::shared_ptr<Backend> with_cache(std::shared_ptr<Backend> inner, const Globals& g) {
  if (g.cache_dir.empty()) return inner;
  return cached(std::move(inner), CacheStore::open_writable(fs::path(g.cache_dir) / "cache.jsonl"));
}

std::shared_ptr<Backend> make_backend(const Globals& g, std::size_t ranking_size) {
  if (g.backend == "replay") {
    if (g.cache_dir.empty()) throw UsageError("--backend replay needs --cache-dir");
    return std::make_shared<ReplayBackend>(CacheStore::open_readonly(g.cache_dir));
  }
  if (g.backend == "random") return with_cache(std::make_shared<ScriptedRandomBackend>(g.seed, ranking_size), g);
  if (g.backend == "toy") return with_cache(std::make_shared<ToyBigramScorer>(), g);
  if (g.backend == "http") {
    if (g.base_url.empty()) throw UsageError("--backend http needs --base-url");
    HttpOptions opts;
    opts.base_url = g.base_url;
    if (const char* key = std::getenv(kApiKeyEnv)) opts.api_key = key;
    return with_cache(std::make_shared<HttpBackend>(opts), g);
  }
  throw UsageError(fmt::format("unknown backend '{}'", g.backend));
}

std::string dataset_digest(const Globals& g, const fs::path& fallback) {
  return sha256_file(g.dataset.empty() ? fallback : fs::path(g.dataset));
}

void write_manifest(const Globals& g, std::string_view command, const std::map<std::string, std::string>& extra) {
  ordered_json j;
  j["command"] = command;
  j["model"] = g.model;
  j["backend"] = g.backend;
  j["seed"] = g.seed;
  j["workers"] = g.workers;
  j["retries"] = g.retries;
  j["presentation"] = g.no_shuffle ? "generation-order" : "seeded-shuffle";
  if (!g.dataset.empty()) j["dataset_digest"] = sha256_file(g.dataset);
  for (const auto& [k, v] : extra) j[k] = v;
  write_text_file(out_dir(g) / fmt::format("run-{}.json", command), j.dump(2) + "\n");
}

std::size_t count_failed(const std::vector<PairResult>& results) {
  return static_cast<std::size_t>(
      std::count_if(results.begin(), results.end(), [](const PairResult& r) { return r.failure.has_value(); }));
}

// A phase in which every pair failed is a failed run; records are still written.
int phase_status(const std::vector<PairResult>& results, std::ostream& err) {
  if (results.empty() || count_failed(results) < results.size()) return 0;
  const Failure& f = *results.front().failure;
  err << ordered_json{{"error", to_string(f.kind)}, {"message", fmt::format("every pair failed; first: {}", f.message)}}.dump()
      << "\n";
  return 1;
}

void write_report_files(const fs::path& dir, std::string_view stem, const AggregateReport& report) {
  for (ReportFormat f : {ReportFormat::Csv, ReportFormat::Json, ReportFormat::Markdown}) {
    write_text_file(dir / fmt::format("{}.{}", stem, file_extension(f)), emit_aggregate(report, f));
  }
}

int cmd_generate(const Globals& g, std::ostream& out, std::ostream& err) {
  const auto pairs = require_dataset(g);
  auto backend = make_backend(g, 10);
  const auto results = generate_all(pairs, *backend, make_config(g));
  write_text_file(out_dir(g) / "sequences.jsonl", results_to_jsonl(results));
  write_manifest(g, "generate", {});
  out << fmt::format("generated {} of {} pairs -> {}\n", results.size() - count_failed(results), results.size(),
                     (out_dir(g) / "sequences.jsonl").string());
  return phase_status(results, err);
}

int cmd_rank(const Globals& g, const PhaseFiles& files, std::ostream& out, std::ostream& err) {
  const auto pairs = require_dataset(g);
  auto sequences = load_results(or_default(files.sequences, out_dir(g) / "sequences.jsonl"));
  auto backend = make_backend(g, 10);
  const auto results = rank_all(pairs, std::move(sequences), *backend, make_config(g));
  write_text_file(out_dir(g) / "rankings.jsonl", results_to_jsonl(results));
  write_manifest(g, "rank", {});
  out << fmt::format("ranked {} of {} pairs -> {}\n", results.size() - count_failed(results), results.size(),
                     (out_dir(g) / "rankings.jsonl").string());
  return phase_status(results, err);
}

int cmd_prob_rank(const Globals& g, const PhaseFiles& files, const ProbFlags& flags, std::ostream& out,
                  std::ostream& err) {
  const Conjunction conjunction = parse_conjunction(flags.conjunction);
  const ScoreKind kind = parse_score_kind(flags.score_kind);
  const auto pairs = require_dataset(g);
  auto sequences = load_results(or_default(files.sequences, out_dir(g) / "sequences.jsonl"));
  auto backend = make_backend(g, 10);
  RunConfig config = make_config(g);
  config.domain_context = flags.domain_context;
  const auto results = prob_rank_all(pairs, std::move(sequences), *backend, conjunction, kind, config);
  write_text_file(out_dir(g) / "rankings.jsonl", results_to_jsonl(results));
  write_manifest(g, "prob-rank",
                 {{"conjunction", std::string(to_string(conjunction))},
                  {"score_kind", std::string(to_string(kind))},
                  {"domain_context", flags.domain_context}});
  out << fmt::format("ranked {} of {} pairs ({}) -> {}\n", results.size() - count_failed(results), results.size(),
                     describe(RankingMode{RankingMode::Kind::Prob, conjunction, kind}),
                     (out_dir(g) / "rankings.jsonl").string());
  return phase_status(results, err);
}

int cmd_score(const Globals& g, const PhaseFiles& files, std::ostream& out) {
  const fs::path seq_path = or_default(files.sequences, out_dir(g) / "sequences.jsonl");
  const auto sequences = load_results(seq_path);
  const auto rankings = load_results(or_default(files.rankings, out_dir(g) / "rankings.jsonl"));
  const auto results = evaluate_all(join_rankings(sequences, rankings));

  AggregateReport report = aggregate(results);
  report.model = g.model;
  report.metadata["dataset_digest"] = dataset_digest(g, seq_path);
  report.metadata["seed"] = std::to_string(g.seed);
  const auto mode = std::find_if(results.begin(), results.end(), [](const PairResult& r) { return r.ranked.has_value(); });
  const RankingMode m = mode == results.end() ? RankingMode{} : mode->mode;
  report.metadata["mode"] = describe(m);
  if (m.conjunction) report.metadata["conjunction"] = std::string(to_string(*m.conjunction));
  if (m.score_kind) report.metadata["score_kind"] = std::string(to_string(*m.score_kind));

  const fs::path dir = out_dir(g);
  write_text_file(dir / "results.jsonl", results_to_jsonl(results));
  write_report_files(dir, "aggregate", report);
  write_text_file(dir / "confusion.csv", emit_confusion(confusion_matrix(results)));
  out << emit_aggregate(report, ReportFormat::Markdown);
  return 0;
}

int cmd_baseline(const Globals& g, const BaselineFlags& flags, std::ostream& out) {
  const AggregateReport report = random_baseline(flags.samples, g.seed, Layout{flags.defeaters, flags.supporters});
  write_report_files(out_dir(g), "aggregate", report);
  write_manifest(g, "baseline",
                 {{"samples", std::to_string(flags.samples)},
                  {"layout", fmt::format("{}+{}", flags.defeaters, flags.supporters)}});
  out << emit_aggregate(report, ReportFormat::Markdown);
  return 0;
}

AggregateReport load_run(const std::string& dir) {
  return report_from_json(read_text_file(fs::path(dir) / "aggregate.json"));
}

int cmd_report(const Globals& g, const ReportFlags& flags, std::ostream& out) {
  if (flags.runs.empty() && flags.prompt_run.empty()) throw UsageError("report needs --run or --prompt-run");
  if (!flags.runs.empty()) {
    std::vector<AggregateReport> reports;
    for (const auto& dir : flags.runs) reports.push_back(load_run(dir));
    for (ReportFormat f : {ReportFormat::Csv, ReportFormat::Json, ReportFormat::Markdown}) {
      write_text_file(out_dir(g) / fmt::format("report.{}", file_extension(f)), emit_aggregate(reports, f));
    }
    out << emit_aggregate(reports, ReportFormat::Markdown);
  }
  if (!flags.prompt_run.empty()) {
    if (flags.prob_runs.empty()) throw UsageError("--prompt-run needs at least one --prob-run");
    const AggregateReport prompt = load_run(flags.prompt_run);
    std::map<Conjunction, AggregateReport> prob;
    for (const auto& dir : flags.prob_runs) {
      AggregateReport r = load_run(dir);
      auto it = r.metadata.find("conjunction");
      if (it == r.metadata.end()) throw Error(ErrorKind::BadInput, dir + " is not a probability-mode run");
      prob[parse_conjunction(it->second)] = std::move(r);
    }
    const std::string delta = emit_delta(prompt, prob);
    write_text_file(out_dir(g) / "delta.csv", delta);
    out << delta;
  }
  return 0;
}

void print_error(std::ostream& err, std::string_view kind, std::string_view message) {
  err << ordered_json{{"error", kind}, {"message", message}}.dump() << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Causal epistemic consistency evaluation", "cec"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--dataset", g.dataset, "Cause-effect pairs (JSONL)");
  app.add_option("--backend", g.backend, "Model backend")->check(CLI::IsMember({"http", "replay", "random", "toy"}));
  app.add_option("--base-url", g.base_url, "OpenAI-compatible endpoint for --backend http");
  app.add_option("--model", g.model, "Model name sent to the backend and shown in reports");
  app.add_option("--cache-dir", g.cache_dir, "Replay fixtures, or the response cache for live backends");
  app.add_option("--workers", g.workers, "Pairs in flight at once")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Seed for presentation shuffles, scripted replies and the baseline");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--retries", g.retries, "Attempts per generation prompt")->check(CLI::PositiveNumber);
  app.add_flag("--no-shuffle", g.no_shuffle, "Present arguments in generation order when ranking");
  app.add_option("--max-tokens", g.max_tokens, "Completion token limit");
  app.add_option("--temperature", g.temperature, "Sampling temperature (provider default if unset)");

  PhaseFiles files;
  ProbFlags prob;
  BaselineFlags baseline;
  ReportFlags report;

  auto* generate = app.add_subcommand("generate", "Phase i: generate intermediates");
  auto* rank = app.add_subcommand("rank", "Phase ii: rank by prompting");
  rank->add_option("--sequences", files.sequences, "Sequences from generate (default OUT/sequences.jsonl)");
  auto* prob_rank = app.add_subcommand("prob-rank", "Phase ii: rank by token probability");
  prob_rank->add_option("--sequences", files.sequences, "Sequences from generate (default OUT/sequences.jsonl)");
  prob_rank->add_option("--conjunction", prob.conjunction, "so|because|since|as|therefore|thus|hence")->required();
  prob_rank->add_option("--score-kind", prob.score_kind, "causal-strength|avg-prob|pmi-dc");
  prob_rank->add_option("--domain-context", prob.domain_context, "Context for the PMI denominator");
  auto* score = app.add_subcommand("score", "Phase iii: metrics from sequences and rankings");
  score->add_option("--sequences", files.sequences, "Default OUT/sequences.jsonl");
  score->add_option("--rankings", files.rankings, "Default OUT/rankings.jsonl");
  auto* base = app.add_subcommand("baseline", "Metrics of uniformly random rankings");
  base->add_option("--samples", baseline.samples, "Number of random rankings")->check(CLI::PositiveNumber);
  base->add_option("--defeaters", baseline.defeaters)->check(CLI::PositiveNumber);
  base->add_option("--supporters", baseline.supporters)->check(CLI::PositiveNumber);
  auto* rep = app.add_subcommand("report", "Tables and deltas from finished runs");
  rep->add_option("--run", report.runs, "Run directory holding aggregate.json (repeatable)");
  rep->add_option("--prompt-run", report.prompt_run, "Prompting-mode run for deltas");
  rep->add_option("--prob-run", report.prob_runs, "Probability-mode run for deltas (repeatable)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    print_error(err, "UsageError", e.what());
    return 2;
  }

  try {
    if (*generate) return cmd_generate(g, out, err);
    if (*rank) return cmd_rank(g, files, out, err);
    if (*prob_rank) return cmd_prob_rank(g, files, prob, out, err);
    if (*score) return cmd_score(g, files, out);
    if (*base) return cmd_baseline(g, baseline, out);
    if (*rep) return cmd_report(g, report, out);
  } catch (const UsageError& e) {
    print_error(err, "UsageError", e.what());
    return 2;
  } catch (const Error& e) {
    print_error(err, to_string(e.kind()), e.what());
    const bool usage = e.kind() == ErrorKind::InapplicableConjunction || e.kind() == ErrorKind::UnknownName;
    return usage ? 2 : 1;
  } catch (const std::exception& e) {
    print_error(err, "Internal", e.what());
    return 1;
  }
  return 2;
}

}  // namespace cec
