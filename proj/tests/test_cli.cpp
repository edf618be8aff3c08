#include <gtest/gtest.h>

#include <json.hpp>

#include "cec/report.hpp"
#include "cli_helpers.hpp"

using namespace clitest;
using json = nlohmann::json;

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"no-such-command"}).code, 2);
  EXPECT_EQ(run({"--backend", "carrier-pigeon", "generate"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, InapplicableConjunctionExitsTwoWithReason) {
  TempDir dir;
  const auto r = run({"--out", dir.path.string(), "prob-rank", "--conjunction", "for"});
  EXPECT_EQ(r.code, 2);
  const auto line = json::parse(r.err.substr(0, r.err.find('\n')));
  EXPECT_EQ(line["error"], "InapplicableConjunction");
  EXPECT_NE(line["message"].get<std::string>().find("for"), std::string::npos);
}

TEST(Cli, ScoreWorkedExample) {
  TempDir dir;
  const std::string fixtures = oracle::fixtures_dir() + "/worked_example";
  const auto r = run({"--out", dir.path.string(), "score", "--sequences", fixtures + "/sequences.jsonl",
                      "--rankings", fixtures + "/rankings.jsonl"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("0.387"), std::string::npos) << r.out;
  const auto report = cec::report_from_json(cec::read_text_file(dir.path / "aggregate.json"));
  EXPECT_NEAR(report.igc.mean, 0.387, 0.005);
}

TEST(Cli, BaselineWritesReports) {
  TempDir dir;
  const auto r = run({"--seed", "7", "--out", dir.path.string(), "baseline", "--samples", "2000"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = cec::report_from_json(cec::read_text_file(dir.path / "aggregate.json"));
  EXPECT_EQ(report.model, "Random");
  EXPECT_EQ(report.scored, 2000u);
  EXPECT_TRUE(fs::exists(dir.path / "aggregate.csv"));
  EXPECT_TRUE(fs::exists(dir.path / "aggregate.md"));
  EXPECT_TRUE(fs::exists(dir.path / "run-baseline.json"));
}

TEST(Cli, MissingFileIsARunFailure) {
  TempDir dir;
  const auto r = run({"--out", dir.path.string(), "score", "--sequences", (dir.path / "nope.jsonl").string(),
                      "--rankings", (dir.path / "nope.jsonl").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(json::parse(r.err.substr(0, r.err.find('\n')))["error"], "IoFailure");
}

TEST(Cli, EndToEndReplayIsDeterministic) {
  TempDir a, b;
  ASSERT_EQ(run_e2e(a.path), 0);
  ASSERT_EQ(run_e2e(b.path), 0);
  for (const char* file : {"aggregate.csv", "confusion.csv", "results.jsonl", "sequences.jsonl", "rankings.jsonl"}) {
    EXPECT_EQ(cec::read_text_file(a.path / file), cec::read_text_file(b.path / file)) << file;
  }
  const auto rows = cec::parse_aggregate_csv(cec::read_text_file(a.path / "aggregate.csv"));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].scored, 10u);
  for (const auto& m : rows[0].metrics) EXPECT_EQ(m->first, 1.0);
}

TEST(Cli, ProbRankAndDeltaReport) {
  TempDir prompt, prob, report;
  ASSERT_EQ(run_e2e(prompt.path), 0);
  const std::string fixtures = oracle::fixtures_dir() + "/e2e";
  const std::vector<std::string> common = {"--dataset", fixtures + "/dataset.jsonl", "--backend", "replay",
                                           "--cache-dir", fixtures + "/replay",      "--model",   "fixture-model",
                                           "--seed",      "7",                      "--out",     prob.path.string()};
  auto gen = common;
  gen.push_back("generate");
  ASSERT_EQ(run(gen).code, 0);
  auto pr = common;
  pr.insert(pr.end(), {"prob-rank", "--conjunction", "so"});
  ASSERT_EQ(run(pr).code, 0);
  auto sc = common;
  sc.push_back("score");
  ASSERT_EQ(run(sc).code, 0);

  const auto r = run({"--out", report.path.string(), "report", "--run", prompt.path.string(), "--run",
                      prob.path.string(), "--prompt-run", prompt.path.string(), "--prob-run", prob.path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto delta = cec::read_text_file(report.path / "delta.csv");
  EXPECT_EQ(delta.substr(0, delta.find('\n')), "conjunction,delta_tau_all,delta_CGP,delta_IGC");
  EXPECT_EQ(delta.substr(delta.find('\n') + 1, 3), "so,");
  EXPECT_EQ(cec::parse_aggregate_csv(cec::read_text_file(report.path / "report.csv")).size(), 2u);

  // A conjunction with no recorded scores fails every pair.
  auto since = common;
  since.insert(since.end(), {"prob-rank", "--conjunction", "since"});
  EXPECT_EQ(run(since).code, 1);
}
