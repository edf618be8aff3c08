#pragma once

#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cec/cli.hpp"
#include "cec/records.hpp"
#include "oracles.hpp"

namespace clitest {

namespace fs = std::filesystem;

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

inline Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cec::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("cec-cli-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

/// generate, rank and score over the replay fixture set into `out`. Returns
/// the first non-zero exit code, or 0.
inline int run_e2e(const fs::path& out) {
  const std::string fixtures = oracle::fixtures_dir() + "/e2e";
  const std::vector<std::string> common = {"--dataset", fixtures + "/dataset.jsonl", "--backend", "replay",
                                           "--cache-dir", fixtures + "/replay",      "--model",   "fixture-model",
                                           "--seed",      "7",                      "--out",     out.string()};
  for (const std::string cmd : {"generate", "rank", "score"}) {
    auto args = common;
    args.push_back(cmd);
    const auto r = run(args);
    if (r.code != 0) return r.code;
  }
  return 0;
}

}  // namespace clitest
