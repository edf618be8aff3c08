#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cec {

struct ChatRequest {
  std::string prompt;
  std::size_t max_tokens = 512;
  /// Unset means the provider default; it is then omitted from the wire body.
  std::optional<double> temperature;
  std::string model_name;
  /// Cache/replay tags; not sent to the model.
  std::string pair_id;
  std::string phase;
};

/// Throws BadInput for an empty prompt or a negative/non-finite temperature.
void validate_request(const ChatRequest& request);

struct TokenLogprob {
  std::string token_text;
  double logprob = 0.0;

  bool operator==(const TokenLogprob&) const = default;
};

/// Model access. Implementations must be callable from several threads.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string complete(const ChatRequest& request) = 0;

  /// One entry per continuation token, conditioned on `context` followed by a
  /// single space. Default: UnsupportedOperation.
  virtual std::vector<TokenLogprob> score_continuation(std::string_view context,
                                                       std::string_view continuation,
                                                       std::string_view model_name);
};

/// Text actually scored: context, one space, continuation. An empty context
/// yields the bare continuation.
std::string scoring_text(std::string_view context, std::string_view continuation);

/// Phase tag used for score_continuation records.
inline constexpr std::string_view kScorePhase = "score";

/// sha256(model \x1f pair_id \x1f phase \x1f sha256(prompt)).
std::string cache_key(std::string_view model, std::string_view pair_id, std::string_view phase,
                      std::string_view prompt);

/// Prompt digest for a scoring call; context and continuation are kept apart
/// so different splits of the same text get different keys.
std::string scoring_prompt(std::string_view context, std::string_view continuation);

std::string encode_logprobs(const std::vector<TokenLogprob>& tokens);
std::vector<TokenLogprob> decode_logprobs(std::string_view payload);

struct CacheRecord {
  std::string key;
  std::string model;
  std::string pair_id;
  std::string phase;
  std::string prompt_digest;
  std::string payload;
  std::string created_at;
};

CacheRecord make_record(std::string_view model, std::string_view pair_id, std::string_view phase,
                        std::string_view prompt, std::string payload);

std::string record_to_line(const CacheRecord& record);

/// Append-only store of line-delimited records. Loading a directory reads
/// every *.jsonl inside it in name order; later records win on key clashes.
class CacheStore {
 public:
  /// Read-only view over a file or directory of fixtures.
  static std::shared_ptr<CacheStore> open_readonly(const std::filesystem::path& path);

  /// Loads `file` if it exists and appends new records to it.
  static std::shared_ptr<CacheStore> open_writable(const std::filesystem::path& file);

  /// In-memory store (tests and scripted runs).
  static std::shared_ptr<CacheStore> in_memory();

  std::optional<std::string> find(const std::string& key) const;

  /// Writes one full line and flushes before returning.
  void append(const CacheRecord& record);

  std::size_t size() const;

 private:
  CacheStore() = default;
  void load_file(const std::filesystem::path& file);

  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::string> entries_;
  std::optional<std::filesystem::path> append_path_;
  std::ofstream out_;
};

/// Serves recorded payloads; anything not recorded is a ReplayMiss.
class ReplayBackend final : public Backend {
 public:
  explicit ReplayBackend(std::shared_ptr<const CacheStore> store);

  std::string complete(const ChatRequest& request) override;
  std::vector<TokenLogprob> score_continuation(std::string_view context, std::string_view continuation,
                                               std::string_view model_name) override;

 private:
  std::shared_ptr<const CacheStore> store_;
};

/// Read-through cache: a key reaches `inner` at most once, even under
/// concurrent identical requests.
class CachedBackend final : public Backend {
 public:
  CachedBackend(std::shared_ptr<Backend> inner, std::shared_ptr<CacheStore> store);

  std::string complete(const ChatRequest& request) override;
  std::vector<TokenLogprob> score_continuation(std::string_view context, std::string_view continuation,
                                               std::string_view model_name) override;

 private:
  template <typename Fetch>
  std::string lookup_or_fetch(const CacheRecord& shape, Fetch&& fetch);

  std::shared_ptr<Backend> inner_;
  std::shared_ptr<CacheStore> store_;
  std::mutex inflight_mutex_;
  std::map<std::string, std::shared_future<std::string>> inflight_;
};

std::shared_ptr<Backend> cached(std::shared_ptr<Backend> inner, std::shared_ptr<CacheStore> store);

/// Fails with BudgetExceeded once `max_requests` calls have been forwarded.
class BudgetedBackend final : public Backend {
 public:
  BudgetedBackend(std::shared_ptr<Backend> inner, std::size_t max_requests);

  std::string complete(const ChatRequest& request) override;
  std::vector<TokenLogprob> score_continuation(std::string_view context, std::string_view continuation,
                                               std::string_view model_name) override;

  std::size_t used() const { return used_.load(); }

 private:
  void charge();

  std::shared_ptr<Backend> inner_;
  std::size_t max_requests_;
  std::atomic<std::size_t> used_{0};
};

/// Stand-in model driven by a seed. Ranking-phase prompts get a uniformly
/// random permutation of 1..ranking_size on one line; generation prompts get
/// two synthetic lines; scoring returns pseudo-random token logprobs. Every
/// reply is a pure function of (seed, pair_id, phase, prompt).
class ScriptedRandomBackend final : public Backend {
 public:
  explicit ScriptedRandomBackend(std::uint64_t seed, std::size_t ranking_size = 10);

  std::string complete(const ChatRequest& request) override;
  std::vector<TokenLogprob> score_continuation(std::string_view context, std::string_view continuation,
                                               std::string_view model_name) override;

 private:
  std::uint64_t seed_;
  std::size_t ranking_size_;
};

/// Deterministic character-bigram language model for tests and offline runs.
/// Tokens are whitespace-delimited words carrying their leading space. Bigram
/// counts come from a fixed built-in corpus plus the scored text's own
/// context, so the context changes the continuation's probability.
class ToyBigramScorer final : public Backend {
 public:
  explicit ToyBigramScorer(double smoothing = 0.5);

  std::string complete(const ChatRequest& request) override;
  std::vector<TokenLogprob> score_continuation(std::string_view context, std::string_view continuation,
                                               std::string_view model_name) override;

 private:
  double smoothing_;
};

struct HttpOptions {
  /// e.g. "http://localhost:8000" or "https://api.example.com"; paths
  /// "/v1/chat/completions" and "/v1/completions" are appended.
  std::string base_url;
  std::string api_key;
  std::size_t max_attempts = 5;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{8000};
  std::chrono::seconds timeout{120};
};

/// OpenAI-compatible HTTP client. complete() posts a chat-completions body;
/// score_continuation() posts a completions body with echo+logprobs and keeps
/// the tokens that fall inside the continuation. Connection errors, 429 and 5xx
/// are retried with exponential backoff up to max_attempts.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpOptions options);

  std::string complete(const ChatRequest& request) override;
  std::vector<TokenLogprob> score_continuation(std::string_view context, std::string_view continuation,
                                               std::string_view model_name) override;

  /// Attempts used by the most recent call on this thread.
  static std::size_t last_attempts();

 private:
  std::string post(const std::string& path, const std::string& body);

  HttpOptions options_;
};

/// Environment variable holding the bearer token for HttpBackend.
inline constexpr const char* kApiKeyEnv = "CEC_API_KEY";

/// Parses the response bodies; exposed for tests.
std::string parse_chat_response(std::string_view body);
/// Keeps tokens overlapping [begin, end) of the echoed prompt; a token that
/// is only the separating space before `begin` is dropped, as is a null
/// logprob on the prompt's first token.
std::vector<TokenLogprob> parse_completion_logprobs(std::string_view body, std::size_t begin,
                                                    std::size_t end);

}  // namespace cec
