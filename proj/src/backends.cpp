#include "cec/backends.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ctime>
#include <iterator>
#include <json.hpp>
#include <random>

#include "cec/digest.hpp"
#include "cec/errors.hpp"
#include "cec/text.hpp"

namespace cec {

using nlohmann::json;

void validate_request(const ChatRequest& request) {
  if (text::trim(request.prompt).empty()) throw Error(ErrorKind::BadInput, "empty prompt");
  if (request.temperature && (!std::isfinite(*request.temperature) || *request.temperature < 0.0)) {
    throw Error(ErrorKind::BadInput, "temperature must be finite and >= 0");
  }
}

std::vector<TokenLogprob> Backend::score_continuation(std::string_view, std::string_view,
                                                      std::string_view) {
  throw Error(ErrorKind::UnsupportedOperation, "this backend cannot score continuations");
}

std::string scoring_text(std::string_view context, std::string_view continuation) {
  std::string_view ctx = text::trim(context);
  std::string_view cont = text::trim(continuation);
  if (ctx.empty()) return std::string(cont);
  return fmt::format("{} {}", ctx, cont);
}

std::string cache_key(std::string_view model, std::string_view pair_id, std::string_view phase,
                      std::string_view prompt) {
  return sha256_hex(fmt::format("{}\x1f{}\x1f{}\x1f{}", model, pair_id, phase, sha256_hex(prompt)));
}

std::string scoring_prompt(std::string_view context, std::string_view continuation) {
  return fmt::format("{}\x1e{}", context, continuation);
}

std::string encode_logprobs(const std::vector<TokenLogprob>& tokens) {
  json arr = json::array();
  for (const auto& t : tokens) arr.push_back({{"token", t.token_text}, {"logprob", t.logprob}});
  return arr.dump();
}

std::vector<TokenLogprob> decode_logprobs(std::string_view payload) {
  std::vector<TokenLogprob> out;
  try {
    for (const auto& item : json::parse(payload)) {
      out.push_back({item.at("token").get<std::string>(), item.at("logprob").get<double>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::BadInput, fmt::format("malformed logprob payload: {}", e.what()));
  }
  return out;
}

namespace {

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

CacheRecord make_record(std::string_view model, std::string_view pair_id, std::string_view phase,
                        std::string_view prompt, std::string payload) {
  CacheRecord r;
  r.key = cache_key(model, pair_id, phase, prompt);
  r.model = std::string(model);
  r.pair_id = std::string(pair_id);
  r.phase = std::string(phase);
  r.prompt_digest = sha256_hex(prompt);
  r.payload = std::move(payload);
  r.created_at = utc_now();
  return r;
}

std::string record_to_line(const CacheRecord& r) {
  json j = {{"key", r.key},         {"model", r.model},     {"pair_id", r.pair_id},
            {"phase", r.phase},     {"prompt_digest", r.prompt_digest},
            {"payload", r.payload}, {"created_at", r.created_at}};
  return j.dump();
}

// ---------------------------------------------------------------------------
// CacheStore

std::shared_ptr<CacheStore> CacheStore::open_readonly(const std::filesystem::path& path) {
  std::shared_ptr<CacheStore> store(new CacheStore());
  if (std::filesystem::is_directory(path)) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) store->load_file(f);
  } else if (std::filesystem::exists(path)) {
    store->load_file(path);
  } else {
    throw Error(ErrorKind::IoFailure, "no fixtures at " + path.string());
  }
  return store;
}

std::shared_ptr<CacheStore> CacheStore::open_writable(const std::filesystem::path& file) {
  std::shared_ptr<CacheStore> store(new CacheStore());
  if (std::filesystem::exists(file)) store->load_file(file);
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  store->out_.open(file, std::ios::app | std::ios::binary);
  if (!store->out_) throw Error(ErrorKind::IoFailure, "cannot append to " + file.string());
  store->append_path_ = file;
  return store;
}

std::shared_ptr<CacheStore> CacheStore::in_memory() {
  return std::shared_ptr<CacheStore>(new CacheStore());
}

void CacheStore::load_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot read " + file.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      entries_[j.at("key").get<std::string>()] = j.at("payload").get<std::string>();
    } catch (const json::exception& e) {
      throw StoreCorrupt(file.string(), line_no, e.what());
    }
  }
}

std::optional<std::string> CacheStore::find(const std::string& key) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void CacheStore::append(const CacheRecord& record) {
  std::lock_guard lock(mutex_);
  if (append_path_) {
    const std::string line = record_to_line(record) + "\n";
    out_.write(line.data(), static_cast<std::streamsize>(line.size()));
    out_.flush();
    if (!out_) throw Error(ErrorKind::IoFailure, "write failed on " + append_path_->string());
  }
  entries_[record.key] = record.payload;
}

std::size_t CacheStore::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

// ---------------------------------------------------------------------------
// ReplayBackend

ReplayBackend::ReplayBackend(std::shared_ptr<const CacheStore> store) : store_(std::move(store)) {}

std::string ReplayBackend::complete(const ChatRequest& request) {
  validate_request(request);
  const auto key = cache_key(request.model_name, request.pair_id, request.phase, request.prompt);
  if (auto hit = store_->find(key)) return *hit;
  throw Error(ErrorKind::ReplayMiss,
              fmt::format("no fixture for model '{}', pair '{}', phase '{}'", request.model_name,
                          request.pair_id, request.phase));
}

std::vector<TokenLogprob> ReplayBackend::score_continuation(std::string_view context,
                                                            std::string_view continuation,
                                                            std::string_view model_name) {
  if (text::trim(continuation).empty()) throw Error(ErrorKind::BadInput, "empty continuation");
  const auto key = cache_key(model_name, "", kScorePhase, scoring_prompt(context, continuation));
  if (auto hit = store_->find(key)) return decode_logprobs(*hit);
  throw Error(ErrorKind::ReplayMiss, fmt::format("no scoring fixture for '{}'",
                                                 scoring_text(context, continuation)));
}

// ---------------------------------------------------------------------------
// CachedBackend

CachedBackend::CachedBackend(std::shared_ptr<Backend> inner, std::shared_ptr<CacheStore> store)
    : inner_(std::move(inner)), store_(std::move(store)) {}

template <typename Fetch>
std::string CachedBackend::lookup_or_fetch(const CacheRecord& shape, Fetch&& fetch) {
  if (auto hit = store_->find(shape.key)) return *hit;

  std::promise<std::string> promise;
  std::shared_future<std::string> pending;
  bool owner = false;
  {
    std::lock_guard lock(inflight_mutex_);
    if (auto it = inflight_.find(shape.key); it != inflight_.end()) {
      pending = it->second;
    } else {
      pending = promise.get_future().share();
      inflight_.emplace(shape.key, pending);
      owner = true;
    }
  }
  if (!owner) return pending.get();

  const auto release = [&] {
    std::lock_guard lock(inflight_mutex_);
    inflight_.erase(shape.key);
  };
  try {
    std::string value;
    if (auto hit = store_->find(shape.key)) {
      value = *hit;
    } else {
      value = fetch();
      CacheRecord record = shape;
      record.payload = value;
      store_->append(record);
    }
    promise.set_value(value);
    release();
    return value;
  } catch (...) {
    promise.set_exception(std::current_exception());
    release();
    throw;
  }
}

std::string CachedBackend::complete(const ChatRequest& request) {
  validate_request(request);
  const auto shape = make_record(request.model_name, request.pair_id, request.phase, request.prompt, "");
  return lookup_or_fetch(shape, [&] { return inner_->complete(request); });
}

std::vector<TokenLogprob> CachedBackend::score_continuation(std::string_view context,
                                                            std::string_view continuation,
                                                            std::string_view model_name) {
  if (text::trim(continuation).empty()) throw Error(ErrorKind::BadInput, "empty continuation");
  const auto shape =
      make_record(model_name, "", kScorePhase, scoring_prompt(context, continuation), "");
  return decode_logprobs(lookup_or_fetch(shape, [&] {
    return encode_logprobs(inner_->score_continuation(context, continuation, model_name));
  }));
}

std::shared_ptr<Backend> cached(std::shared_ptr<Backend> inner, std::shared_ptr<CacheStore> store) {
  return std::make_shared<CachedBackend>(std::move(inner), std::move(store));
}

// ---------------------------------------------------------------------------
// BudgetedBackend

BudgetedBackend::BudgetedBackend(std::shared_ptr<Backend> inner, std::size_t max_requests)
    : inner_(std::move(inner)), max_requests_(max_requests) {}

void BudgetedBackend::charge() {
  if (used_.fetch_add(1) >= max_requests_) {
    throw Error(ErrorKind::BudgetExceeded, fmt::format("request cap of {} reached", max_requests_));
  }
}

std::string BudgetedBackend::complete(const ChatRequest& request) {
  charge();
  return inner_->complete(request);
}

std::vector<TokenLogprob> BudgetedBackend::score_continuation(std::string_view context,
                                                              std::string_view continuation,
                                                              std::string_view model_name) {
  charge();
  return inner_->score_continuation(context, continuation, model_name);
}

// ---------------------------------------------------------------------------
// ScriptedRandomBackend

ScriptedRandomBackend::ScriptedRandomBackend(std::uint64_t seed, std::size_t ranking_size)
    : seed_(seed), ranking_size_(ranking_size) {}

std::string ScriptedRandomBackend::complete(const ChatRequest& request) {
  validate_request(request);
  const std::uint64_t h =
      splitmix64(seed_ ^ fnv1a64(cache_key(request.model_name, request.pair_id, request.phase,
                                           request.prompt)));
  if (request.phase.starts_with("generate")) {
    return fmt::format("Synthetic argument {:016x}.\nSynthetic argument {:016x}.", h,
                       splitmix64(h));
  }
  std::vector<std::size_t> order(ranking_size_);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i + 1;
  std::mt19937_64 rng(h);
  portable_shuffle(order, rng);
  return fmt::format("{}", fmt::join(order, " "));
}

std::vector<TokenLogprob> ScriptedRandomBackend::score_continuation(std::string_view context,
                                                                    std::string_view continuation,
                                                                    std::string_view) {
  if (text::trim(continuation).empty()) throw Error(ErrorKind::BadInput, "empty continuation");
  std::mt19937_64 rng(splitmix64(seed_ ^ fnv1a64(scoring_prompt(context, continuation))));
  std::vector<TokenLogprob> out;
  for (auto word : text::split_words(continuation)) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    out.push_back({" " + std::string(word), -(0.05 + 6.0 * u)});
  }
  return out;
}

}  // namespace cec
