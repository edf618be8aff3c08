#include <fmt/format.h>
#include <httplib.h>

#include <algorithm>
#include <json.hpp>
#include <thread>

#include "cec/backends.hpp"
#include "cec/errors.hpp"
#include "cec/text.hpp"

namespace cec {

using nlohmann::json;

namespace {

thread_local std::size_t g_last_attempts = 0;

struct Endpoint {
  std::string origin;
  std::string prefix;
};

Endpoint split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw Error(ErrorKind::BadInput, "base URL needs a scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  Endpoint e;
  e.origin = url.substr(0, slash);
  if (slash != std::string::npos) e.prefix = url.substr(slash);
  while (e.prefix.ends_with('/')) e.prefix.pop_back();
  // Accept both "http://host" and "http://host/v1".
  if (!e.prefix.ends_with("/v1")) e.prefix += "/v1";
  return e;
}

bool retryable(int status) { return status == 429 || status >= 500; }

}  // namespace

HttpBackend::HttpBackend(HttpOptions options) : options_(std::move(options)) {
  split_url(options_.base_url);
  if (options_.max_attempts == 0) throw Error(ErrorKind::BadInput, "max_attempts must be >= 1");
}

std::size_t HttpBackend::last_attempts() { return g_last_attempts; }

std::string HttpBackend::post(const std::string& path, const std::string& body) {
  const Endpoint endpoint = split_url(options_.base_url);
  httplib::Client client(endpoint.origin);
  client.set_connection_timeout(options_.timeout);
  client.set_read_timeout(options_.timeout);
  client.set_write_timeout(options_.timeout);
  httplib::Headers headers;
  if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

  const std::string target = endpoint.prefix + path;
  auto backoff = options_.initial_backoff;
  std::string last_problem;
  for (std::size_t attempt = 1; attempt <= options_.max_attempts; ++attempt) {
    g_last_attempts = attempt;
    auto res = client.Post(target, headers, body, "application/json");
    if (res && res->status >= 200 && res->status < 300) return res->body;
    if (res && !retryable(res->status)) {
      throw Error(ErrorKind::BackendUnavailable,
                  fmt::format("{} returned {}: {}", target, res->status, res->body.substr(0, 200)));
    }
    last_problem = res ? fmt::format("status {}", res->status) : httplib::to_string(res.error());
    if (attempt < options_.max_attempts) {
      std::this_thread::sleep_for(backoff);
      backoff = std::min(backoff * 2, options_.max_backoff);
    }
  }
  throw Error(ErrorKind::BackendUnavailable,
              fmt::format("{} failed after {} attempts ({})", target, options_.max_attempts, last_problem));
}

std::string HttpBackend::complete(const ChatRequest& request) {
  validate_request(request);
  json body = {{"model", request.model_name},
               {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
               {"max_tokens", request.max_tokens}};
  if (request.temperature) body["temperature"] = *request.temperature;
  return parse_chat_response(post("/chat/completions", body.dump()));
}

std::vector<TokenLogprob> HttpBackend::score_continuation(std::string_view context,
                                                          std::string_view continuation,
                                                          std::string_view model_name) {
  if (text::trim(continuation).empty()) throw Error(ErrorKind::BadInput, "empty continuation");
  const std::string full = scoring_text(context, continuation);
  const std::size_t begin = full.size() - text::trim(continuation).size();
  json body = {{"model", model_name}, {"prompt", full}, {"max_tokens", 1},
               {"temperature", 0},    {"echo", true},   {"logprobs", 1}};
  return parse_completion_logprobs(post("/completions", body.dump()), begin, full.size());
}

std::string parse_chat_response(std::string_view body) {
  try {
    const json j = json::parse(body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw Error(ErrorKind::BackendUnavailable, "reply content is not text");
    return content.get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::BackendUnavailable, fmt::format("malformed chat response: {}", e.what()));
  }
}

std::vector<TokenLogprob> parse_completion_logprobs(std::string_view body, std::size_t begin,
                                                    std::size_t end) {
  std::vector<TokenLogprob> out;
  try {
    const json j = json::parse(body);
    const auto& lp = j.at("choices").at(0).at("logprobs");
    const auto& tokens = lp.at("tokens");
    const auto& values = lp.at("token_logprobs");
    const auto& offsets = lp.at("text_offset");
    if (tokens.size() != values.size() || tokens.size() != offsets.size()) {
      throw Error(ErrorKind::BackendUnavailable, "logprob arrays differ in length");
    }
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const auto token = tokens[i].get<std::string>();
      const auto offset = offsets[i].get<std::size_t>();
      if (offset >= end || offset + token.size() <= begin) continue;
      if (values[i].is_null()) {
        // The first token of a prompt has nothing to condition on.
        if (i == 0) continue;
        throw Error(ErrorKind::BackendUnavailable, fmt::format("no logprob for token '{}'", token));
      }
      out.push_back({token, values[i].get<double>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::BackendUnavailable, fmt::format("malformed completion response: {}", e.what()));
  }
  if (out.empty()) throw Error(ErrorKind::BackendUnavailable, "no tokens inside the continuation");
  return out;
}

}  // namespace cec
