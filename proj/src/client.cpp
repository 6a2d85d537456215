#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "agc/error.h"
#include "agc/explainer.h"

namespace agc {

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path before /v1, no trailing slash
};

Endpoint split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("base_url must start with http:// or https://: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint e;
  e.origin = url.substr(0, path_start);
  if (path_start != std::string::npos) {
    e.prefix = url.substr(path_start);
    while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
  }
  return e;
}

bool retryable(int status) { return status == 429 || status >= 500; }

}  // namespace

LlmResponse chat_completion(const LlmClientConfig& config,
                            const std::vector<ChatMessage>& messages) {
  httplib::Headers headers;
  const char* key = std::getenv(config.api_key_env.c_str());
  if (key != nullptr && *key != '\0') {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  } else if (config.require_api_key) {
    throw ConfigError("environment variable " + config.api_key_env +
                      " is not set; it must hold the API key");
  }
  if (config.retry.max_attempts < 1) {
    throw ConfigError("retry.max_attempts must be >= 1");
  }

  Json body = {{"model", config.model_name},
               {"messages", Json::array()},
               {"temperature", config.temperature},
               {"seed", config.request_seed}};
  for (const ChatMessage& m : messages) {
    body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  }
  const std::string payload = body.dump();

  const Endpoint ep = split_url(config.base_url);
  httplib::Client client(ep.origin);
  if (!client.is_valid()) throw ConfigError("unsupported base_url " + config.base_url);
  const auto timeout = std::chrono::duration<double>(config.timeout_s);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

  const auto start = std::chrono::steady_clock::now();
  double backoff = config.retry.initial_backoff_s;
  std::string last_failure;
  for (int attempt = 1; attempt <= config.retry.max_attempts; ++attempt) {
    auto res = client.Post(ep.prefix + "/v1/chat/completions", headers, payload,
                           "application/json");
    if (res && res->status >= 200 && res->status < 300) {
      LlmResponse out;
      out.attempts = attempt;
      out.latency_s = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();
      try {
        const Json reply = Json::parse(res->body);
        out.content = reply.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed completion response: ") + e.what(),
                         res->body);
      }
      return out;
    }
    if (res && !retryable(res->status)) {
      throw RequestError("chat completion rejected with HTTP " +
                             std::to_string(res->status) + ": " + res->body,
                         res->status);
    }
    last_failure = res ? "HTTP " + std::to_string(res->status)
                       : "transport error: " + httplib::to_string(res.error());
    if (attempt < config.retry.max_attempts) {
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      backoff *= config.retry.backoff_multiplier;
    }
  }
  throw TransportError("chat completion failed after " +
                           std::to_string(config.retry.max_attempts) +
                           " attempts (" + last_failure + ")",
                       config.retry.max_attempts);
}

LlmResponse request_explanation(const LlmClientConfig& config,
                                const PromptBundle& bundle) {
  if (bundle.estimated_tokens > config.token_budget) {
    throw InvalidArgument("prompt exceeds the token budget");
  }
  return chat_completion(config, {{"system", bundle.system_text},
                                  {"user", bundle.query_text}});
}

}  // namespace agc
