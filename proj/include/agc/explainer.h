#pragma once

// Prompt construction, the chat-completions client and the explanation
// parser.
//
// The LLM is asked for one JSON object:
//   {"attack_target": "delta_f1" | "delta_f2" | "delta_p_tie",
//    "attack_magnitude_pu": number, "attack_start_time_s": number,
//    "justification": string}

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agc/dataset_io.h"
#include "agc/detector.h"

namespace agc {

struct QueryOptions {
  // Appends every `series_stride`-th recorded point of each signal.
  bool include_series = false;
  int series_stride = 10;
};

// The query's metadata object. Keys: sample_id, signals (per-signal
// mean/std/skewness/slope/min/max), noise, sampling, classifier, and
// series when requested. Throws InvalidArgument unless the detection is an
// attack alarm.
Json query_metadata(const Sample& sample, const DetectionResult& detection,
                    const QueryOptions& options = {});
std::string build_query(const Sample& sample, const DetectionResult& detection,
                        const QueryOptions& options = {});

struct GoldAnswer {
  Signal target = Signal::kDeltaF1;
  double magnitude = 0.0;
  double start_time = 0.0;

  friend bool operator==(const GoldAnswer&, const GoldAnswer&) = default;
};

GoldAnswer gold_answer(const AttackSpec& attack);
// The answer object in the documented schema.
Json answer_json(const GoldAnswer& answer, std::string_view justification);

struct FewShotExample {
  std::int64_t sample_id = 0;
  Json metadata;
  GoldAnswer answer;
};

using Detector = std::function<DetectionResult(const Sample&)>;

// Draws k attacked samples, balancing the three targets: targets are visited
// round-robin (delta_f1, delta_f2, delta_p_tie) and each visit takes the
// next sample of that target in a seeded shuffle, skipping exhausted
// targets. Samples whose id is in `excluded_ids` must not be in the pool.
// The metadata's classifier block comes from `detect`, or is a certain
// attack verdict when detect is empty.
std::vector<FewShotExample> select_few_shots(
    std::span<const Sample> pool, std::size_t k, std::uint64_t seed,
    std::span<const std::int64_t> excluded_ids = {}, const Detector& detect = {});

std::string build_system_prompt(const SystemParams& system,
                                std::span<const FewShotExample> shots);

// ceil(code points / 4).
std::size_t estimate_tokens(std::string_view text);

inline constexpr std::size_t kDefaultTokenBudget = 16000;

struct PromptBundle {
  std::int64_t sample_id = 0;
  std::string system_text;
  std::string query_text;
  std::size_t shot_count = 0;
  std::size_t estimated_tokens = 0;
};

// Throws InvalidArgument when the estimate exceeds the budget.
PromptBundle make_bundle(std::int64_t sample_id, std::string system_text,
                         std::string query_text, std::size_t shot_count,
                         std::size_t token_budget = kDefaultTokenBudget);

struct RetryPolicy {
  int max_attempts = 3;
  double initial_backoff_s = 0.5;
  double backoff_multiplier = 2.0;
};

struct LlmClientConfig {
  std::string base_url = "http://127.0.0.1:8080";
  std::string model_name = "gpt-4o-mini";
  double temperature = 0.0;
  std::int64_t request_seed = 42;
  int max_in_flight = 4;
  RetryPolicy retry;
  std::size_t token_budget = kDefaultTokenBudget;
  double timeout_s = 120.0;
  // The bearer token is read from this variable at request time.
  std::string api_key_env = "AGC_LLM_API_KEY";
  bool require_api_key = true;
};

struct ChatMessage {
  std::string role;
  std::string content;
};

struct LlmResponse {
  std::string content;
  double latency_s = 0.0;
  int attempts = 0;
};

// POSTs {model, messages, temperature, seed} to
// {base_url}/v1/chat/completions and returns the first choice's content.
// Transport failures, 429 and 5xx are retried with exponential backoff up
// to retry.max_attempts, then raise TransportError; other 4xx raise
// RequestError at once; a missing required credential raises ConfigError.
LlmResponse chat_completion(const LlmClientConfig& config,
                            const std::vector<ChatMessage>& messages);
LlmResponse request_explanation(const LlmClientConfig& config,
                                const PromptBundle& bundle);

struct ExplanationReport {
  std::int64_t sample_id = 0;
  Signal attack_target = Signal::kDeltaF1;
  double attack_magnitude = 0.0;
  double attack_start_time = 0.0;
  std::string justification;
  std::string raw_response;
  double latency_s = 0.0;
  int attempts = 0;
  bool repaired = false;
};

// Canonical target for a name or alias ("tie-line", "P_tie", "Δf1", ...).
std::optional<Signal> canonical_target(std::string_view name);

// First balanced {...} in the text that parses as a JSON object, skipping
// braces inside strings.
std::optional<Json> extract_json_object(std::string_view text);

// Throws ParseError (carrying raw) on a missing object or schema violation.
// The magnitude is reported as an absolute value; the onset must lie in
// [0, 60] s.
ExplanationReport parse_explanation(std::string_view raw);

inline constexpr std::string_view kRepairInstruction =
    "Your previous reply could not be parsed. Respond again with only the "
    "JSON object in the required schema and nothing else.";

// request + parse, with exactly one repair request when parsing fails.
ExplanationReport explain(const LlmClientConfig& config,
                          const PromptBundle& bundle);

struct ExplanationOutcome {
  std::int64_t sample_id = 0;
  std::optional<ExplanationReport> report;
  std::string error;  // set when report is empty
  std::string raw;    // last raw reply, when there was one
};

// explain() for every bundle, up to config.max_in_flight at a time. Errors
// are recorded per sample. Outcomes keep the order of the bundles.
std::vector<ExplanationOutcome> explain_all(const LlmClientConfig& config,
                                            std::span<const PromptBundle> bundles);

}  // namespace agc
