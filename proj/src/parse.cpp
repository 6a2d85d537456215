#include <cctype>
#include <cmath>
#include <map>

#include "agc/error.h"
#include "agc/explainer.h"
#include "agc/parallel.h"

namespace agc {

namespace {

// Lower-case, Greek delta spelled out, separators dropped.
std::string normalize_name(std::string_view name) {
  std::string out;
  for (std::size_t i = 0; i < name.size(); ++i) {
    const auto c = static_cast<unsigned char>(name[i]);
    if (c == 0xCE && i + 1 < name.size() &&
        (static_cast<unsigned char>(name[i + 1]) == 0x94 ||
         static_cast<unsigned char>(name[i + 1]) == 0xB4)) {
      out += "delta";
      ++i;
      continue;
    }
    if (c == ' ' || c == '_' || c == '-' || c == '.' || c == '(' || c == ')') continue;
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

const std::map<std::string, Signal>& target_aliases() {
  static const std::map<std::string, Signal> aliases = {
      {"deltaf1", Signal::kDeltaF1},       {"df1", Signal::kDeltaF1},
      {"f1", Signal::kDeltaF1},            {"frequency1", Signal::kDeltaF1},
      {"frequencyarea1", Signal::kDeltaF1}, {"area1frequency", Signal::kDeltaF1},
      {"deltaf2", Signal::kDeltaF2},       {"df2", Signal::kDeltaF2},
      {"f2", Signal::kDeltaF2},            {"frequency2", Signal::kDeltaF2},
      {"frequencyarea2", Signal::kDeltaF2}, {"area2frequency", Signal::kDeltaF2},
      {"deltaptie", Signal::kDeltaPTie},   {"ptie", Signal::kDeltaPTie},
      {"tieline", Signal::kDeltaPTie},     {"tielinepower", Signal::kDeltaPTie},
      {"tielineflow", Signal::kDeltaPTie}, {"tiepower", Signal::kDeltaPTie},
      {"deltatie", Signal::kDeltaPTie},    {"ptieline", Signal::kDeltaPTie},
  };
  return aliases;
}

double finite_number(const Json& obj, const char* key, std::string_view raw) {
  if (!obj.contains(key) || !obj.at(key).is_number()) {
    throw ParseError(std::string("field '") + key + "' missing or not a number",
                     std::string(raw));
  }
  const double v = obj.at(key).get<double>();
  if (!std::isfinite(v)) {
    throw ParseError(std::string("field '") + key + "' is not finite", std::string(raw));
  }
  return v;
}

}  // namespace

std::optional<Signal> canonical_target(std::string_view name) {
  const auto& aliases = target_aliases();
  const auto it = aliases.find(normalize_name(name));
  if (it == aliases.end()) return std::nullopt;
  return it->second;
}

std::optional<Json> extract_json_object(std::string_view text) {
  for (auto start = text.find('{'); start != std::string_view::npos;
       start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}' && --depth == 0) {
        Json j = Json::parse(text.substr(start, i - start + 1), nullptr, false);
        if (!j.is_discarded() && j.is_object()) return j;
        break;
      }
    }
  }
  return std::nullopt;
}

ExplanationReport parse_explanation(std::string_view raw) {
  const std::optional<Json> obj = extract_json_object(raw);
  if (!obj) throw ParseError("no JSON object in response", std::string(raw));

  ExplanationReport r;
  r.raw_response = std::string(raw);
  if (!obj->contains("attack_target") || !obj->at("attack_target").is_string()) {
    throw ParseError("field 'attack_target' missing or not a string", std::string(raw));
  }
  const auto target = canonical_target(obj->at("attack_target").get<std::string>());
  if (!target) {
    throw ParseError("unknown attack_target '" +
                         obj->at("attack_target").get<std::string>() + "'",
                     std::string(raw));
  }
  r.attack_target = *target;
  r.attack_magnitude = std::abs(finite_number(*obj, "attack_magnitude_pu", raw));
  r.attack_start_time = finite_number(*obj, "attack_start_time_s", raw);
  if (r.attack_start_time < 0.0 || r.attack_start_time > 60.0) {
    throw ParseError("attack_start_time_s outside [0, 60]", std::string(raw));
  }
  if (!obj->contains("justification") || !obj->at("justification").is_string()) {
    throw ParseError("field 'justification' missing or not a string", std::string(raw));
  }
  r.justification = obj->at("justification").get<std::string>();
  return r;
}

ExplanationReport explain(const LlmClientConfig& config,
                          const PromptBundle& bundle) {
  const LlmResponse first = request_explanation(config, bundle);
  try {
    ExplanationReport r = parse_explanation(first.content);
    r.sample_id = bundle.sample_id;
    r.latency_s = first.latency_s;
    r.attempts = first.attempts;
    return r;
  } catch (const ParseError&) {
  }

  const LlmResponse second = chat_completion(
      config, {{"system", bundle.system_text},
               {"user", bundle.query_text},
               {"assistant", first.content},
               {"user", std::string(kRepairInstruction)}});
  try {
    ExplanationReport r = parse_explanation(second.content);
    r.sample_id = bundle.sample_id;
    r.latency_s = first.latency_s + second.latency_s;
    r.attempts = first.attempts + second.attempts;
    r.repaired = true;
    return r;
  } catch (const ParseError& e) {
    throw ParseError(std::string("unparseable after one repair attempt: ") + e.what(),
                     first.content + "\n--- repair reply ---\n" + second.content);
  }
}

std::vector<ExplanationOutcome> explain_all(const LlmClientConfig& config,
                                            std::span<const PromptBundle> bundles) {
  std::vector<ExplanationOutcome> out(bundles.size());
  parallel_for(bundles.size(), std::max(config.max_in_flight, 1), [&](std::size_t i) {
    ExplanationOutcome& o = out[i];
    o.sample_id = bundles[i].sample_id;
    try {
      o.report = explain(config, bundles[i]);
      o.raw = o.report->raw_response;
    } catch (const ParseError& e) {
      o.error = e.what();
      o.raw = e.raw();
    } catch (const Error& e) {
      o.error = e.what();
    }
  });
  return out;
}

}  // namespace agc
