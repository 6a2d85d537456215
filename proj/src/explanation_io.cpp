#include "agc/explanation_io.h"

#include <fstream>

#include "agc/error.h"

namespace agc {

namespace {

constexpr const char* kFormat = "agc-explanations";
constexpr int kFormatVersion = 1;

}  // namespace

Json outcome_to_json(const ExplanationOutcome& o) {
  Json j = {{"sample_id", o.sample_id}, {"ok", o.report.has_value()}};
  if (o.report) {
    const ExplanationReport& r = *o.report;
    j["attack_target"] = signal_name(r.attack_target);
    j["attack_magnitude_pu"] = r.attack_magnitude;
    j["attack_start_time_s"] = r.attack_start_time;
    j["justification"] = r.justification;
    j["latency_s"] = r.latency_s;
    j["attempts"] = r.attempts;
    j["repaired"] = r.repaired;
  } else {
    for (const char* k : {"attack_target", "attack_magnitude_pu", "attack_start_time_s",
                          "justification", "latency_s", "attempts", "repaired"}) {
      j[k] = nullptr;
    }
  }
  j["error"] = o.error;
  j["raw"] = o.raw;
  return j;
}

ExplanationOutcome outcome_from_json(const Json& j) {
  try {
    ExplanationOutcome o;
    o.sample_id = j.at("sample_id").get<std::int64_t>();
    o.error = j.at("error").get<std::string>();
    o.raw = j.at("raw").get<std::string>();
    if (j.at("ok").get<bool>()) {
      ExplanationReport r;
      r.sample_id = o.sample_id;
      const auto target = signal_from_name(j.at("attack_target").get<std::string>());
      if (!target) throw FormatError("explanations: unknown attack_target");
      r.attack_target = *target;
      r.attack_magnitude = j.at("attack_magnitude_pu").get<double>();
      r.attack_start_time = j.at("attack_start_time_s").get<double>();
      r.justification = j.at("justification").get<std::string>();
      r.latency_s = j.at("latency_s").get<double>();
      r.attempts = j.at("attempts").get<int>();
      r.repaired = j.at("repaired").get<bool>();
      r.raw_response = o.raw;
      o.report = std::move(r);
    }
    return o;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("explanations: bad record: ") + e.what());
  }
}

void write_explanations(const std::filesystem::path& path, const ExplanationFile& file) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const Json header = {{"format", kFormat},
                       {"format_version", kFormatVersion},
                       {"model", file.model},
                       {"shots", file.shots},
                       {"n", file.outcomes.size()}};
  out << header.dump() << "\n";
  for (const auto& o : file.outcomes) out << outcome_to_json(o).dump() << "\n";
  out.flush();
  if (!out) throw IoError("write failed on " + path.string());
}

ExplanationFile read_explanations(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty file");
  const Json header = Json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.is_object() ||
      header.value("format", "") != kFormat) {
    throw FormatError(path.string() + ": not an explanations file");
  }
  if (header.value("format_version", 0) != kFormatVersion) {
    throw FormatError(path.string() + ": unsupported format_version");
  }
  ExplanationFile file;
  file.model = header.value("model", "");
  file.shots = header.value("shots", 0);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) throw FormatError(path.string() + ": malformed line");
    file.outcomes.push_back(outcome_from_json(j));
  }
  if (file.outcomes.size() != header.value("n", std::size_t{0})) {
    throw FormatError(path.string() + ": record count disagrees with header");
  }
  return file;
}

}  // namespace agc
