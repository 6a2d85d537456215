#pragma once

// Line-delimited JSON explanation files written by `explain` and read by
// `evaluate`.
//
// Line 1: {"format":"agc-explanations","format_version":1,"model":...,
//          "shots":k,"n":...}
// Then one outcome per line:
//   {"sample_id","ok","attack_target","attack_magnitude_pu",
//    "attack_start_time_s","justification","latency_s","attempts",
//    "repaired","error","raw"}
// Report fields are null when ok is false.

#include <filesystem>
#include <string>
#include <vector>

#include "agc/explainer.h"

namespace agc {

struct ExplanationFile {
  std::string model;
  int shots = 0;
  std::vector<ExplanationOutcome> outcomes;
};

Json outcome_to_json(const ExplanationOutcome& outcome);
ExplanationOutcome outcome_from_json(const Json& j);

void write_explanations(const std::filesystem::path& path, const ExplanationFile& file);
ExplanationFile read_explanations(const std::filesystem::path& path);

}  // namespace agc
