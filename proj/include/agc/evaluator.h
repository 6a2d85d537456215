#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "agc/detector.h"
#include "agc/explainer.h"

namespace agc {

struct ExplanationMetrics {
  std::string model;
  int shots = 0;
  double target_accuracy = 0.0;  // percent
  double mae_magnitude = 0.0;    // pu
  double mae_onset = 0.0;        // s
  double mean_latency_s = 0.0;
  std::int64_t n_evaluated = 0;
  // Samples without a usable report: unparseable after the repair attempt,
  // or the request itself failed.
  std::int64_t n_parse_failures = 0;

  friend bool operator==(const ExplanationMetrics&,
                         const ExplanationMetrics&) = default;
};

struct GroundTruth {
  std::int64_t sample_id = 0;
  GoldAnswer answer;
};

// Outcomes and truths must cover the same sample ids (any order), else
// AlignmentError. Failed outcomes are counted and left out of every mean.
ExplanationMetrics score(std::span<const ExplanationOutcome> outcomes,
                         std::span<const GroundTruth> truths);

struct Report {
  std::vector<ClassifierMetrics> classifiers;
  std::vector<ExplanationMetrics> explanations;
  std::vector<std::pair<std::string, std::string>> metadata;

  friend bool operator==(const Report&, const Report&) = default;
};

// Markdown with a detection table (4-decimal metrics, 3-decimal latency)
// and, when there are explanation rows, an explanation table (accuracy 2,
// magnitude 5, time 2, latency 3 decimals). Rows are sorted by
// (model, shots).
std::string render_markdown(const Report& report);
// One row per metric line, full precision:
//   table,model,shots,accuracy,recall,precision,f1_score,latency_s,
//   target_accuracy_pct,mae_attack_magnitude_pu,mae_attack_time_s,
//   n_evaluated,n_parse_failures,key,value
// with table in {detection, explanation, meta}.
std::string render_csv(const Report& report);
Report parse_csv(std::string_view text);

// Writes report.md and report.csv into dir.
void write_report(const std::filesystem::path& dir, const Report& report);
Report read_report(const std::filesystem::path& dir);

struct SweepConfig {
  LlmClientConfig client;
  std::string model_label = "gpt-4o-mini";
  std::vector<int> shots = {0, 5, 10, 20};
  std::uint64_t shot_seed = 0;
  QueryOptions query;
  // When false, latencies are recorded as 0 so mock runs are byte-stable.
  bool record_latency = true;
};

struct SweepEntry {
  ExplanationMetrics metrics;
  std::vector<ExplanationOutcome> outcomes;
};

// For each shot count: selects shots from shot_pool, builds one bundle per
// eval sample that the detector flagged, queries the backend and scores the
// results against the samples' attack specs. Eval samples must all be
// attacked; shot_pool must not share ids with eval.
std::vector<SweepEntry> run_shot_sweep(std::span<const Sample> eval,
                                       std::span<const DetectionResult> detections,
                                       std::span<const Sample> shot_pool,
                                       const SweepConfig& config,
                                       const Detector& shot_detector = {});

}  // namespace agc
