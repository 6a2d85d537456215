#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "agc/attack.h"
#include "agc/features.h"
#include "agc/plant.h"
#include "agc/rng.h"

namespace agc {

struct Sample {
  std::int64_t id = 0;
  Label label = Label::kNormal;
  SignalTrace trace;
  std::optional<AttackSpec> attack;
  ScenarioConfig scenario;
  FeatureVector features;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct GeneratorOptions {
  double disturbance_std = 0.02;
  double nonlinear_fraction = 0.5;
  AceLimitPolicy policy;
  int attack_retries = 16;
};

// Stream tags mixed into per-sample seeds. The scenario (including the noise
// seed) does not depend on the label, so a sample and its attack-free twin
// share every noise draw; only attacked samples consume the attack stream.
inline constexpr std::uint64_t kScenarioStreamTag = 0x5343454e;  // "SCEN"
inline constexpr std::uint64_t kAttackStreamTag = 0x4154544b;    // "ATTK"

// Disturbance area uniform {1, 2}, magnitude ~ N(0, disturbance_std^2),
// start uniform [0, 30] s, nonlinear mode with probability
// nonlinear_fraction, noise seed from the same stream.
ScenarioConfig sample_scenario(RngStream& rng,
                               const GeneratorOptions& options = {});

Sample generate_sample(std::int64_t index, std::uint64_t master_seed,
                       bool attacked, const GeneratorOptions& options = {});

// Simulates a fixed scenario, with the attack applied as given (no limit
// enforcement), and fills in the features.
Sample build_sample(std::int64_t id, const ScenarioConfig& scenario,
                    const std::optional<AttackSpec>& attack);

// Ids 0..n-1; odd ids are attacked, so the corpus is balanced.
bool is_attacked_index(std::int64_t index);

struct DatasetSplit {
  // Indices into the dataset's sample list, each sorted ascending.
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::vector<std::size_t> llm_eval;
};

inline constexpr std::size_t kLlmEvalPerClass = 200;

// Seeded draw of 200 samples per class into llm_eval, then a stratified
// 70/30 train/test split of the remainder.
DatasetSplit split_dataset(std::span<const Label> labels,
                           std::uint64_t split_seed,
                           std::size_t llm_eval_per_class = kLlmEvalPerClass);
DatasetSplit split_dataset(std::span<const Sample> samples,
                           std::uint64_t split_seed,
                           std::size_t llm_eval_per_class = kLlmEvalPerClass);

}  // namespace agc
