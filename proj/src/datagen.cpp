#include "agc/datagen.h"

#include <algorithm>
#include <string>

#include "agc/error.h"

namespace agc {

ScenarioConfig sample_scenario(RngStream& rng,
                               const GeneratorOptions& options) {
  ScenarioConfig sc;
  sc.disturbance.area = 1 + static_cast<int>(rng.uniform_index(2));
  sc.disturbance.magnitude = rng.normal(0.0, options.disturbance_std);
  sc.disturbance.start_time = rng.uniform(0.0, 30.0);
  sc.system.nonlinear_mode = rng.uniform() < options.nonlinear_fraction;
  sc.seed = rng.next_u64();
  return sc;
}

bool is_attacked_index(std::int64_t index) { return index % 2 == 1; }

Sample generate_sample(std::int64_t index, std::uint64_t master_seed,
                       bool attacked, const GeneratorOptions& options) {
  const auto uindex = static_cast<std::uint64_t>(index);
  RngStream scenario_rng(mix_seed(master_seed, uindex, kScenarioStreamTag));

  Sample sample;
  sample.id = index;
  sample.scenario = sample_scenario(scenario_rng, options);

  if (!attacked) {
    sample.label = Label::kNormal;
    sample.trace = simulate(sample.scenario, identity_hook());
  } else {
    sample.label = Label::kAttack;
    RngStream attack_rng(mix_seed(master_seed, uindex, kAttackStreamTag));
    for (int attempt = 0;; ++attempt) {
      const AttackSpec draw =
          sample_attack(attack_rng, sample.scenario.disturbance.start_time);
      try {
        EnforcedAttack enforced =
            enforce_ace_limit(sample.scenario, draw, options.policy);
        sample.attack = enforced.spec;
        sample.trace = std::move(enforced.trace);
        break;
      } catch (const RescaleError& e) {
        if (attempt + 1 >= options.attack_retries) {
          throw RescaleError("sample " + std::to_string(index) +
                             ": no admissible attack after " +
                             std::to_string(options.attack_retries) +
                             " draws: " + e.what());
        }
      }
    }
  }
  sample.features = extract(sample.trace);
  return sample;
}

Sample build_sample(std::int64_t id, const ScenarioConfig& scenario,
                    const std::optional<AttackSpec>& attack) {
  Sample sample;
  sample.id = id;
  sample.scenario = scenario;
  sample.attack = attack;
  sample.label = attack ? Label::kAttack : Label::kNormal;
  sample.trace = attack ? simulate(scenario, attack_hook(*attack, scenario.window))
                        : simulate(scenario, identity_hook());
  sample.features = extract(sample.trace);
  return sample;
}

DatasetSplit split_dataset(std::span<const Label> labels,
                           std::uint64_t split_seed,
                           std::size_t llm_eval_per_class) {
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    by_class[static_cast<int>(labels[i])].push_back(i);
  }
  for (const auto& members : by_class) {
    if (members.size() < llm_eval_per_class) {
      throw InvalidArgument("split_dataset: need at least " +
                            std::to_string(llm_eval_per_class) +
                            " samples per class, got " +
                            std::to_string(members.size()));
    }
  }

  RngStream rng(split_seed);
  DatasetSplit split;
  for (auto& members : by_class) {
    rng.shuffle(std::span<std::size_t>(members));
    const auto eval_end = members.begin() + static_cast<std::ptrdiff_t>(
                                                llm_eval_per_class);
    split.llm_eval.insert(split.llm_eval.end(), members.begin(), eval_end);
    const std::size_t rest = members.size() - llm_eval_per_class;
    const std::size_t n_train = rest * 7 / 10;
    const auto train_end = eval_end + static_cast<std::ptrdiff_t>(n_train);
    split.train.insert(split.train.end(), eval_end, train_end);
    split.test.insert(split.test.end(), train_end, members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  std::sort(split.llm_eval.begin(), split.llm_eval.end());
  return split;
}

DatasetSplit split_dataset(std::span<const Sample> samples,
                           std::uint64_t split_seed,
                           std::size_t llm_eval_per_class) {
  std::vector<Label> labels;
  labels.reserve(samples.size());
  for (const Sample& s : samples) labels.push_back(s.label);
  return split_dataset(labels, split_seed, llm_eval_per_class);
}

}  // namespace agc
