#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "agc/error.h"
#include "agc/explainer.h"
#include "agc/rng.h"

namespace agc {

namespace {

std::string_view signal_description(Signal s) {
  switch (s) {
    case Signal::kDeltaF1:
      return "frequency deviation of area 1 (pu)";
    case Signal::kDeltaF2:
      return "frequency deviation of area 2 (pu)";
    case Signal::kDeltaPTie:
      return "tie-line power deviation, positive from area 1 to area 2 (pu)";
  }
  return "";
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string example_justification(const GoldAnswer& a) {
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "The %s statistics show a persistent offset that the other "
                "signals do not explain, beginning near %.1f s.",
                std::string(signal_name(a.target)).c_str(), a.start_time);
  return buf;
}

}  // namespace

Json query_metadata(const Sample& sample, const DetectionResult& detection,
                    const QueryOptions& options) {
  if (detection.label != Label::kAttack) {
    throw InvalidArgument("build_query: explanations are only built for attack alarms");
  }
  Json signals = Json::object();
  for (Signal s : kAllSignals) {
    Json stats = Json::object();
    for (std::size_t j = 0; j < kStatsPerSignal; ++j) {
      stats[FeatureVector::stat_names()[j]] = sample.features.at(s, j);
    }
    signals[std::string(signal_name(s))] = stats;
  }
  const ScenarioConfig& sc = sample.scenario;
  Json j = {{"sample_id", sample.id},
            {"signals", signals},
            {"noise",
             {{"process_std_pu", sc.process_noise_std},
              {"measurement_std_pu", sc.measurement_noise_std}}},
            {"sampling",
             {{"window_s", sc.window},
              {"interval_s", sc.record_dt},
              {"points", sample.trace.size()}}},
            {"classifier",
             {{"label", label_name(detection.label)},
              {"confidence", detection.confidence},
              {"prob_normal", detection.prob_normal},
              {"prob_attack", detection.prob_attack}}}};
  if (options.include_series) {
    if (options.series_stride < 1) {
      throw InvalidArgument("series_stride must be >= 1");
    }
    const auto stride = static_cast<std::size_t>(options.series_stride);
    Json series = {{"interval_s", sc.record_dt * static_cast<double>(stride)}};
    for (Signal s : kAllSignals) {
      Json values = Json::array();
      const auto& v = sample.trace.series(s);
      for (std::size_t k = 0; k < v.size(); k += stride) values.push_back(v[k]);
      series[std::string(signal_name(s))] = values;
    }
    j["series"] = series;
  }
  return j;
}

std::string build_query(const Sample& sample, const DetectionResult& detection,
                        const QueryOptions& options) {
  return "The detector raised an alarm on the sample below. Explain it with "
         "the JSON object described in the instructions.\n\n" +
         query_metadata(sample, detection, options).dump(2) + "\n";
}

GoldAnswer gold_answer(const AttackSpec& attack) {
  return {attack.target, attack.magnitude, attack.t_start};
}

Json answer_json(const GoldAnswer& answer, std::string_view justification) {
  return {{"attack_target", signal_name(answer.target)},
          {"attack_magnitude_pu", answer.magnitude},
          {"attack_start_time_s", answer.start_time},
          {"justification", justification}};
}

std::vector<FewShotExample> select_few_shots(
    std::span<const Sample> pool, std::size_t k, std::uint64_t seed,
    std::span<const std::int64_t> excluded_ids, const Detector& detect) {
  if (k > pool.size()) {
    throw InvalidArgument("select_few_shots: k = " + std::to_string(k) +
                          " exceeds pool size " + std::to_string(pool.size()));
  }
  const std::set<std::int64_t> excluded(excluded_ids.begin(), excluded_ids.end());
  std::array<std::vector<std::size_t>, 3> by_target;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const Sample& s = pool[i];
    if (!s.attack) {
      throw InvalidArgument("select_few_shots: pool sample " +
                            std::to_string(s.id) + " is not attacked");
    }
    if (excluded.contains(s.id)) {
      throw InvalidArgument("select_few_shots: pool sample " +
                            std::to_string(s.id) + " is in the held-out split");
    }
    by_target[static_cast<std::size_t>(s.attack->target)].push_back(i);
  }

  RngStream rng(seed);
  for (auto& members : by_target) rng.shuffle(std::span<std::size_t>(members));

  std::vector<FewShotExample> out;
  std::array<std::size_t, 3> taken{};
  for (std::size_t turn = 0; out.size() < k; turn = (turn + 1) % 3) {
    if (taken[turn] >= by_target[turn].size()) continue;
    const Sample& s = pool[by_target[turn][taken[turn]++]];
    DetectionResult d;
    if (detect) {
      d = detect(s);
      d.label = Label::kAttack;
    } else {
      d.label = Label::kAttack;
      d.prob_attack = d.confidence = 1.0;
      d.prob_normal = 0.0;
    }
    out.push_back({s.id, query_metadata(s, d), gold_answer(*s.attack)});
  }
  return out;
}

std::string build_system_prompt(const SystemParams& system,
                                std::span<const FewShotExample> shots) {
  const AreaParams& a1 = system.area1;
  const AreaParams& a2 = system.area2;
  std::ostringstream out;
  out << "You are a cybersecurity analyst for power-system control centres. "
         "You investigate alarms raised by a machine-learning detector on "
         "automatic generation control (AGC) measurements and explain the "
         "false data injection attack behind each alarm.\n\n";

  out << "## System\n"
         "Two interconnected control areas linked by one tie-line. Each area "
         "has a governor with droop, a turbine and an integral AGC loop "
         "driven by its area control error, ACE_1 = B_1*delta_f1 + "
         "delta_p_tie and ACE_2 = B_2*delta_f2 - delta_p_tie. All quantities "
         "are per-unit deviations from nominal. A random load step hits one "
         "area in the first 30 s. An attacker may add a slowly varying false "
         "value to exactly one measurement fed to AGC, starting after the "
         "load step and no later than 30 s; the injection stays active to "
         "the end of the record and drives the controllers to respond to a "
         "fictitious imbalance.\n\n";

  out << "Parameters:\n"
      << "| Parameter | Area 1 | Area 2 |\n|---|---|---|\n"
      << "| Inertia H (s) | " << fmt(a1.inertia_h) << " | " << fmt(a2.inertia_h) << " |\n"
      << "| Damping D (pu) | " << fmt(a1.damping_d) << " | " << fmt(a2.damping_d) << " |\n"
      << "| Frequency bias B (pu) | " << fmt(a1.bias_b) << " | " << fmt(a2.bias_b) << " |\n"
      << "| Governor time constant Tg (s) | " << fmt(a1.governor_tg) << " | "
      << fmt(a2.governor_tg) << " |\n"
      << "| Turbine time constant Tt (s) | " << fmt(a1.turbine_tt) << " | "
      << fmt(a2.turbine_tt) << " |\n"
      << "| Speed regulation R (pu) | " << fmt(a1.droop_r) << " | " << fmt(a2.droop_r) << " |\n"
      << "| AGC integral gain Ki | " << fmt(a1.agc_gain_ki) << " | "
      << fmt(a2.agc_gain_ki) << " |\n"
      << "Synchronizing coefficient T12 = " << fmt(system.tie_sync_t12)
      << " pu. Nonlinear runs add a governor deadband of "
      << fmt(system.deadband_width) << " pu (total width) and a generation "
      << "rate constraint of " << fmt(system.grc_limit * 60.0)
      << " pu/min; some runs are linear.\n\n";

  out << "## Measurements and metadata\n"
         "Each sample covers 60 s at 0.3 s intervals (200 points) of:\n";
  for (Signal s : kAllSignals) {
    out << "- " << signal_name(s) << ": " << signal_description(s) << "\n";
  }
  out << "For each signal you receive: mean; std (population standard "
         "deviation); skewness (Fisher-Pearson); slope (least-squares trend, "
         "pu/s); min; max. You also receive the process and measurement "
         "noise standard deviations and the detector's label, confidence and "
         "class probabilities. Raw series may be appended at a coarser "
         "interval.\n\n";

  out << "## Required output\n"
         "Reply with a single JSON object and nothing else:\n"
         "{\"attack_target\": \"delta_f1\" | \"delta_f2\" | \"delta_p_tie\", "
         "\"attack_magnitude_pu\": <number>, \"attack_start_time_s\": "
         "<number>, \"justification\": \"<one or two sentences>\"}\n"
         "attack_target is the measurement that was falsified. "
         "attack_magnitude_pu is the largest absolute value injected into it, "
         "in pu. attack_start_time_s is when the injection began, in seconds "
         "from the start of the record (0 to 60).\n";

  if (!shots.empty()) {
    out << "\n## Examples\n";
    for (std::size_t i = 0; i < shots.size(); ++i) {
      out << "\n### Example " << (i + 1) << "\nInput:\n"
          << shots[i].metadata.dump() << "\nOutput:\n"
          << answer_json(shots[i].answer, example_justification(shots[i].answer)).dump()
          << "\n";
    }
  }
  return out.str();
}

std::size_t estimate_tokens(std::string_view text) {
  std::size_t code_points = 0;
  for (unsigned char c : text) code_points += (c & 0xC0) != 0x80;
  return (code_points + 3) / 4;
}

PromptBundle make_bundle(std::int64_t sample_id, std::string system_text,
                         std::string query_text, std::size_t shot_count,
                         std::size_t token_budget) {
  PromptBundle b;
  b.sample_id = sample_id;
  b.estimated_tokens = estimate_tokens(system_text) + estimate_tokens(query_text);
  if (b.estimated_tokens > token_budget) {
    throw InvalidArgument("prompt for sample " + std::to_string(sample_id) +
                          " needs ~" + std::to_string(b.estimated_tokens) +
                          " tokens, budget is " + std::to_string(token_budget));
  }
  b.system_text = std::move(system_text);
  b.query_text = std::move(query_text);
  b.shot_count = shot_count;
  return b;
}

}  // namespace agc
