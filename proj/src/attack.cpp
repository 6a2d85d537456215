#include "agc/attack.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "agc/error.h"

namespace agc {

namespace {
constexpr double kAttackWindowLatest = 30.0;
constexpr double kInjectionMean = -0.11;
constexpr double kInjectionStd = 0.02;
}  // namespace

std::string_view subtlety_name(Subtlety s) {
  return s == Subtlety::kSubtle ? "subtle" : "noticeable";
}

std::optional<Subtlety> subtlety_from_name(std::string_view name) {
  if (name == "subtle") return Subtlety::kSubtle;
  if (name == "noticeable") return Subtlety::kNoticeable;
  return std::nullopt;
}

void AttackSpec::refresh_magnitude() {
  magnitude = std::abs(scale) * std::max(std::abs(f_i), std::abs(f_f));
}

AttackSpec sample_attack(RngStream& rng, double disturbance_time) {
  if (!(disturbance_time >= 0.0 && disturbance_time <= kAttackWindowLatest)) {
    throw InvalidArgument("disturbance_time must lie in [0, 30] s");
  }
  AttackSpec spec;
  spec.target = kAllSignals[rng.uniform_index(3)];
  spec.t_start = rng.uniform(disturbance_time, kAttackWindowLatest);
  spec.f_i = rng.normal(kInjectionMean, kInjectionStd);
  spec.f_f = rng.normal(kInjectionMean, kInjectionStd);
  spec.subtlety = rng.coin() ? Subtlety::kNoticeable : Subtlety::kSubtle;
  spec.scale = 1.0;
  spec.refresh_magnitude();
  return spec;
}

double injection_value(const AttackSpec& spec, double t, double window_end) {
  if (t < spec.t_start) return 0.0;
  const double frac = (t - spec.t_start) / (window_end - spec.t_start);
  return spec.scale * (spec.f_i + (spec.f_f - spec.f_i) * frac);
}

double corrupt(Signal signal, double true_value, double t,
               const AttackSpec& spec, double window_end) {
  if (signal != spec.target || t < spec.t_start) return true_value;
  return true_value + injection_value(spec, t, window_end);
}

MeasurementHook attack_hook(const AttackSpec& spec, double window_end) {
  if (!(window_end > spec.t_start)) {
    throw InvalidArgument("attack window end must follow t_start");
  }
  return {[spec, window_end](Signal s, double value, double t) {
            return corrupt(s, value, t, spec, window_end);
          },
          {spec.t_start}};
}

double max_abs_ace_after(const SignalTrace& trace, double t_start) {
  double worst = 0.0;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    if (trace.t[k] < t_start) continue;
    worst = std::max({worst, std::abs(trace.ace1[k]), std::abs(trace.ace2[k])});
  }
  return worst;
}

EnforcedAttack enforce_ace_limit(const ScenarioConfig& scenario,
                                 const AttackSpec& spec,
                                 const AceLimitPolicy& policy) {
  const double limit = policy.limit_for(spec.subtlety);
  EnforcedAttack out;
  out.spec = spec;
  out.spec.refresh_magnitude();
  for (int iteration = 0;; ++iteration) {
    out.trace = simulate(scenario, attack_hook(out.spec, scenario.window));
    out.max_abs_ace = max_abs_ace_after(out.trace, out.spec.t_start);
    if (out.max_abs_ace <= limit * (1.0 + policy.tolerance)) return out;
    if (iteration == policy.max_iterations) {
      throw RescaleError("ACE limit not met after " +
                         std::to_string(policy.max_iterations) +
                         " rescales (max |ACE| = " +
                         std::to_string(out.max_abs_ace) + ")");
    }
    out.spec.scale *= limit / out.max_abs_ace;
    out.spec.refresh_magnitude();
    out.rescales = iteration + 1;
  }
}

}  // namespace agc
