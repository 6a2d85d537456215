#pragma once

#include <optional>
#include <string_view>

#include "agc/plant.h"
#include "agc/rng.h"
#include "agc/signals.h"

namespace agc {

enum class Subtlety { kSubtle, kNoticeable };

std::string_view subtlety_name(Subtlety s);
std::optional<Subtlety> subtlety_from_name(std::string_view name);

// False-data injection on one measurement. The injected value ramps
// linearly from scale*f_i at t_start to scale*f_f at the window end and is
// added to the true measurement.
struct AttackSpec {
  Signal target = Signal::kDeltaPTie;
  double t_start = 0.0;  // s
  double f_i = 0.0;      // pu, injection at onset
  double f_f = 0.0;      // pu, injection at window end
  double scale = 1.0;
  Subtlety subtlety = Subtlety::kSubtle;
  // max |injected value| over the window after scaling.
  double magnitude = 0.0;

  void refresh_magnitude();
  friend bool operator==(const AttackSpec&, const AttackSpec&) = default;
};

struct AceLimitPolicy {
  double subtle_limit = 0.5;
  double noticeable_limit = 1.0;
  double tolerance = 1e-3;
  int max_iterations = 8;

  double limit_for(Subtlety s) const {
    return s == Subtlety::kSubtle ? subtle_limit : noticeable_limit;
  }
};

// Target uniform over the three signals, t_start uniform on
// [disturbance_time, 30], f_i and f_f ~ N(-0.11, 0.02^2), fair subtlety coin.
AttackSpec sample_attack(RngStream& rng, double disturbance_time);

double injection_value(const AttackSpec& spec, double t, double window_end);

double corrupt(Signal signal, double true_value, double t,
               const AttackSpec& spec, double window_end);

MeasurementHook attack_hook(const AttackSpec& spec, double window_end);

// Largest |ACE| over both areas at recorded instants t_k >= t_start.
double max_abs_ace_after(const SignalTrace& trace, double t_start);

struct EnforcedAttack {
  AttackSpec spec;
  // Attacked trace under the final spec.
  SignalTrace trace;
  int rescales = 0;
  double max_abs_ace = 0.0;
};

// Rescales the attack until the post-onset ACE stays within the subtlety
// limit (times 1 + tolerance). Throws RescaleError when the iteration cap is
// reached.
EnforcedAttack enforce_ace_limit(const ScenarioConfig& scenario,
                                 const AttackSpec& spec,
                                 const AceLimitPolicy& policy = {});

}  // namespace agc
