#pragma once

// Two-area load-frequency control plant.
//
// All quantities are per-unit with nominal frequency 1 pu, so each swing
// equation reads
//   d(df_i)/dt = (pm_i - load_i - D_i * df_i -/+ p_tie) / (2 H_i)
// with p_tie positive from area 1 to area 2. Each area has a first-order
// governor and turbine, and an AGC integrator driven by
//   ACE_1 = B_1 * df_1 + p_tie,   ACE_2 = B_2 * df_2 - p_tie.
// ACE is computed from the measurements the controller receives, which a
// MeasurementHook may corrupt. In nonlinear mode the governor input passes a
// dead zone, the turbine rate is clamped (GRC) and ACE may be delayed.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "agc/signals.h"

namespace agc {

struct AreaParams {
  double inertia_h = 5.0;       // s
  double damping_d = 0.6;       // pu power / pu frequency
  double bias_b = 20.6;         // pu power / pu frequency
  double governor_tg = 0.2;     // s
  double turbine_tt = 0.5;      // s
  double droop_r = 0.05;        // pu
  double agc_gain_ki = 0.3;

  void validate() const;
  friend bool operator==(const AreaParams&, const AreaParams&) = default;
};

struct SystemParams {
  AreaParams area1;
  AreaParams area2;
  double tie_sync_t12 = 2.0;
  // Total width of the governor dead zone (0.06 % = 0.0006 pu).
  double deadband_width = 0.0006;
  // Turbine rate limit: 3 pu/min.
  double grc_limit = 0.05;
  double ace_delay = 0.0;  // s
  bool nonlinear_mode = true;

  // The published two-area parameter set.
  static SystemParams reference();
  void validate() const;
  // True when B_i == D_i + 1/R_i for both areas.
  bool bias_consistent(double tol = 1e-12) const;
  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

struct PlantState {
  double df1 = 0.0;
  double df2 = 0.0;
  double p_tie = 0.0;
  double pg1 = 0.0;
  double pg2 = 0.0;
  double pm1 = 0.0;
  double pm2 = 0.0;
  double pref1 = 0.0;
  double pref2 = 0.0;

  bool finite() const;
  friend bool operator==(const PlantState&, const PlantState&) = default;
};

struct AreaLoads {
  double area1 = 0.0;
  double area2 = 0.0;
};

// What the AGC sees: possibly corrupted, possibly delayed.
struct Measurements {
  double df1 = 0.0;
  double df2 = 0.0;
  double p_tie = 0.0;
};

struct DisturbanceSpec {
  int area = 1;             // 1 or 2
  double magnitude = 0.0;   // pu load step
  double start_time = 0.0;  // s, held to end of window

  void validate() const;
  friend bool operator==(const DisturbanceSpec&,
                         const DisturbanceSpec&) = default;
};

struct ScenarioConfig {
  SystemParams system = SystemParams::reference();
  DisturbanceSpec disturbance;
  double process_noise_std = 1e-6;
  double measurement_noise_std = 1e-6;
  double window = 60.0;
  double record_dt = 0.3;
  double internal_dt = 0.01;
  std::uint64_t seed = 0;  // noise stream

  void validate() const;
  int num_points() const;
  int steps_per_record() const;
  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

// Maps (signal, true value, time) to the value delivered to the AGC and the
// recorder. Must be defined for every t.
struct MeasurementHook {
  std::function<double(Signal, double, double)> map;
  // Times at which `map` is discontinuous in t. Integration steps are split
  // there so onsets do not cost accuracy.
  std::vector<double> breakpoints;

  double operator()(Signal s, double value, double t) const {
    return map(s, value, t);
  }
};
MeasurementHook identity_hook();

// Called after every internal step with the step index and new state.
using StepObserver =
    std::function<void(std::int64_t step, double t, const PlantState&)>;

struct SignalTrace {
  std::vector<double> t;
  std::vector<double> delta_f1;
  std::vector<double> delta_f2;
  std::vector<double> delta_p_tie;
  // ACE as computed by each area's controller at the recording instants.
  std::vector<double> ace1;
  std::vector<double> ace2;

  std::size_t size() const { return t.size(); }
  const std::vector<double>& series(Signal s) const;
  friend bool operator==(const SignalTrace&, const SignalTrace&) = default;
};

double apply_deadband(double freq_error, double width);
double clamp_grc(double turbine_rate, double limit);

PlantState derivatives(const PlantState& state, const SystemParams& params,
                       const AreaLoads& load, const Measurements& measured);

// Fixed-step RK4 at scenario.internal_dt, recording every record_dt.
SignalTrace simulate(const ScenarioConfig& scenario,
                     const MeasurementHook& hook,
                     const StepObserver& observer = {});

}  // namespace agc
