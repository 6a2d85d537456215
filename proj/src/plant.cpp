#include "agc/plant.h"

#include <algorithm>
#include <cmath>

#include "agc/error.h"
#include "agc/rng.h"

namespace agc {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw InvalidArgument(what);
}

PlantState derivatives_unchecked(const PlantState& s, const SystemParams& p,
                                 const AreaLoads& load,
                                 const Measurements& m) {
  const AreaParams& a1 = p.area1;
  const AreaParams& a2 = p.area2;

  const double ace1 = a1.bias_b * m.df1 + m.p_tie;
  const double ace2 = a2.bias_b * m.df2 - m.p_tie;

  double gov_in1 = s.df1;
  double gov_in2 = s.df2;
  if (p.nonlinear_mode) {
    gov_in1 = apply_deadband(s.df1, p.deadband_width);
    gov_in2 = apply_deadband(s.df2, p.deadband_width);
  }

  PlantState d;
  d.df1 = (s.pm1 - load.area1 - a1.damping_d * s.df1 - s.p_tie) /
          (2.0 * a1.inertia_h);
  d.df2 = (s.pm2 - load.area2 - a2.damping_d * s.df2 + s.p_tie) /
          (2.0 * a2.inertia_h);
  d.p_tie = p.tie_sync_t12 * (s.df1 - s.df2);
  d.pg1 = (s.pref1 - gov_in1 / a1.droop_r - s.pg1) / a1.governor_tg;
  d.pg2 = (s.pref2 - gov_in2 / a2.droop_r - s.pg2) / a2.governor_tg;
  d.pm1 = (s.pg1 - s.pm1) / a1.turbine_tt;
  d.pm2 = (s.pg2 - s.pm2) / a2.turbine_tt;
  if (p.nonlinear_mode) {
    d.pm1 = clamp_grc(d.pm1, p.grc_limit);
    d.pm2 = clamp_grc(d.pm2, p.grc_limit);
  }
  d.pref1 = -a1.agc_gain_ki * ace1;
  d.pref2 = -a2.agc_gain_ki * ace2;
  return d;
}

// s + h * d, field by field.
PlantState advance(const PlantState& s, const PlantState& d, double h) {
  return {s.df1 + h * d.df1,     s.df2 + h * d.df2,     s.p_tie + h * d.p_tie,
          s.pg1 + h * d.pg1,     s.pg2 + h * d.pg2,     s.pm1 + h * d.pm1,
          s.pm2 + h * d.pm2,     s.pref1 + h * d.pref1, s.pref2 + h * d.pref2};
}

PlantState rk4_combine(const PlantState& s, const PlantState& k1,
                       const PlantState& k2, const PlantState& k3,
                       const PlantState& k4, double h) {
  auto step = [h](double x, double a, double b, double c, double d) {
    return x + h / 6.0 * (a + 2.0 * b + 2.0 * c + d);
  };
  return {step(s.df1, k1.df1, k2.df1, k3.df1, k4.df1),
          step(s.df2, k1.df2, k2.df2, k3.df2, k4.df2),
          step(s.p_tie, k1.p_tie, k2.p_tie, k3.p_tie, k4.p_tie),
          step(s.pg1, k1.pg1, k2.pg1, k3.pg1, k4.pg1),
          step(s.pg2, k1.pg2, k2.pg2, k3.pg2, k4.pg2),
          step(s.pm1, k1.pm1, k2.pm1, k3.pm1, k4.pm1),
          step(s.pm2, k1.pm2, k2.pm2, k3.pm2, k4.pm2),
          step(s.pref1, k1.pref1, k2.pref1, k3.pref1, k4.pref1),
          step(s.pref2, k1.pref2, k2.pref2, k3.pref2, k4.pref2)};
}

}  // namespace

void AreaParams::validate() const {
  require(std::isfinite(inertia_h) && inertia_h > 0, "inertia_H must be > 0");
  require(std::isfinite(damping_d) && damping_d >= 0,
          "damping_D must be >= 0");
  require(std::isfinite(bias_b), "bias_B must be finite");
  require(std::isfinite(governor_tg) && governor_tg > 0,
          "governor_Tg must be > 0");
  require(std::isfinite(turbine_tt) && turbine_tt > 0,
          "turbine_Tt must be > 0");
  require(std::isfinite(droop_r) && droop_r > 0, "droop_R must be > 0");
  require(std::isfinite(agc_gain_ki) && agc_gain_ki >= 0,
          "agc_gain_Ki must be >= 0");
}

SystemParams SystemParams::reference() {
  SystemParams p;
  p.area1 = {.inertia_h = 5.0,
             .damping_d = 0.6,
             .bias_b = 20.6,
             .governor_tg = 0.2,
             .turbine_tt = 0.5,
             .droop_r = 0.05,
             .agc_gain_ki = 0.3};
  p.area2 = {.inertia_h = 4.0,
             .damping_d = 0.3,
             .bias_b = 16.3,
             .governor_tg = 0.3,
             .turbine_tt = 0.6,
             .droop_r = 0.0625,
             .agc_gain_ki = 0.3};
  p.tie_sync_t12 = 2.0;
  p.deadband_width = 0.0006;
  p.grc_limit = 3.0 / 60.0;
  p.ace_delay = 0.0;
  p.nonlinear_mode = true;
  return p;
}

void SystemParams::validate() const {
  area1.validate();
  area2.validate();
  require(std::isfinite(tie_sync_t12) && tie_sync_t12 > 0,
          "tie_sync_T12 must be > 0");
  require(std::isfinite(deadband_width) && deadband_width >= 0,
          "deadband_width must be >= 0");
  require(std::isfinite(grc_limit) && grc_limit > 0, "grc_limit must be > 0");
  require(std::isfinite(ace_delay) && ace_delay >= 0,
          "ace_delay must be >= 0");
}

bool SystemParams::bias_consistent(double tol) const {
  auto ok = [tol](const AreaParams& a) {
    return std::abs(a.damping_d + 1.0 / a.droop_r - a.bias_b) <= tol;
  };
  return ok(area1) && ok(area2);
}

bool PlantState::finite() const {
  return std::isfinite(df1) && std::isfinite(df2) && std::isfinite(p_tie) &&
         std::isfinite(pg1) && std::isfinite(pg2) && std::isfinite(pm1) &&
         std::isfinite(pm2) && std::isfinite(pref1) && std::isfinite(pref2);
}

void DisturbanceSpec::validate() const {
  require(area == 1 || area == 2, "disturbance area must be 1 or 2");
  require(std::isfinite(magnitude), "disturbance magnitude must be finite");
  require(start_time >= 0.0 && start_time <= 30.0,
          "disturbance start_time must lie in [0, 30] s");
}

void ScenarioConfig::validate() const {
  system.validate();
  disturbance.validate();
  require(process_noise_std >= 0 && measurement_noise_std >= 0,
          "noise std must be >= 0");
  require(internal_dt > 0 && record_dt > 0 && window > 0,
          "time grid must be positive");
  const double ratio = record_dt / internal_dt;
  require(std::abs(ratio - std::round(ratio)) < 1e-9 && ratio >= 1.0,
          "record_dt must be an integer multiple of internal_dt");
  const double points = window / record_dt;
  require(std::abs(points - std::round(points)) < 1e-9 && points >= 2.0,
          "window must be an integer multiple of record_dt");
}

int ScenarioConfig::num_points() const {
  return static_cast<int>(std::lround(window / record_dt));
}

int ScenarioConfig::steps_per_record() const {
  return static_cast<int>(std::lround(record_dt / internal_dt));
}

MeasurementHook identity_hook() {
  return {[](Signal, double value, double) { return value; }, {}};
}

const std::vector<double>& SignalTrace::series(Signal s) const {
  switch (s) {
    case Signal::kDeltaF1:
      return delta_f1;
    case Signal::kDeltaF2:
      return delta_f2;
    case Signal::kDeltaPTie:
      return delta_p_tie;
  }
  return delta_p_tie;
}

double apply_deadband(double freq_error, double width) {
  const double half = width / 2.0;
  const double mag = std::abs(freq_error);
  if (mag <= half) return 0.0;
  return std::copysign(mag - half, freq_error);
}

double clamp_grc(double turbine_rate, double limit) {
  return std::clamp(turbine_rate, -limit, limit);
}

PlantState derivatives(const PlantState& state, const SystemParams& params,
                       const AreaLoads& load, const Measurements& measured) {
  const bool inputs_finite =
      std::isfinite(load.area1) && std::isfinite(load.area2) &&
      std::isfinite(measured.df1) && std::isfinite(measured.df2) &&
      std::isfinite(measured.p_tie);
  if (!state.finite() || !inputs_finite) {
    throw InvalidState("derivatives: non-finite state or input");
  }
  return derivatives_unchecked(state, params, load, measured);
}

SignalTrace simulate(const ScenarioConfig& scenario,
                     const MeasurementHook& hook,
                     const StepObserver& observer) {
  scenario.validate();
  const SystemParams& params = scenario.system;
  const int points = scenario.num_points();
  const int per_record = scenario.steps_per_record();
  const std::int64_t total_steps =
      static_cast<std::int64_t>(points - 1) * per_record;
  const double dt = scenario.internal_dt;

  // Noise is drawn up front in a fixed order so attacked and attack-free
  // runs of the same scenario see identical draws.
  std::vector<double> process_noise(2 * static_cast<std::size_t>(points), 0.0);
  std::vector<double> measurement_noise(3 * static_cast<std::size_t>(points),
                                        0.0);
  RngStream rng(scenario.seed);
  if (scenario.process_noise_std > 0) {
    for (double& w : process_noise) w = rng.normal(0.0, scenario.process_noise_std);
  }
  if (scenario.measurement_noise_std > 0) {
    for (double& v : measurement_noise) {
      v = rng.normal(0.0, scenario.measurement_noise_std);
    }
  }

  const DisturbanceSpec& dist = scenario.disturbance;
  auto loads_at = [&](double t, std::size_t interval) {
    AreaLoads load{process_noise[2 * interval], process_noise[2 * interval + 1]};
    if (t >= dist.start_time) {
      (dist.area == 1 ? load.area1 : load.area2) += dist.magnitude;
    }
    return load;
  };
  auto measure = [&](const PlantState& s, double t) {
    return Measurements{hook(Signal::kDeltaF1, s.df1, t),
                        hook(Signal::kDeltaF2, s.df2, t),
                        hook(Signal::kDeltaPTie, s.p_tie, t)};
  };

  const std::int64_t delay_steps =
      params.nonlinear_mode && params.ace_delay > 0
          ? std::llround(params.ace_delay / dt)
          : 0;
  std::vector<Measurements> history;
  if (delay_steps > 0) {
    history.assign(static_cast<std::size_t>(delay_steps + 1),
                   measure(PlantState{}, 0.0));
  }

  SignalTrace trace;
  for (auto* v : {&trace.t, &trace.delta_f1, &trace.delta_f2,
                  &trace.delta_p_tie, &trace.ace1, &trace.ace2}) {
    v->reserve(static_cast<std::size_t>(points));
  }

  auto record = [&](std::size_t k, const PlantState& s,
                    const Measurements& controller) {
    const double tk = static_cast<double>(k) * scenario.record_dt;
    const Measurements m = measure(s, tk);
    trace.t.push_back(tk);
    trace.delta_f1.push_back(m.df1 + measurement_noise[3 * k]);
    trace.delta_f2.push_back(m.df2 + measurement_noise[3 * k + 1]);
    trace.delta_p_tie.push_back(m.p_tie + measurement_noise[3 * k + 2]);
    trace.ace1.push_back(params.area1.bias_b * controller.df1 +
                         controller.p_tie);
    trace.ace2.push_back(params.area2.bias_b * controller.df2 -
                         controller.p_tie);
  };

  std::vector<double> breakpoints = hook.breakpoints;
  breakpoints.push_back(dist.start_time);
  std::sort(breakpoints.begin(), breakpoints.end());
  std::vector<double> cuts;

  PlantState state;
  for (std::int64_t n = 0; n <= total_steps; ++n) {
    const double t = static_cast<double>(n) * dt;
    const auto interval = static_cast<std::size_t>(n / per_record);

    const Measurements* delayed = nullptr;
    if (delay_steps > 0) {
      const auto slot = [&](std::int64_t i) {
        return static_cast<std::size_t>(i % (delay_steps + 1));
      };
      history[slot(n)] = measure(state, t);
      delayed = n >= delay_steps ? &history[slot(n - delay_steps)]
                                 : &history[slot(0)];
    }

    if (n % per_record == 0) {
      record(interval, state, delayed ? *delayed : measure(state, t));
    }
    if (n == total_steps) break;

    // Split the step at every discontinuity strictly inside it; a sub-step
    // ending on a discontinuity evaluates its end stage at the left limit.
    const double t_end = static_cast<double>(n + 1) * dt;
    cuts.clear();
    for (double b : breakpoints) {
      if (b > t && b < t_end) cuts.push_back(b);
    }
    cuts.push_back(t_end);
    double u = t;
    for (double v : cuts) {
      const double h = v - u;
      const double mid = u + h / 2.0;
      const double end =
          std::binary_search(breakpoints.begin(), breakpoints.end(), v)
              ? std::nextafter(v, u)
              : v;
      auto f = [&](const PlantState& s, double ts) {
        const Measurements m = delayed ? *delayed : measure(s, ts);
        return derivatives_unchecked(s, params, loads_at(ts, interval), m);
      };
      const PlantState k1 = f(state, u);
      const PlantState k2 = f(advance(state, k1, h / 2.0), mid);
      const PlantState k3 = f(advance(state, k2, h / 2.0), mid);
      const PlantState k4 = f(advance(state, k3, h), end);
      state = rk4_combine(state, k1, k2, k3, k4, h);
      u = v;
    }

    if (!state.finite()) throw DivergenceError(n + 1, t_end);
    if (observer) observer(n + 1, t_end, state);
  }
  return trace;
}

}  // namespace agc
