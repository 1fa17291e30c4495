#include "pbsim/noise.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pbsim {

namespace {

double reflect_into(double value, double lo, double hi) {
  if (lo >= hi) return lo;
  const double width = hi - lo;
  double offset = std::fmod(value - lo, 2.0 * width);
  if (offset < 0.0) offset += 2.0 * width;
  return lo + (offset <= width ? offset : 2.0 * width - offset);
}

std::string check_walk(const RandomWalkSpec& walk, const char* name) {
  if (walk.step_per_sqrt_h < 0.0) return std::string(name) + ": negative step size";
  if (walk.lo > walk.hi) return std::string(name) + ": bounds out of order";
  return {};
}

}  // namespace

std::string validate_scenario(const ScenarioConfig& scenario) {
  if (scenario.t1_base_s <= 0.0) return "t1_base must be positive";
  if (scenario.tphi_base_s <= 0.0) return "tphi_base must be positive";
  if (scenario.gate_time_s <= 0.0) return "gate_time must be positive";
  if (scenario.operating_points.empty()) return "at least one operating point is required";
  for (const auto& pt : scenario.operating_points) {
    if (pt.label.empty()) return "operating point without a label";
    if (pt.frequency_ghz <= 0.0) return "operating point '" + pt.label + "' without a frequency";
  }
  if (std::abs(norm(scenario.miscalibration.axis) - 1.0) > 1e-6) {
    return "miscalibration axis must be unit length";
  }
  if (scenario.tls) {
    const auto& tls = *scenario.tls;
    if (tls.f_center_ghz <= 0.0) return "tls center frequency must be positive";
    if (tls.linewidth_ghz <= 0.0) return "tls linewidth must be positive";
    if (tls.gamma_peak_per_s < 0.0) return "tls gamma_peak must be non-negative";
    if (tls.telegraph.rate_up_per_h < 0.0 || tls.telegraph.rate_down_per_h < 0.0) {
      return "telegraph rates must be non-negative";
    }
  }
  if (scenario.drift) {
    for (const auto& [walk, name] :
         {std::pair{scenario.drift->tls_center_ghz, "drift.tls_center"},
          std::pair{scenario.drift->detuning_hz, "drift.detuning"},
          std::pair{scenario.drift->t1_base_s, "drift.t1_base"}}) {
      if (!walk) continue;
      if (auto err = check_walk(*walk, name); !err.empty()) return err;
    }
  }
  return {};
}

double tls_lorentzian_weight(double f_ghz, const ScenarioConfig& scenario,
                             const TelegraphState& tls_state, const DriftState& drift) {
  if (!scenario.tls) return 0.0;
  const auto& tls = *scenario.tls;
  const double f_eff = tls.f_center_ghz + drift.tls_center_offset_ghz +
                       tls_state.level * tls.telegraph.frequency_shift_ghz;
  const double kappa2 = tls.linewidth_ghz * tls.linewidth_ghz;
  const double detune = f_ghz - f_eff;
  return kappa2 / (detune * detune + kappa2);
}

double t1_effective(double f_ghz, const ScenarioConfig& scenario,
                    const TelegraphState& tls_state, const DriftState& drift) {
  const double t1_base = scenario.t1_base_s + drift.t1_base_offset_s;
  if (t1_base <= 0.0) throw std::domain_error("t1_effective: drifted T1 is non-positive");
  double rate = 1.0 / t1_base;
  if (scenario.tls) {
    rate += scenario.tls->gamma_peak_per_s * tls_lorentzian_weight(f_ghz, scenario, tls_state, drift);
  }
  return 1.0 / rate;
}

TelegraphState telegraph_step(const TelegraphState& state, double dt_h,
                              const TelegraphParams& params, RngStream& rng) {
  if (dt_h <= 0.0) throw std::invalid_argument("telegraph_step: dt must be positive");
  const double exit_rate = state.level == 0 ? params.rate_up_per_h : params.rate_down_per_h;
  const double p_switch = 1.0 - std::exp(-exit_rate * dt_h);
  TelegraphState next = state;
  next.elapsed_h = state.elapsed_h + dt_h;
  if (rng.next_double() < p_switch) {
    next.level = 1 - state.level;
    next.last_switch_time_h = next.elapsed_h;
  }
  return next;
}

DriftState drift_step(const DriftState& state, double dt_h, const DriftSpec& spec,
                      RngStream& rng) {
  if (dt_h <= 0.0) throw std::invalid_argument("drift_step: dt must be positive");
  DriftState next = state;
  const double scale = std::sqrt(dt_h);
  // Draw in a fixed order so the stream layout is stable even when some
  // walks are disabled.
  const double g1 = rng.next_normal();
  const double g2 = rng.next_normal();
  const double g3 = rng.next_normal();
  if (spec.tls_center_ghz) {
    const auto& w = *spec.tls_center_ghz;
    next.tls_center_offset_ghz =
        reflect_into(state.tls_center_offset_ghz + g1 * w.step_per_sqrt_h * scale, w.lo, w.hi);
  }
  if (spec.detuning_hz) {
    const auto& w = *spec.detuning_hz;
    next.detuning_offset_hz =
        reflect_into(state.detuning_offset_hz + g2 * w.step_per_sqrt_h * scale, w.lo, w.hi);
  }
  if (spec.t1_base_s) {
    const auto& w = *spec.t1_base_s;
    next.t1_base_offset_s =
        reflect_into(state.t1_base_offset_s + g3 * w.step_per_sqrt_h * scale, w.lo, w.hi);
  }
  return next;
}

EnvironmentState advance_environment(const EnvironmentState& env, double dt_h,
                                     const ScenarioConfig& scenario, RngStream& rng) {
  EnvironmentState next = env;
  next.wall_time_h = env.wall_time_h + dt_h;
  if (scenario.tls) {
    next.telegraph = telegraph_step(env.telegraph, dt_h, scenario.tls->telegraph, rng);
  }
  if (scenario.drift) {
    next.drift = drift_step(env.drift, dt_h, *scenario.drift, rng);
  }
  return next;
}

PauliTransferMap gate_channel(const ScenarioConfig& scenario, const OperatingPoint& point,
                              const EnvironmentState& env) {
  const double t1 = t1_effective(point.frequency_ghz, scenario, env.telegraph, env.drift);
  const double gamma = 1.0 - std::exp(-scenario.gate_time_s / t1);
  const double dephase = std::exp(-scenario.gate_time_s / scenario.tphi_base_s);

  const double pull_hz =
      scenario.tls ? scenario.tls->coherent_pull_hz *
                         tls_lorentzian_weight(point.frequency_ghz, scenario, env.telegraph, env.drift)
                   : 0.0;
  const double detuning_hz = scenario.miscalibration.detuning_hz + env.drift.detuning_offset_hz;
  const double angle = 2.0 * std::numbers::pi * (detuning_hz + pull_hz) * scenario.gate_time_s +
                       scenario.miscalibration.overrotation_rad;

  PauliTransferMap map = amplitude_damping_map(gamma);
  map = compose_maps(dephasing_map(dephase), map);
  if (angle != 0.0) {
    map = compose_maps(rotation_map(scenario.miscalibration.axis, angle), map);
  }
  return map;
}

}  // namespace pbsim
