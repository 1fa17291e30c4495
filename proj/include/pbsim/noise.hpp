#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pbsim/bloch.hpp"
#include "pbsim/rng.hpp"

namespace pbsim {

/// Two-state telegraph process of the strongly coupled defect.
struct TelegraphParams {
  double rate_up_per_h = 0.0;    // exit rate of level 0
  double rate_down_per_h = 0.0;  // exit rate of level 1
  double frequency_shift_ghz = 0.0;
};

/// One strongly coupled two-level defect: a Lorentzian relaxation dip of
/// width kappa around its center frequency, plus a coherent frequency pull
/// that feeds the miscalibration detuning in proportion to the same
/// Lorentzian weight.
struct TLSParams {
  double f_center_ghz = 0.0;
  double linewidth_ghz = 0.0;     // kappa > 0
  double gamma_peak_per_s = 0.0;  // added relaxation rate on resonance
  TelegraphParams telegraph;
  double coherent_pull_hz = 0.0;  // per unit Lorentzian weight
};

/// Bounded reflected random walk. `step` is the standard deviation of the
/// walk after one hour; increments scale with sqrt(dt).
struct RandomWalkSpec {
  double step_per_sqrt_h = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Slow parameter drift, one step per cycle. Each entry perturbs the named
/// scenario parameter additively around its configured baseline.
struct DriftSpec {
  std::optional<RandomWalkSpec> tls_center_ghz;
  std::optional<RandomWalkSpec> detuning_hz;
  std::optional<RandomWalkSpec> t1_base_s;
};

struct Miscalibration {
  double detuning_hz = 0.0;
  double overrotation_rad = 0.0;  // per gate
  Vec3 axis = {0.0, 0.0, 1.0};
};

struct OperatingPoint {
  std::string label;
  double frequency_ghz = 0.0;
};

/// Time-dependent noise environment for one qubit.
struct ScenarioConfig {
  double t1_base_s = 5e-6;
  double tphi_base_s = 1e-5;
  double gate_time_s = 25e-9;
  std::vector<OperatingPoint> operating_points;
  Miscalibration miscalibration;
  std::optional<TLSParams> tls;
  std::optional<DriftSpec> drift;
  std::uint64_t seed = 0;
};

struct TelegraphState {
  int level = 0;  // 0 or 1
  double last_switch_time_h = 0.0;
  double elapsed_h = 0.0;  // process clock; advances with every step
};

struct DriftState {
  double tls_center_offset_ghz = 0.0;
  double detuning_offset_hz = 0.0;
  double t1_base_offset_s = 0.0;
};

/// Frozen environment snapshot for one cycle.
struct EnvironmentState {
  TelegraphState telegraph;
  DriftState drift;
  double wall_time_h = 0.0;
};

/// Validates invariants (positive times/frequencies, unit axis, TLS bounds).
/// Returns an error message, or empty when valid.
std::string validate_scenario(const ScenarioConfig& scenario);

/// Lorentzian weight kappa^2 / ((f - f_eff)^2 + kappa^2) of the TLS at f,
/// given the current telegraph level and drift. 0 when no TLS is configured.
double tls_lorentzian_weight(double f_ghz, const ScenarioConfig& scenario,
                             const TelegraphState& tls_state, const DriftState& drift);

/// Effective relaxation time at frequency f:
/// 1/T1_eff = 1/t1_base + gamma_peak * L(f).
double t1_effective(double f_ghz, const ScenarioConfig& scenario,
                    const TelegraphState& tls_state, const DriftState& drift = {});

/// Advances the two-state process by dt. At most one switch is decided per
/// call (switch probability 1 - exp(-rate * dt)), so callers should keep dt
/// well below the mean dwell time; the cycle period satisfies this by orders
/// of magnitude in every shipped scenario.
TelegraphState telegraph_step(const TelegraphState& state, double dt_h,
                              const TelegraphParams& params, RngStream& rng);

DriftState drift_step(const DriftState& state, double dt_h, const DriftSpec& spec,
                      RngStream& rng);

/// Advances telegraph and drift to the next cycle boundary.
EnvironmentState advance_environment(const EnvironmentState& env, double dt_h,
                                     const ScenarioConfig& scenario, RngStream& rng);

/// The per-gate noise channel at one operating point under a frozen
/// environment snapshot:
///   (miscalibration rotation) o (dephasing) o (amplitude damping)
/// with gamma = 1 - exp(-gate_time / T1_eff), equatorial dephasing factor
/// exp(-gate_time / T_phi) and rotation angle
/// 2*pi*(detuning + pull * L) * gate_time + overrotation about the
/// configured axis.
PauliTransferMap gate_channel(const ScenarioConfig& scenario, const OperatingPoint& point,
                              const EnvironmentState& env);

}  // namespace pbsim
