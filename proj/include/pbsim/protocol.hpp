#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pbsim/bloch.hpp"
#include "pbsim/clifford.hpp"
#include "pbsim/noise.hpp"
#include "pbsim/rng.hpp"

namespace pbsim {

/// Prepared (and measured) state: the energy ground state sits at -z.
inline constexpr Vec3 kGroundAxis = {0.0, 0.0, -1.0};

/// The four compiled variants of one random gate list. kZ / kX / kY read the
/// three Bloch components of the pre-inversion state; kZFlip steers the
/// sequence to the opposite pole for the offset-eliminating survival pair.
enum class Variant { kZ = 0, kX = 1, kY = 2, kZFlip = 3 };

inline constexpr std::array<Variant, 4> kAllVariants = {Variant::kZ, Variant::kX, Variant::kY,
                                                        Variant::kZFlip};

const char* variant_name(Variant v);
std::optional<Variant> parse_variant(const std::string& name);

/// One sub-sequence: m random gates shared by all four compiled variants.
struct SubSequence {
  int m = 0;
  std::vector<int> gates;
  std::array<int, 4> compiled{};  // indexed by Variant
};

struct PBSequence {
  std::vector<SubSequence> subs;  // one per length in the plan's M set
};

struct MeasurementRecord {
  int cycle = 0;
  double wall_time_h = 0.0;
  std::string point_label;
  int m = 0;
  Variant variant = Variant::kZ;
  int shots = 0;
  int ones = 0;
  std::int64_t sequence_id = 0;

  bool operator==(const MeasurementRecord&) const = default;
};

struct T1ScanSpec {
  std::vector<double> frequencies_ghz;
  std::vector<double> delays_s;  // empty -> filled with the default schedule
  int shots = 500;
};

struct ExperimentPlan {
  std::vector<int> m_set = {2, 6, 13, 25, 50, 100, 200};
  int cycles = 1;
  int shots_per_variant = 1000;
  double cycle_period_h = 0.0;
  std::optional<T1ScanSpec> t1_scan;
};

/// Fitted relaxation time at one (cycle, frequency); missing when the decay
/// fit failed.
struct T1Sample {
  int cycle = 0;
  double wall_time_h = 0.0;
  double frequency_ghz = 0.0;
  std::optional<double> t1_s;
};

struct RunOutput {
  std::vector<MeasurementRecord> records;
  std::vector<T1Sample> t1_samples;
};

/// Default T1 sampling schedule: 8 log-spaced delays from one gate time up to
/// 3 * t1_base.
std::vector<double> default_t1_delays(const ScenarioConfig& scenario);

/// Checks plan invariants against the scenario; empty string when valid.
/// The cycle period must cover the simulated busy time (all shots of all
/// variants plus the T1 scan).
std::string validate_plan(const ExperimentPlan& plan, const ScenarioConfig& scenario);

/// Fresh random gates for every length, with all four variants compiled.
PBSequence build_pb_sequence(const std::vector<int>& m_set, RngStream& rng);

/// Noiseless-gate + per-gate-channel evolution of one compiled variant,
/// measured against the ground axis.
double sequence_survival(const std::vector<int>& gates, int compiled_element,
                         const PauliTransferMap& channel);

/// Survival probabilities of all four variants (they share the state after
/// the random gates).
std::array<double, 4> variant_survivals(const SubSequence& sub, const PauliTransferMap& channel);

/// Executes one variant with finite shots.
MeasurementRecord execute_sequence(const SubSequence& sub, Variant variant,
                                   const PauliTransferMap& channel, int shots, RngStream& rng);

/// Runs the full cycle loop: advances the environment per cycle, executes one
/// PB sequence per operating point, optionally scans T1 across the configured
/// grid. Records appear in deterministic (cycle, point, length, variant)
/// order regardless of `workers`.
RunOutput run_cycles(const ExperimentPlan& plan, const ScenarioConfig& scenario, int workers = 1);

/// One spectrotemporal column: per grid frequency, simulate the exponential
/// relaxation decay with shot noise and fit T1 back out.
std::vector<T1Sample> t1_scan(const ScenarioConfig& scenario, const T1ScanSpec& scan,
                              const EnvironmentState& env, int cycle, RngStream& rng);

}  // namespace pbsim
