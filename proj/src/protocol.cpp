#include "pbsim/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>

#include "pbsim/fitting.hpp"

namespace pbsim {

namespace {

// Child indices of the master stream; see README for the full layout.
constexpr std::uint64_t kEnvStream = 0;
constexpr std::uint64_t kCycleStream = 1;
constexpr std::uint64_t kT1Stream = 2;

void parallel_for(int count, int workers, const std::function<void(int)>& body) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += workers) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kZ: return "z";
    case Variant::kX: return "x";
    case Variant::kY: return "y";
    case Variant::kZFlip: return "z_flip";
  }
  return "?";
}

std::optional<Variant> parse_variant(const std::string& name) {
  for (const Variant v : kAllVariants) {
    if (name == variant_name(v)) return v;
  }
  return std::nullopt;
}

std::vector<double> default_t1_delays(const ScenarioConfig& scenario) {
  constexpr int kPoints = 8;
  std::vector<double> delays(kPoints);
  const double lo = std::log(scenario.gate_time_s);
  const double hi = std::log(3.0 * scenario.t1_base_s);
  for (int i = 0; i < kPoints; ++i) {
    delays[i] = std::exp(lo + (hi - lo) * i / (kPoints - 1));
  }
  return delays;
}

std::string validate_plan(const ExperimentPlan& plan, const ScenarioConfig& scenario) {
  if (plan.m_set.empty()) return "m_set must not be empty";
  int prev = 0;
  for (const int m : plan.m_set) {
    if (m < 1) return "sequence lengths must be >= 1";
    if (m <= prev && prev != 0) return "m_set must be strictly increasing";
    prev = m;
  }
  if (plan.cycles < 1) return "cycles must be >= 1";
  if (plan.shots_per_variant < 1) return "shots_per_variant must be >= 1";
  if (plan.cycle_period_h <= 0.0) return "cycle_period must be positive";

  // Busy time: every gate of every shot, plus the T1 delays.
  double busy_s = 0.0;
  double gates_per_pb = 0.0;
  for (const int m : plan.m_set) gates_per_pb += m + 1;
  busy_s += gates_per_pb * 4.0 * plan.shots_per_variant * scenario.gate_time_s *
            static_cast<double>(scenario.operating_points.size());
  if (plan.t1_scan) {
    const auto delays =
        plan.t1_scan->delays_s.empty() ? default_t1_delays(scenario) : plan.t1_scan->delays_s;
    if (plan.t1_scan->frequencies_ghz.empty()) return "t1_scan requires a frequency grid";
    if (plan.t1_scan->shots < 1) return "t1_scan shots must be >= 1";
    double delay_sum = 0.0;
    for (const double d : delays) {
      if (d <= 0.0) return "t1_scan delays must be positive";
      delay_sum += d;
    }
    busy_s += delay_sum * plan.t1_scan->shots *
              static_cast<double>(plan.t1_scan->frequencies_ghz.size());
  }
  if (plan.cycle_period_h * 3600.0 < busy_s) {
    return "cycle_period shorter than the simulated busy time";
  }
  return {};
}

PBSequence build_pb_sequence(const std::vector<int>& m_set, RngStream& rng) {
  PBSequence seq;
  seq.subs.reserve(m_set.size());
  for (const int m : m_set) {
    SubSequence sub;
    sub.m = m;
    sub.gates = sample_uniform_cliffords(rng, m);
    sub.compiled[static_cast<int>(Variant::kZ)] =
        compile_inverse(sub.gates, MeasureBasis::kZ, false);
    sub.compiled[static_cast<int>(Variant::kX)] =
        compile_inverse(sub.gates, MeasureBasis::kX, false);
    sub.compiled[static_cast<int>(Variant::kY)] =
        compile_inverse(sub.gates, MeasureBasis::kY, false);
    sub.compiled[static_cast<int>(Variant::kZFlip)] =
        compile_inverse(sub.gates, MeasureBasis::kZ, true);
    seq.subs.push_back(std::move(sub));
  }
  return seq;
}

namespace {

BlochVector state_after_gates(const std::vector<int>& gates, const PauliTransferMap& channel) {
  BlochVector state = BlochVector::from_vec(kGroundAxis);
  for (const int g : gates) {
    state = BlochVector::from_vec(matvec(clifford_rotation(g), state.vec()));
    state = apply_map(channel, state);
  }
  return state;
}

double finish_variant(const BlochVector& pre_inverse, int compiled,
                      const PauliTransferMap& channel) {
  BlochVector state =
      BlochVector::from_vec(matvec(clifford_rotation(compiled), pre_inverse.vec()));
  state = apply_map(channel, state);
  return survival_probability(state, kGroundAxis);
}

}  // namespace

double sequence_survival(const std::vector<int>& gates, int compiled_element,
                         const PauliTransferMap& channel) {
  return finish_variant(state_after_gates(gates, channel), compiled_element, channel);
}

std::array<double, 4> variant_survivals(const SubSequence& sub, const PauliTransferMap& channel) {
  const BlochVector shared = state_after_gates(sub.gates, channel);
  std::array<double, 4> out{};
  for (int v = 0; v < 4; ++v) out[v] = finish_variant(shared, sub.compiled[v], channel);
  return out;
}

MeasurementRecord execute_sequence(const SubSequence& sub, Variant variant,
                                   const PauliTransferMap& channel, int shots, RngStream& rng) {
  const double prob = sequence_survival(sub.gates, sub.compiled[static_cast<int>(variant)],
                                        channel);
  const ShotCounts counts = sample_counts(prob, shots, rng);
  MeasurementRecord rec;
  rec.m = sub.m;
  rec.variant = variant;
  rec.shots = counts.shots;
  rec.ones = counts.ones;
  return rec;
}

std::vector<T1Sample> t1_scan(const ScenarioConfig& scenario, const T1ScanSpec& scan,
                              const EnvironmentState& env, int cycle, RngStream& rng) {
  const std::vector<double> delays =
      scan.delays_s.empty() ? default_t1_delays(scenario) : scan.delays_s;
  std::vector<T1Sample> out;
  out.reserve(scan.frequencies_ghz.size());
  const double tau_max = *std::max_element(delays.begin(), delays.end());

  for (std::size_t fi = 0; fi < scan.frequencies_ghz.size(); ++fi) {
    const double f = scan.frequencies_ghz[fi];
    const double t1 = t1_effective(f, scenario, env.telegraph, env.drift);
    RngStream freq_rng = rng.child(fi);

    std::vector<FitPoint> pts;
    pts.reserve(delays.size());
    for (const double tau : delays) {
      const double p_excited = std::exp(-tau / t1);
      const ShotCounts counts = sample_counts(p_excited, scan.shots, freq_rng);
      // Fit in units of the longest delay so the rate stays well scaled.
      pts.push_back({tau / tau_max, static_cast<double>(counts.ones) / counts.shots, 1.0});
    }

    T1Sample sample;
    sample.cycle = cycle;
    sample.wall_time_h = env.wall_time_h;
    sample.frequency_ghz = f;
    const DecayFit fit = fit_decay(pts, DecayModel::kZeroOffset);
    if (fit.ok && fit.rate > 0.0 && fit.rate < 1.0) {
      sample.t1_s = -tau_max / std::log(fit.rate);
    }
    out.push_back(sample);
  }
  return out;
}

RunOutput run_cycles(const ExperimentPlan& plan, const ScenarioConfig& scenario, int workers) {
  if (auto err = validate_scenario(scenario); !err.empty()) {
    throw std::invalid_argument("scenario: " + err);
  }
  if (auto err = validate_plan(plan, scenario); !err.empty()) {
    throw std::invalid_argument("plan: " + err);
  }

  const auto n_points = static_cast<int>(scenario.operating_points.size());
  const auto n_lengths = static_cast<int>(plan.m_set.size());

  RngStream master(scenario.seed);
  RngStream env_rng = master.child(kEnvStream);
  const RngStream cycle_root = master.child(kCycleStream);
  const RngStream t1_root = master.child(kT1Stream);

  RunOutput out;
  out.records.resize(static_cast<std::size_t>(plan.cycles) * n_points * n_lengths * 4);

  EnvironmentState env;
  for (int cycle = 0; cycle < plan.cycles; ++cycle) {
    if (cycle > 0) env = advance_environment(env, plan.cycle_period_h, scenario, env_rng);
    const double wall_time = cycle * plan.cycle_period_h;
    const RngStream cycle_rng = cycle_root.child(cycle);

    struct PointWork {
      PBSequence sequence;
      PauliTransferMap channel;
      RngStream stream;
    };
    std::vector<PointWork> work;
    work.reserve(n_points);
    for (int pi = 0; pi < n_points; ++pi) {
      RngStream pt_stream = cycle_rng.child(pi);
      RngStream gate_rng = pt_stream.child(0);
      work.push_back({build_pb_sequence(plan.m_set, gate_rng),
                      gate_channel(scenario, scenario.operating_points[pi], env),
                      std::move(pt_stream)});
    }

    parallel_for(n_points * n_lengths, workers, [&](int task) {
      const int pi = task / n_lengths;
      const int si = task % n_lengths;
      const PointWork& pw = work[pi];
      const SubSequence& sub = pw.sequence.subs[si];
      const auto survivals = variant_survivals(sub, pw.channel);
      const std::int64_t sequence_id =
          (static_cast<std::int64_t>(cycle) * n_points + pi) * n_lengths + si;
      for (int v = 0; v < 4; ++v) {
        RngStream shot_rng = pw.stream.child(1 + static_cast<std::uint64_t>(si) * 4 + v);
        const ShotCounts counts = sample_counts(survivals[v], plan.shots_per_variant, shot_rng);
        MeasurementRecord rec;
        rec.cycle = cycle;
        rec.wall_time_h = wall_time;
        rec.point_label = scenario.operating_points[pi].label;
        rec.m = sub.m;
        rec.variant = static_cast<Variant>(v);
        rec.shots = counts.shots;
        rec.ones = counts.ones;
        rec.sequence_id = sequence_id;
        const std::size_t slot =
            ((static_cast<std::size_t>(cycle) * n_points + pi) * n_lengths + si) * 4 + v;
        out.records[slot] = std::move(rec);
      }
    });

    if (plan.t1_scan) {
      EnvironmentState scan_env = env;
      scan_env.wall_time_h = wall_time;
      RngStream scan_rng = t1_root.child(cycle);
      auto samples = t1_scan(scenario, *plan.t1_scan, scan_env, cycle, scan_rng);
      out.t1_samples.insert(out.t1_samples.end(), samples.begin(), samples.end());
    }
  }
  return out;
}

}  // namespace pbsim
