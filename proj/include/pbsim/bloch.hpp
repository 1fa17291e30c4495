#pragma once

#include <array>
#include <cstdint>

#include "pbsim/rng.hpp"

namespace pbsim {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

double dot(const Vec3& a, const Vec3& b);
double norm(const Vec3& v);
Vec3 matvec(const Mat3& m, const Vec3& v);
Mat3 matmul(const Mat3& a, const Mat3& b);
Mat3 transpose(const Mat3& m);
double trace(const Mat3& m);
Mat3 identity_mat3();

/// Qubit state as the real expectation vector (<sx>, <sy>, <sz>).
struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 vec() const { return {x, y, z}; }
  static BlochVector from_vec(const Vec3& v) { return {v[0], v[1], v[2]}; }
  double norm2() const { return x * x + y * y + z * z; }
  /// Inside the closed Bloch ball, up to `tol` on the squared norm.
  bool is_physical(double tol = 1e-9) const { return norm2() <= 1.0 + tol; }
};

/// Affine action of a qubit channel on Bloch vectors: a -> M a + t.
/// The 3x3 unital block M and shift t fully determine a trace-preserving
/// single-qubit map.
struct PauliTransferMap {
  Mat3 m = identity_mat3();
  Vec3 t = {0.0, 0.0, 0.0};
};

/// Raw outcome of repeated projective measurements along one axis.
struct ShotCounts {
  int shots = 0;
  int ones = 0;
};

inline constexpr double kCpTolerance = 1e-9;

/// Complete-positivity check: smallest eigenvalue of the reconstructed
/// Choi state must be >= -tol. Trace preservation is structural.
bool is_completely_positive(const PauliTransferMap& map, double tol = kCpTolerance);

/// Smallest Choi-state eigenvalue (diagnostic companion to the CP check).
double choi_min_eigenvalue(const PauliTransferMap& map);

/// Tr(rho^2) = (1 + |a|^2) / 2, in [1/2, 1] for physical states.
double purity(const BlochVector& state);

/// Identity-subtracted purity metric |a|^2 = sum_k <s_k>^2, in [0, 1].
double purity_metric(const BlochVector& state);

/// Applies the channel; throws std::domain_error if the output leaves the
/// Bloch ball beyond tolerance (a malformed map).
BlochVector apply_map(const PauliTransferMap& map, const BlochVector& state);

/// Unitarity u = Tr(M^T M) / 3: the Haar average of the identity-subtracted
/// output purity over pure inputs. 1 exactly for unitary channels.
double channel_unitarity(const PauliTransferMap& map);

/// Average gate infidelity eps = (3 - Tr M) / 6 = 1 - F_avg.
double channel_avg_infidelity(const PauliTransferMap& map);

/// Probability of projecting onto `target_axis`: (1 + a.n) / 2.
/// target_axis must be unit length.
double survival_probability(const BlochVector& state, const Vec3& target_axis);

/// Binomial shot sampling. Deterministic given the stream. shots must be > 0.
ShotCounts sample_counts(double prob, int shots, RngStream& rng);

// --- Channel constructors ------------------------------------------------

PauliTransferMap identity_map();

/// Uniform Bloch-vector shrink by p (p = 1 is the identity).
PauliTransferMap depolarizing_map(double p);

/// Relaxation toward the ground state at -z with excited-state decay
/// probability gamma.
PauliTransferMap amplitude_damping_map(double gamma);

/// Pure dephasing: multiplies the equatorial components by `factor`.
PauliTransferMap dephasing_map(double factor);

/// Rotation by `angle` about the unit `axis` (Rodrigues form).
PauliTransferMap rotation_map(const Vec3& axis, double angle);

/// after(before(x)): composition in application order.
PauliTransferMap compose_maps(const PauliTransferMap& after, const PauliTransferMap& before);

}  // namespace pbsim
