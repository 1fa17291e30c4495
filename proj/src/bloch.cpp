#include "pbsim/bloch.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>

namespace pbsim {

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

Vec3 matvec(const Mat3& m, const Vec3& v) {
  Vec3 out{};
  for (int i = 0; i < 3; ++i) out[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
  return out;
}

Mat3 matmul(const Mat3& a, const Mat3& b) {
  Mat3 out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
  return out;
}

Mat3 transpose(const Mat3& m) {
  Mat3 out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[i][j] = m[j][i];
  return out;
}

double trace(const Mat3& m) { return m[0][0] + m[1][1] + m[2][2]; }

Mat3 identity_mat3() {
  return {{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
}

namespace {

using Matrix4cd = Eigen::Matrix4cd;
using Matrix2cd = Eigen::Matrix2cd;

std::array<Matrix2cd, 4> pauli_basis() {
  const std::complex<double> i(0.0, 1.0);
  Matrix2cd id, sx, sy, sz;
  id << 1, 0, 0, 1;
  sx << 0, 1, 1, 0;
  sy << 0, -i, i, 0;
  sz << 1, 0, 0, -1;
  return {id, sx, sy, sz};
}

// Choi state (trace 1) of the channel from its 4x4 Pauli transfer matrix
// R = [[1, 0], [t, M]]: J = (1/4) sum_ij R_ji sigma_j (x) sigma_i^T.
Matrix4cd choi_state(const PauliTransferMap& map) {
  const auto sigma = pauli_basis();
  double r[4][4] = {};
  r[0][0] = 1.0;
  for (int i = 0; i < 3; ++i) {
    r[i + 1][0] = map.t[i];
    for (int j = 0; j < 3; ++j) r[i + 1][j + 1] = map.m[i][j];
  }
  Matrix4cd j = Matrix4cd::Zero();
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      if (r[a][b] == 0.0) continue;
      Matrix4cd term;
      const Matrix2cd left = sigma[a];
      const Matrix2cd right = sigma[b].transpose();
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q)
          term.block<2, 2>(2 * p, 2 * q) = left(p, q) * right;
      j += r[a][b] * term;
    }
  }
  return 0.25 * j;
}

}  // namespace

double choi_min_eigenvalue(const PauliTransferMap& map) {
  Eigen::SelfAdjointEigenSolver<Matrix4cd> solver(choi_state(map));
  return solver.eigenvalues().minCoeff();
}

bool is_completely_positive(const PauliTransferMap& map, double tol) {
  return choi_min_eigenvalue(map) >= -tol;
}

double purity(const BlochVector& state) { return 0.5 * (1.0 + state.norm2()); }

double purity_metric(const BlochVector& state) { return state.norm2(); }

BlochVector apply_map(const PauliTransferMap& map, const BlochVector& state) {
  Vec3 out = matvec(map.m, state.vec());
  for (int i = 0; i < 3; ++i) out[i] += map.t[i];
  const BlochVector result = BlochVector::from_vec(out);
  if (result.norm2() > 1.0 + 4e-9) {
    throw std::domain_error("apply_map: output left the Bloch ball (malformed map)");
  }
  return result;
}

double channel_unitarity(const PauliTransferMap& map) {
  double sum = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) sum += map.m[i][j] * map.m[i][j];
  return sum / 3.0;
}

double channel_avg_infidelity(const PauliTransferMap& map) {
  return (3.0 - trace(map.m)) / 6.0;
}

double survival_probability(const BlochVector& state, const Vec3& target_axis) {
  const double n = norm(target_axis);
  if (std::abs(n - 1.0) > 1e-6) {
    throw std::invalid_argument("survival_probability: target axis must be unit length");
  }
  return 0.5 * (1.0 + dot(state.vec(), target_axis));
}

ShotCounts sample_counts(double prob, int shots, RngStream& rng) {
  if (shots <= 0) throw std::invalid_argument("sample_counts: shots must be positive");
  if (prob < 0.0 || prob > 1.0) throw std::invalid_argument("sample_counts: invalid probability");
  return ShotCounts{shots, rng.binomial(shots, prob)};
}

PauliTransferMap identity_map() { return PauliTransferMap{}; }

PauliTransferMap depolarizing_map(double p) {
  PauliTransferMap map;
  map.m = {{{p, 0, 0}, {0, p, 0}, {0, 0, p}}};
  return map;
}

PauliTransferMap amplitude_damping_map(double gamma) {
  const double s = std::sqrt(1.0 - gamma);
  PauliTransferMap map;
  map.m = {{{s, 0, 0}, {0, s, 0}, {0, 0, 1.0 - gamma}}};
  map.t = {0.0, 0.0, -gamma};
  return map;
}

PauliTransferMap dephasing_map(double factor) {
  PauliTransferMap map;
  map.m = {{{factor, 0, 0}, {0, factor, 0}, {0, 0, 1.0}}};
  return map;
}

PauliTransferMap rotation_map(const Vec3& axis, double angle) {
  const double n = norm(axis);
  if (std::abs(n - 1.0) > 1e-6) {
    throw std::invalid_argument("rotation_map: axis must be unit length");
  }
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double ic = 1.0 - c;
  const auto [ux, uy, uz] = axis;
  PauliTransferMap map;
  map.m = {{{c + ux * ux * ic, ux * uy * ic - uz * s, ux * uz * ic + uy * s},
            {uy * ux * ic + uz * s, c + uy * uy * ic, uy * uz * ic - ux * s},
            {uz * ux * ic - uy * s, uz * uy * ic + ux * s, c + uz * uz * ic}}};
  return map;
}

PauliTransferMap compose_maps(const PauliTransferMap& after, const PauliTransferMap& before) {
  PauliTransferMap out;
  out.m = matmul(after.m, before.m);
  out.t = matvec(after.m, before.t);
  for (int i = 0; i < 3; ++i) out.t[i] += after.t[i];
  return out;
}

}  // namespace pbsim
