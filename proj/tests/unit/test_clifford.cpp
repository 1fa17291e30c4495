#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "pbsim/bloch.hpp"
#include "pbsim/clifford.hpp"
#include "pbsim/rng.hpp"

using namespace pbsim;

namespace {

IntMat3 imul(const IntMat3& a, const IntMat3& b) {
  IntMat3 out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
  return out;
}

int idet(const IntMat3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

// Brute-force oracle: every signed permutation, split by determinant.
std::set<IntMat3> enumerate_signed_permutations(int want_det) {
  std::set<IntMat3> out;
  int perm[3] = {0, 1, 2};
  std::sort(perm, perm + 3);
  do {
    for (int signs = 0; signs < 8; ++signs) {
      IntMat3 m{};
      for (int row = 0; row < 3; ++row) m[row][perm[row]] = (signs >> row) & 1 ? -1 : 1;
      if (idet(m) == want_det) out.insert(m);
    }
  } while (std::next_permutation(perm, perm + 3));
  return out;
}

const IntMat3 kIdentity = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

Vec3 apply_int(const IntMat3& m, const Vec3& v) {
  Vec3 out{};
  for (int i = 0; i < 3; ++i)
    out[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
  return out;
}

}  // namespace

TEST_SUITE("clifford") {

TEST_CASE("enumeration: 24 distinct proper signed permutations, identity first") {
  const auto& group = clifford_group();
  REQUIRE(group.size() == 24);
  CHECK(group[0].rot == kIdentity);

  const auto proper = enumerate_signed_permutations(+1);
  CHECK(proper.size() == 24);
  CHECK(enumerate_signed_permutations(-1).size() == 24);  // 48 total

  std::set<IntMat3> seen;
  for (const auto& g : group) {
    CHECK(idet(g.rot) == 1);
    CHECK(proper.count(g.rot) == 1);
    seen.insert(g.rot);
  }
  CHECK(seen.size() == 24);  // all distinct, equal to the oracle set
}

TEST_CASE("closure: every pairwise product is in the group") {
  for (int a = 0; a < 24; ++a) {
    for (int b = 0; b < 24; ++b) {
      const int c = clifford_compose(a, b);
      CHECK(clifford_element(c).rot == imul(clifford_element(a).rot, clifford_element(b).rot));
    }
  }
}

TEST_CASE("group axioms") {
  // Identity and inverses.
  for (int g = 0; g < 24; ++g) {
    CHECK(clifford_compose(0, g) == g);
    CHECK(clifford_compose(g, 0) == g);
    CHECK(clifford_compose(clifford_inverse(g), g) == 0);
    CHECK(clifford_compose(g, clifford_inverse(g)) == 0);
    CHECK(clifford_inverse(clifford_inverse(g)) == g);
  }
  // Unique inverses: the inverse table is a permutation.
  std::set<int> inverses;
  for (int g = 0; g < 24; ++g) inverses.insert(clifford_inverse(g));
  CHECK(inverses.size() == 24);

  // Associativity over all 24^3 triples.
  bool associative = true;
  for (int a = 0; a < 24 && associative; ++a)
    for (int b = 0; b < 24 && associative; ++b)
      for (int c = 0; c < 24; ++c)
        if (clifford_compose(clifford_compose(a, b), c) !=
            clifford_compose(a, clifford_compose(b, c))) {
          associative = false;
          break;
        }
  CHECK(associative);
}

TEST_CASE("specific elements") {
  // X_pi squared is the identity.
  const IntMat3 x_pi = {{{1, 0, 0}, {0, -1, 0}, {0, 0, -1}}};
  int x_index = -1;
  for (const auto& g : clifford_group()) {
    if (g.rot == x_pi) x_index = g.index;
  }
  REQUIRE(x_index >= 0);
  CHECK(clifford_compose(x_index, x_index) == 0);

  // Inverse of the +pi/2 z-rotation is the -pi/2 z-rotation (its transpose).
  const IntMat3 z_quarter = {{{0, -1, 0}, {1, 0, 0}, {0, 0, 1}}};
  const IntMat3 z_quarter_inv = {{{0, 1, 0}, {-1, 0, 0}, {0, 0, 1}}};
  int zq = -1, zq_inv = -1;
  for (const auto& g : clifford_group()) {
    if (g.rot == z_quarter) zq = g.index;
    if (g.rot == z_quarter_inv) zq_inv = g.index;
  }
  REQUIRE(zq >= 0);
  REQUIRE(zq_inv >= 0);
  CHECK(clifford_inverse(zq) == zq_inv);
  CHECK(clifford_inverse(0) == 0);
}

TEST_CASE("uniform sampling: determinism, counts, chi-square") {
  RngStream r1(100), r2(100);
  CHECK(sample_uniform_cliffords(r1, 50) == sample_uniform_cliffords(r2, 50));
  CHECK(sample_uniform_cliffords(r1, 0).empty());

  RngStream rng(101);
  std::vector<int> counts(24, 0);
  for (const int g : sample_uniform_cliffords(rng, 24000)) ++counts[g];
  for (const int c : counts) {
    CHECK(c >= 800);
    CHECK(c <= 1200);
  }

  RngStream rng2(102);
  std::vector<int> counts2(24, 0);
  for (const int g : sample_uniform_cliffords(rng2, 100000)) ++counts2[g];
  double chi2 = 0.0;
  const double expected = 100000.0 / 24.0;
  for (const int c : counts2) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < 49.728);  // 0.999 quantile, 23 dof
}

TEST_CASE("compiled inverse: net rotation equals the basis rotation exactly") {
  RngStream rng(103);
  const IntMat3 basis_x = {{{0, 0, 1}, {0, 1, 0}, {-1, 0, 0}}};
  const IntMat3 basis_y = {{{1, 0, 0}, {0, 0, 1}, {0, -1, 0}}};
  const IntMat3 flip_x = {{{1, 0, 0}, {0, -1, 0}, {0, 0, -1}}};

  CHECK(compile_inverse({}, MeasureBasis::kZ, false) == 0);

  for (int trial = 0; trial < 50; ++trial) {
    const int m = static_cast<int>(rng.uniform_int(30));
    const auto gates = sample_uniform_cliffords(rng, m);
    const IntMat3 seq = sequence_rotation(gates);
    const struct {
      MeasureBasis basis;
      bool flip;
      IntMat3 want;  // net = want after undoing the sequence
    } cases[] = {
        {MeasureBasis::kZ, false, kIdentity},
        {MeasureBasis::kX, false, basis_x},
        {MeasureBasis::kY, false, basis_y},
        {MeasureBasis::kZ, true, flip_x},
        {MeasureBasis::kX, true, imul(basis_x, flip_x)},
    };
    for (const auto& tc : cases) {
      const int compiled = compile_inverse(gates, tc.basis, tc.flip);
      const IntMat3 net = imul(clifford_element(compiled).rot, seq);
      CHECK(net == tc.want);
    }
  }
}

TEST_CASE("net map sends the z axis to the measurement axis") {
  RngStream rng(104);
  for (int trial = 0; trial < 20; ++trial) {
    const auto gates = sample_uniform_cliffords(rng, 12);
    const IntMat3 seq = sequence_rotation(gates);

    const auto net_image = [&](MeasureBasis basis, bool flip) {
      const IntMat3 net = imul(clifford_element(compile_inverse(gates, basis, flip)).rot, seq);
      return apply_int(net, {0, 0, 1});
    };
    CHECK(net_image(MeasureBasis::kZ, false) == Vec3{0, 0, 1});
    CHECK(net_image(MeasureBasis::kX, false) == Vec3{1, 0, 0});
    CHECK(net_image(MeasureBasis::kY, false) == Vec3{0, 1, 0});
    CHECK(net_image(MeasureBasis::kZ, true) == Vec3{0, 0, -1});
  }
}

}  // TEST_SUITE
