#include "pbsim/clifford.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace pbsim {

namespace {

IntMat3 int_identity() {
  return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
}

IntMat3 int_matmul(const IntMat3& a, const IntMat3& b) {
  IntMat3 out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
  return out;
}

IntMat3 int_transpose(const IntMat3& m) {
  IntMat3 out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[i][j] = m[j][i];
  return out;
}

int det3(const IntMat3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

// Unique key: 9 base-3 digits of (entry + 1), row major.
int encode(const IntMat3& m) {
  int key = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) key = key * 3 + (m[i][j] + 1);
  return key;
}

struct GroupTables {
  std::vector<CliffordElement> elements;
  std::vector<Mat3> rotations;
  std::array<std::array<int, 24>, 24> compose{};
  std::array<int, 24> inverse{};
  std::unordered_map<int, int> index_by_key;

  GroupTables() {
    // Enumerate the 48 signed permutations, keep det +1.
    std::vector<IntMat3> proper;
    int perm[3] = {0, 1, 2};
    std::sort(perm, perm + 3);
    do {
      for (int signs = 0; signs < 8; ++signs) {
        IntMat3 m{};
        for (int row = 0; row < 3; ++row) {
          m[row][perm[row]] = (signs >> row) & 1 ? -1 : 1;
        }
        if (det3(m) == 1) proper.push_back(m);
      }
    } while (std::next_permutation(perm, perm + 3));

    // Identity first, the rest in ascending encoding order.
    const IntMat3 id = int_identity();
    std::sort(proper.begin(), proper.end(),
              [](const IntMat3& a, const IntMat3& b) { return encode(a) < encode(b); });
    std::stable_partition(proper.begin(), proper.end(),
                          [&](const IntMat3& m) { return m == id; });

    elements.resize(proper.size());
    rotations.resize(proper.size());
    for (std::size_t i = 0; i < proper.size(); ++i) {
      elements[i] = CliffordElement{static_cast<int>(i), proper[i]};
      index_by_key.emplace(encode(proper[i]), static_cast<int>(i));
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) rotations[i][r][c] = static_cast<double>(proper[i][r][c]);
    }
    if (elements.size() != 24) throw std::logic_error("Clifford enumeration went wrong");

    for (int a = 0; a < 24; ++a) {
      for (int b = 0; b < 24; ++b) {
        compose[a][b] = index_by_key.at(encode(int_matmul(elements[a].rot, elements[b].rot)));
      }
      inverse[a] = index_by_key.at(encode(int_transpose(elements[a].rot)));
    }
  }

  int lookup(const IntMat3& m) const {
    const auto it = index_by_key.find(encode(m));
    if (it == index_by_key.end()) throw std::logic_error("matrix is not a Clifford rotation");
    return it->second;
  }
};

const GroupTables& tables() {
  static const GroupTables t;
  return t;
}

}  // namespace

const std::vector<CliffordElement>& clifford_group() { return tables().elements; }

const CliffordElement& clifford_element(int index) {
  if (index < 0 || index >= 24) throw std::out_of_range("clifford_element: bad index");
  return tables().elements[index];
}

int clifford_compose(int a, int b) {
  if (a < 0 || a >= 24 || b < 0 || b >= 24) throw std::out_of_range("clifford_compose: bad index");
  return tables().compose[a][b];
}

int clifford_inverse(int g) {
  if (g < 0 || g >= 24) throw std::out_of_range("clifford_inverse: bad index");
  return tables().inverse[g];
}

const Mat3& clifford_rotation(int g) {
  if (g < 0 || g >= 24) throw std::out_of_range("clifford_rotation: bad index");
  return tables().rotations[g];
}

std::vector<int> sample_uniform_cliffords(RngStream& rng, int count) {
  if (count < 0) throw std::invalid_argument("sample_uniform_cliffords: negative count");
  std::vector<int> out(static_cast<std::size_t>(count));
  for (auto& g : out) g = static_cast<int>(rng.uniform_int(24));
  return out;
}

IntMat3 sequence_rotation(const std::vector<int>& gates) {
  IntMat3 net = int_identity();
  for (const int g : gates) net = int_matmul(clifford_element(g).rot, net);
  return net;
}

int compile_inverse(const std::vector<int>& gates, MeasureBasis basis, bool flip) {
  static const IntMat3 kBasisX = {{{0, 0, 1}, {0, 1, 0}, {-1, 0, 0}}};   // +pi/2 about y
  static const IntMat3 kBasisY = {{{1, 0, 0}, {0, 0, 1}, {0, -1, 0}}};   // -pi/2 about x
  static const IntMat3 kFlipX = {{{1, 0, 0}, {0, -1, 0}, {0, 0, -1}}};   // pi about x

  IntMat3 compiled = int_transpose(sequence_rotation(gates));
  if (flip) compiled = int_matmul(kFlipX, compiled);
  switch (basis) {
    case MeasureBasis::kZ:
      break;
    case MeasureBasis::kX:
      compiled = int_matmul(kBasisX, compiled);
      break;
    case MeasureBasis::kY:
      compiled = int_matmul(kBasisY, compiled);
      break;
  }
  return tables().lookup(compiled);
}

}  // namespace pbsim
