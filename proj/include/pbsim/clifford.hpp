#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pbsim/bloch.hpp"
#include "pbsim/rng.hpp"

namespace pbsim {

using IntMat3 = std::array<std::array<int, 3>, 3>;

/// One of the 24 single-qubit Clifford gates, represented by its exact action
/// on Pauli axes: a signed permutation matrix with determinant +1. Global
/// phase carries no weight in any benchmarked quantity, so the SO(3) picture
/// is lossless here and keeps every group operation in integer arithmetic.
struct CliffordElement {
  int index = 0;
  IntMat3 rot{};
};

enum class MeasureBasis { kZ, kX, kY };

/// A random gate list plus the single compiled element that inverts it
/// (optionally rotated into a measurement basis and/or flipped).
struct GateSequence {
  std::vector<int> gates;  // applied in order: gates[0] first
  int inverse_element = 0;
};

/// All 24 elements; index 0 is the identity, the rest follow a fixed
/// encoding order. Built once, immutable afterwards.
const std::vector<CliffordElement>& clifford_group();

const CliffordElement& clifford_element(int index);

/// Index of the element with rot(a) * rot(b).
int clifford_compose(int a, int b);

/// Index of the element with rot(g)^-1 (= transpose).
int clifford_inverse(int g);

/// Floating-point rotation matrix of element g (for channel algebra).
const Mat3& clifford_rotation(int g);

/// i.i.d. uniform draws over the 24 elements.
std::vector<int> sample_uniform_cliffords(RngStream& rng, int count);

/// The single element equal to R_basis * [X_pi if flip] * (g_m ... g_1)^-1.
///
/// R_z is the identity; R_x is the +pi/2 rotation about y and R_y the -pi/2
/// rotation about x, so that after the compiled gate a z-axis measurement
/// reads the x (resp. y) component of the pre-inversion state. `flip`
/// steers the sequence target to the opposite pole.
int compile_inverse(const std::vector<int>& gates, MeasureBasis basis, bool flip);

/// Net Bloch rotation rot(g_m) ... rot(g_1) of a gate list (exact integers).
IntMat3 sequence_rotation(const std::vector<int>& gates);

}  // namespace pbsim
