// Copyright 2026 The rydcz Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

/// Basis bookkeeping for two three-level atoms {|0>, |1>, |r>}.
///
/// Two-atom states are ordered row-major with the first atom major:
/// index(a, b) = 3 * idx(a) + idx(b), so |00> = 0, |01> = 1, ... |rr> = 8.
/// All frequencies are angular (rad/s) and hbar = 1.

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <utility>

namespace rydcz {

using cplx = std::complex<double>;
using Mat3 = Eigen::Matrix<cplx, 3, 3>;
using Mat4 = Eigen::Matrix<cplx, 4, 4>;
using Mat9 = Eigen::Matrix<cplx, 9, 9>;
using Vec9 = Eigen::Matrix<cplx, 9, 1>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kMHz = 1.0e6;

/// Converts a frequency quoted as f/(2 pi) in MHz to rad/s.
constexpr double mhz_to_rad(double f_mhz) { return kTwoPi * f_mhz * kMHz; }

enum class AtomLevel : int { g0 = 0, g1 = 1, ryd = 2 };

inline constexpr std::array<AtomLevel, 3> kLevels{AtomLevel::g0, AtomLevel::g1, AtomLevel::ryd};

constexpr int level_index(AtomLevel x) { return static_cast<int>(x); }

constexpr int basis_index(AtomLevel a, AtomLevel b) { return 3 * level_index(a) + level_index(b); }

/// Inverse of basis_index.
constexpr std::pair<AtomLevel, AtomLevel> basis_levels(int index) {
  if (index < 0 || index > 8) throw std::out_of_range("two-atom basis index outside [0, 8]");
  return {static_cast<AtomLevel>(index / 3), static_cast<AtomLevel>(index % 3)};
}

/// Computational states |00>, |01>, |10>, |11> in the 9-dimensional basis.
inline constexpr std::array<int, 4> kComputationalIndices{
    basis_index(AtomLevel::g0, AtomLevel::g0), basis_index(AtomLevel::g0, AtomLevel::g1),
    basis_index(AtomLevel::g1, AtomLevel::g0), basis_index(AtomLevel::g1, AtomLevel::g1)};

inline constexpr int kDoubleRydberg = basis_index(AtomLevel::ryd, AtomLevel::ryd);

/// |x><y| on a single atom.
inline Mat3 ket_bra(AtomLevel x, AtomLevel y) {
  Mat3 m = Mat3::Zero();
  m(level_index(x), level_index(y)) = 1.0;
  return m;
}

/// P_x = |x><x|.
inline Mat3 projector(AtomLevel x) { return ket_bra(x, x); }

/// Kronecker product with the first factor acting on the first atom.
inline Mat9 tensor(const Mat3& a, const Mat3& b) {
  Mat9 out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.block<3, 3>(3 * i, 3 * j) = a(i, j) * b;
  return out;
}

/// H_d = (omega/2)(|r><1| + |1><r|) + delta |r><r|.
inline Mat3 single_atom_drive(double omega, double delta) {
  Mat3 h = Mat3::Zero();
  const int one = level_index(AtomLevel::g1);
  const int ryd = level_index(AtomLevel::ryd);
  h(ryd, one) = 0.5 * omega;
  h(one, ryd) = 0.5 * omega;
  h(ryd, ryd) = delta;
  return h;
}

/// |rr><rr| in the two-atom space.
inline Mat9 double_rydberg_projector() {
  Mat9 m = Mat9::Zero();
  m(kDoubleRydberg, kDoubleRydberg) = 1.0;
  return m;
}

/// Largest entry modulus.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().maxCoeff();
}

/// ||H - H^dagger||_max.
inline double hermiticity_defect(const Mat9& h) { return max_abs(h - h.adjoint()); }

/// ||U^dagger U - I||_max.
inline double unitarity_defect(const Mat9& u) {
  return max_abs(u.adjoint() * u - Mat9::Identity());
}

}  // namespace rydcz
