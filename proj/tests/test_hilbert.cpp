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


#include <random>

#include <gtest/gtest.h>

#include "rydcz/hamiltonian.hpp"
#include "rydcz/hilbert.hpp"

namespace rydcz {
namespace {

Mat3 random_mat3(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = cplx(n(rng), n(rng));
  return m;
}

TEST(Basis, IndexRoundTrip) {
  for (int i = 0; i < 9; ++i) {
    const auto [a, b] = basis_levels(i);
    EXPECT_EQ(basis_index(a, b), i);
  }
  EXPECT_EQ(basis_index(AtomLevel::g0, AtomLevel::g0), 0);
  EXPECT_EQ(basis_index(AtomLevel::g1, AtomLevel::g1), 4);
  EXPECT_EQ(basis_index(AtomLevel::ryd, AtomLevel::ryd), 8);
  EXPECT_EQ(kComputationalIndices, (std::array<int, 4>{0, 1, 3, 4}));
}

TEST(Basis, IndexOutOfRangeThrows) {
  EXPECT_THROW(basis_levels(9), std::out_of_range);
  EXPECT_THROW(basis_levels(-1), std::out_of_range);
}

TEST(Tensor, IdentityTimesIdentity) {
  EXPECT_EQ(max_abs(tensor(Mat3::Identity(), Mat3::Identity()) - Mat9::Identity()), 0.0);
}

TEST(Tensor, ProductOfProjectorsIsProjector) {
  const Mat9 p = tensor(projector(AtomLevel::g0), projector(AtomLevel::g1));
  Mat9 expect = Mat9::Zero();
  expect(1, 1) = 1.0;
  EXPECT_EQ(max_abs(p - expect), 0.0);
}

TEST(Tensor, TraceFactorizesAndEntriesMatch) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 5; ++k) {
    const Mat3 a = random_mat3(rng), b = random_mat3(rng);
    const Mat9 ab = tensor(a, b);
    EXPECT_LT(std::abs(ab.trace() - a.trace() * b.trace()), 1e-12);
    for (int i = 0; i < 9; ++i)
      for (int j = 0; j < 9; ++j) {
        const auto [ai, bi] = basis_levels(i);
        const auto [aj, bj] = basis_levels(j);
        EXPECT_EQ(ab(i, j), a(level_index(ai), level_index(aj)) * b(level_index(bi), level_index(bj)));
      }
  }
}

TEST(SingleAtomDrive, Examples) {
  EXPECT_EQ(max_abs(single_atom_drive(0.0, 0.0)), 0.0);
  const Mat3 h = single_atom_drive(mhz_to_rad(17.0), 0.0);
  EXPECT_DOUBLE_EQ(h(2, 1).real(), kTwoPi * 8.5e6);
  EXPECT_DOUBLE_EQ(h(1, 2).real(), kTwoPi * 8.5e6);
  const Mat3 d = single_atom_drive(0.0, mhz_to_rad(23.0));
  Mat3 expect = Mat3::Zero();
  expect(2, 2) = mhz_to_rad(23.0);
  EXPECT_EQ(max_abs(d - expect), 0.0);
}

TEST(SingleAtomDrive, NeverTouchesGroundZero) {
  const Mat3 h = single_atom_drive(1.3e8, -2.1e8);
  EXPECT_EQ(max_abs(h.row(0)), 0.0);
  EXPECT_EQ(max_abs(h.col(0)), 0.0);
  EXPECT_EQ(max_abs(h - h.adjoint()), 0.0);
}

TEST(AdiabaticHamiltonian, Examples) {
  const double V = mhz_to_rad(500.0);
  EXPECT_EQ(max_abs(hamiltonian_adiabatic(0.0, 0.0, V) - V * double_rydberg_projector()), 0.0);
  const double omega = 1.7e8, delta = -0.9e8;
  const Mat9 h = hamiltonian_adiabatic(omega, delta, V);
  EXPECT_EQ(max_abs(h.row(0)), 0.0);
  EXPECT_EQ(max_abs(h.col(0)), 0.0);
  EXPECT_NEAR(h(8, 8).real(), V + 2.0 * delta, 1e-6);
  EXPECT_LT(hermiticity_defect(h), 1e-12 * max_abs(h));
  // |11> couples to 1r and r1 with omega / 2.
  EXPECT_DOUBLE_EQ(h(5, 4).real(), 0.5 * omega);
  EXPECT_DOUBLE_EQ(h(7, 4).real(), 0.5 * omega);
}

TEST(AdiabaticHamiltonian, GeneratorsAreDerivatives) {
  const double V = 3e9;
  const Mat9 h = hamiltonian_adiabatic(1.0e8, 2.0e8, V);
  const Mat9 lin = hamiltonian_adiabatic(0.0, 0.0, V) + 1.0e8 * hamiltonian_adiabatic_omega_generator() +
                   2.0e8 * hamiltonian_adiabatic_delta_generator();
  EXPECT_LT(max_abs(h - lin), 1e-6);
}

TEST(EcdHamiltonian, Examples) {
  const double V = mhz_to_rad(500.0);
  EXPECT_EQ(max_abs(hamiltonian_ecd(0, 0, 0, V) - V * double_rydberg_projector()), 0.0);
  const double g1 = 1.1e7, g2 = -2.3e7, g3 = 0.7e7;
  const Mat9 h = hamiltonian_ecd(g1, g2, g3, V);
  EXPECT_EQ(h(basis_index(AtomLevel::ryd, AtomLevel::g0), basis_index(AtomLevel::g1, AtomLevel::g0)), cplx(g1));
  EXPECT_EQ(h(basis_index(AtomLevel::g0, AtomLevel::ryd), basis_index(AtomLevel::g0, AtomLevel::g1)), cplx(g1));
  EXPECT_EQ(h(basis_index(AtomLevel::ryd, AtomLevel::g1), basis_index(AtomLevel::g1, AtomLevel::g1)), cplx(g2));
  EXPECT_EQ(h(basis_index(AtomLevel::g1, AtomLevel::ryd), basis_index(AtomLevel::g1, AtomLevel::g1)), cplx(g2));
  EXPECT_EQ(hermiticity_defect(h), 0.0);
  EXPECT_DOUBLE_EQ(h(2, 2).real(), g3);
  EXPECT_DOUBLE_EQ(h(8, 8).real(), 2.0 * g3 + V);
  // |rr> is not coupled by the eCD controls.
  for (int i = 0; i < 8; ++i) EXPECT_EQ(h(8, i), cplx(0.0));
}

TEST(EcdHamiltonian, SingleAtomBlockadeReading) {
  const double V = 1e9;
  const Mat9 h = hamiltonian_ecd(0, 0, 0, V, BlockadeTerm::single_atom);
  EXPECT_DOUBLE_EQ(h(2, 2).real(), V);
  EXPECT_DOUBLE_EQ(h(8, 8).real(), 2.0 * V);
  EXPECT_DOUBLE_EQ(h(4, 4).real(), 0.0);
}

}  // namespace
}  // namespace rydcz
