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
#include <unsupported/Eigen/MatrixFunctions>

#include "rydcz/hamiltonian.hpp"
#include "rydcz/linalg.hpp"

namespace rydcz {
namespace {

Mat9 random_hermitian(std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  Mat9 m;
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) m(i, j) = cplx(n(rng), n(rng));
  return 0.5 * (m + m.adjoint());
}

Mat9 pade_expm(const Mat9& h, double dt) {
  const Mat9 a = cplx(0.0, -dt) * h;
  return a.exp();
}

TEST(BlockPartition, AdiabaticStructure) {
  const BlockPartition p = BlockPartition::of(hamiltonian_adiabatic(1.0, 1.0, 1.0));
  ASSERT_EQ(p.blocks.size(), 4u);
  EXPECT_EQ(p.blocks[0], (std::vector<int>{0}));
  EXPECT_EQ(p.blocks[1], (std::vector<int>{1, 2}));
  EXPECT_EQ(p.blocks[2], (std::vector<int>{3, 6}));
  EXPECT_EQ(p.blocks[3], (std::vector<int>{4, 5, 7, 8}));
  for (int i = 0; i < 9; ++i) {
    const auto& b = p.blocks[static_cast<std::size_t>(p.block_of[i])];
    EXPECT_NE(std::find(b.begin(), b.end(), i), b.end());
  }
}

TEST(Eigh, ReconstructsDenseAndBlockMatrices) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 5; ++k) {
    const Mat9 h = random_hermitian(rng, 1.0);
    const SpectralDecomposition sd = eigh(h);
    const Mat9 back = sd.vectors * sd.values.cast<cplx>().asDiagonal() * sd.vectors.adjoint();
    EXPECT_LT(max_abs(back - h), 1e-12);
    EXPECT_LT(unitarity_defect(sd.vectors), 1e-13);
  }
  const Mat9 h = hamiltonian_ecd(2.0, -1.0, 0.5, 3.0);
  const SpectralDecomposition sd = eigh(h);
  EXPECT_LT(max_abs(sd.vectors * sd.values.cast<cplx>().asDiagonal() * sd.vectors.adjoint() - h), 1e-13);
}

TEST(ExpmHermitian, MatchesPadeOracle) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 5; ++k) {
    const Mat9 h = random_hermitian(rng, 2.0);
    EXPECT_LT(max_abs(expm_hermitian(h, 0.37) - pade_expm(h, 0.37)), 1e-12);
  }
  const Mat9 h = hamiltonian_adiabatic(mhz_to_rad(17), mhz_to_rad(-5), mhz_to_rad(500));
  EXPECT_LT(max_abs(expm_hermitian(h, 1e-9) - pade_expm(h, 1e-9)), 1e-12);
}

TEST(ExpmHermitian, ZeroAndDiagonal) {
  EXPECT_LT(max_abs(expm_hermitian(Mat9::Zero(), 1.0) - Mat9::Identity()), 1e-15);
  Mat9 d = Mat9::Zero();
  for (int i = 0; i < 9; ++i) d(i, i) = 0.3 * i - 1.0;
  const Mat9 u = expm_hermitian(d, 2.0);
  for (int i = 0; i < 9; ++i) EXPECT_LT(std::abs(u(i, i) - std::polar(1.0, -2.0 * (0.3 * i - 1.0))), 1e-15);
}

TEST(ExpDerivativeKernel, MatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  const double dt = 0.8;
  // Includes a degenerate pair to exercise the confluent limit.
  Mat9 h = random_hermitian(rng, 1.0);
  const SpectralDecomposition sd0 = eigh(h);
  RealVec9 vals = sd0.values;
  vals(1) = vals(0);
  h = sd0.vectors * vals.cast<cplx>().asDiagonal() * sd0.vectors.adjoint();
  const Mat9 dh = random_hermitian(rng, 1.0);
  const SpectralDecomposition sd = eigh(h);
  const Mat9 l = exp_derivative_kernel(sd.values, dt);
  const Mat9 w = sd.vectors;
  const Mat9 analytic = w * l.cwiseProduct(w.adjoint() * dh * w) * w.adjoint();
  const double eps = 1e-6;
  const Mat9 fd = (pade_expm(h + eps * dh, dt) - pade_expm(h - eps * dh, dt)) / (2 * eps);
  EXPECT_LT(max_abs(analytic - fd), 1e-8);
}

}  // namespace
}  // namespace rydcz
