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

// Small dense Hermitian linear algebra for 9x9 two-atom operators.
//
// Every Hamiltonian assembled in this library is block diagonal: the drive
// never couples |0>, so the space splits into {|00>}, the two single-atom
// sectors and the doubly driven |11> sector. The eigensolver finds these
// blocks from the sparsity pattern and diagonalizes each one separately,
// which is exact and keeps the eigenvectors free of cross-block mixing when
// blocks are degenerate with each other.

#include "rydcz/hilbert.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

namespace rydcz {

using RealVec9 = Eigen::Matrix<double, 9, 1>;

/// Connected components of the nonzero pattern of a 9x9 operator.
struct BlockPartition {
  std::vector<std::vector<int>> blocks;  // each sorted ascending
  std::array<int, 9> block_of{};

  static BlockPartition of(const Mat9& h, double zero_tol = 0.0) {
    std::array<int, 9> parent{};
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (int i = 0; i < 9; ++i)
      for (int j = i + 1; j < 9; ++j)
        if (std::abs(h(i, j)) > zero_tol || std::abs(h(j, i)) > zero_tol) parent[find(i)] = find(j);

    BlockPartition p;
    std::array<int, 9> root_to_block;
    root_to_block.fill(-1);
    for (int i = 0; i < 9; ++i) {
      const int r = find(i);
      if (root_to_block[r] < 0) {
        root_to_block[r] = static_cast<int>(p.blocks.size());
        p.blocks.emplace_back();
      }
      p.blocks[root_to_block[r]].push_back(i);
      p.block_of[i] = root_to_block[r];
    }
    return p;
  }
};

/// H = W diag(values) W^dagger with W block diagonal in the partition of H.
/// Within a block, eigenvalues are ascending and occupy the block's columns.
struct SpectralDecomposition {
  RealVec9 values;
  Mat9 vectors;
  BlockPartition partition;
};

namespace detail {

using SmallReal = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 9, 9>;
using SmallCplx = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, 0, 9, 9>;

inline bool is_real(const Mat9& h) { return h.imag().cwiseAbs().maxCoeff() == 0.0; }

}  // namespace detail

/// Diagonalizes h within a given partition; h must not couple across it.
inline SpectralDecomposition eigh(const Mat9& h, const BlockPartition& partition) {
  SpectralDecomposition out;
  out.partition = partition;
  out.values.setZero();
  out.vectors.setZero();
  const bool real = detail::is_real(h);
  for (const auto& block : out.partition.blocks) {
    const int n = static_cast<int>(block.size());
    if (n == 1) {
      out.values(block[0]) = h(block[0], block[0]).real();
      out.vectors(block[0], block[0]) = 1.0;
      continue;
    }
    if (real) {
      detail::SmallReal sub(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) sub(i, j) = h(block[i], block[j]).real();
      Eigen::SelfAdjointEigenSolver<detail::SmallReal> es(sub);
      for (int k = 0; k < n; ++k) {
        out.values(block[k]) = es.eigenvalues()(k);
        for (int i = 0; i < n; ++i) out.vectors(block[i], block[k]) = es.eigenvectors()(i, k);
      }
    } else {
      detail::SmallCplx sub(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) sub(i, j) = h(block[i], block[j]);
      Eigen::SelfAdjointEigenSolver<detail::SmallCplx> es(sub);
      for (int k = 0; k < n; ++k) {
        out.values(block[k]) = es.eigenvalues()(k);
        for (int i = 0; i < n; ++i) out.vectors(block[i], block[k]) = es.eigenvectors()(i, k);
      }
    }
  }
  return out;
}

inline SpectralDecomposition eigh(const Mat9& h) { return eigh(h, BlockPartition::of(h)); }

/// exp(-i H dt) from a spectral decomposition of H.
inline Mat9 unitary_from(const SpectralDecomposition& sd, double dt) {
  Mat9 scaled = sd.vectors;
  for (int k = 0; k < 9; ++k) scaled.col(k) *= std::polar(1.0, -sd.values(k) * dt);
  return scaled * sd.vectors.adjoint();
}

inline Mat9 expm_hermitian(const Mat9& h, double dt) { return unitary_from(eigh(h), dt); }

/// Divided differences of exp(-i lambda dt): the Daleckii-Krein kernel for
/// d exp(-i H dt) = W (L o (W^dagger dH W)) W^dagger.
inline Mat9 exp_derivative_kernel(const RealVec9& values, double dt) {
  // (e^{-i a dt} - e^{-i b dt}) / (a - b) = -i dt e^{-i (a+b) dt / 2} sinc((a - b) dt / 2)
  Mat9 l;
  for (int j = 0; j < 9; ++j) {
    for (int k = 0; k < 9; ++k) {
      const double x = 0.5 * (values(j) - values(k)) * dt;
      const double sinc = std::abs(x) < 1e-4 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
      l(j, k) = cplx(0.0, -dt * sinc) * std::polar(1.0, -0.5 * (values(j) + values(k)) * dt);
    }
  }
  return l;
}

}  // namespace rydcz
