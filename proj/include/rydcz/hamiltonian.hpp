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

// Two-atom Hamiltonians for a global (symmetric) drive.

#include "rydcz/hilbert.hpp"

namespace rydcz {

/// H = H_d x 1 + 1 x H_d + V |rr><rr|.
inline Mat9 hamiltonian_adiabatic(double omega, double delta, double blockade) {
  const Mat3 hd = single_atom_drive(omega, delta);
  const Mat3 id = Mat3::Identity();
  Mat9 h = tensor(hd, id) + tensor(id, hd);
  h(kDoubleRydberg, kDoubleRydberg) += blockade;
  return h;
}

/// dH/d(omega) of hamiltonian_adiabatic; constant in the controls.
inline Mat9 hamiltonian_adiabatic_omega_generator() {
  const Mat3 id = Mat3::Identity();
  const Mat3 x = single_atom_drive(1.0, 0.0);
  return tensor(x, id) + tensor(id, x);
}

/// dH/d(delta) of hamiltonian_adiabatic.
inline Mat9 hamiltonian_adiabatic_delta_generator() {
  const Mat3 id = Mat3::Identity();
  const Mat3 pr = projector(AtomLevel::ryd);
  return tensor(pr, id) + tensor(id, pr);
}

/// How the blockade enters the eCD Hamiltonian.
enum class BlockadeTerm {
  pair,         // V |rr><rr|, the interaction of the adiabatic Hamiltonian
  single_atom,  // V (P_r x 1 + 1 x P_r), literal single-atom reading
};

/// g1 (|r><1| x P0 + P0 x |r><1|) + g2 (|r><1| x P1 + P1 x |r><1|) + H.c.
///   + g3 (P_r x 1 + 1 x P_r) + blockade term.
inline Mat9 hamiltonian_ecd(double g1, double g2, double g3, double blockade,
                            BlockadeTerm term = BlockadeTerm::pair) {
  const Mat3 raise = ket_bra(AtomLevel::ryd, AtomLevel::g1);
  const Mat3 p0 = projector(AtomLevel::g0);
  const Mat3 p1 = projector(AtomLevel::g1);
  const Mat3 pr = projector(AtomLevel::ryd);
  const Mat3 id = Mat3::Identity();
  const Mat9 coupling =
      g1 * (tensor(raise, p0) + tensor(p0, raise)) + g2 * (tensor(raise, p1) + tensor(p1, raise));
  Mat9 h = coupling + coupling.adjoint();
  h += g3 * (tensor(pr, id) + tensor(id, pr));
  if (term == BlockadeTerm::pair)
    h(kDoubleRydberg, kDoubleRydberg) += blockade;
  else
    h += blockade * (tensor(pr, id) + tensor(id, pr));
  return h;
}

}  // namespace rydcz
