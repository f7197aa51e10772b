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

/// Schroedinger propagation in the full 9-dimensional two-atom space and
/// CZ gate metrics on the computational subspace.

#include "rydcz/errors.hpp"
#include "rydcz/hamiltonian.hpp"
#include "rydcz/linalg.hpp"
#include "rydcz/pulses.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>

namespace rydcz {

enum class PropagationMethod {
  expm_midpoint,  // exp(-i H(t_mid) dt) per substep
  magnus4,        // fourth-order two-point Magnus, also exactly unitary
  rk4,            // classical Runge-Kutta on U, cross-check only
};

inline std::string to_string(PropagationMethod m) {
  switch (m) {
    case PropagationMethod::expm_midpoint: return "expm_midpoint";
    case PropagationMethod::magnus4: return "magnus4";
    case PropagationMethod::rk4: return "rk4";
  }
  return "unknown";
}

inline PropagationMethod propagation_method_from(const std::string& name) {
  if (name == "expm_midpoint") return PropagationMethod::expm_midpoint;
  if (name == "magnus4") return PropagationMethod::magnus4;
  if (name == "rk4") return PropagationMethod::rk4;
  throw ParameterError("unknown propagation method '" + name + "'");
}

struct PropagationConfig {
  int substeps_per_fast_period = 40;
  int min_substeps = 4096;
  PropagationMethod method = PropagationMethod::magnus4;

  void validate() const {
    if (substeps_per_fast_period < 10) throw ParameterError("need at least 10 substeps per fast period");
    if (min_substeps < 1) throw ParameterError("min_substeps must be positive");
  }

  /// Substep count for a protocol of duration T with fast frequency fast_freq (0 if none).
  std::size_t substeps(double T, double fast_freq = 0.0) const {
    double n = min_substeps;
    if (fast_freq > 0.0) n = std::max(n, std::ceil(substeps_per_fast_period * fast_freq * T / kTwoPi));
    return static_cast<std::size_t>(n);
  }
};

namespace detail {

inline void check_finite(const Mat9& h, double t) {
  if (!h.allFinite())
    throw PropagationError("non-finite Hamiltonian entry at t = " + std::to_string(t) + " s");
}

template <class Hamiltonian>
Mat9 step_generator(Hamiltonian& hamiltonian, double t, double dt, PropagationMethod method) {
  if (method == PropagationMethod::magnus4) {
    constexpr double kOffset = 0.28867513459481288225;  // sqrt(3) / 6
    const Mat9 h1 = hamiltonian(t + (0.5 - kOffset) * dt);
    const Mat9 h2 = hamiltonian(t + (0.5 + kOffset) * dt);
    check_finite(h1, t);
    check_finite(h2, t);
    constexpr double kCommutator = 0.14433756729740644113;  // sqrt(3) / 12
    return 0.5 * (h1 + h2) - cplx(0.0, kCommutator * dt) * (h2 * h1 - h1 * h2);
  }
  const Mat9 h = hamiltonian(t + 0.5 * dt);
  check_finite(h, t);
  return h;
}

template <class Hamiltonian>
Mat9 rk4_step(Hamiltonian& hamiltonian, double t, double dt, const Mat9& u) {
  const cplx mi(0.0, -1.0);
  // Endpoints are sampled just inside the step so that a drive with a jump
  // at a step boundary is seen from the correct side.
  const double inset = 1e-9 * dt;
  const Mat9 h0 = hamiltonian(t + inset);
  const Mat9 hm = hamiltonian(t + 0.5 * dt);
  const Mat9 h1 = hamiltonian(t + dt - inset);
  check_finite(h0, t);
  check_finite(hm, t);
  check_finite(h1, t);
  const Mat9 k1 = mi * h0 * u;
  const Mat9 k2 = mi * hm * (u + 0.5 * dt * k1);
  const Mat9 k3 = mi * hm * (u + 0.5 * dt * k2);
  const Mat9 k4 = mi * h1 * (u + dt * k3);
  return u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

/// 9x9 propagator of i d/dt U = H(t) U over [0, T]. fast_freq sets the
/// substep floor substeps_per_fast_period * fast_freq T / 2pi.
template <class Hamiltonian>
Mat9 propagate(Hamiltonian&& hamiltonian, double T, const PropagationConfig& cfg, double fast_freq = 0.0) {
  cfg.validate();
  if (!(T > 0.0)) throw ParameterError("propagation time must be positive");
  const std::size_t n = cfg.substeps(T, fast_freq);
  const double dt = T / static_cast<double>(n);
  Mat9 u = Mat9::Identity();
  for (std::size_t i = 0; i < n; ++i) {
    const double t = dt * static_cast<double>(i);
    if (cfg.method == PropagationMethod::rk4) {
      u = detail::rk4_step(hamiltonian, t, dt, u);
    } else {
      u = (expm_hermitian(detail::step_generator(hamiltonian, t, dt, cfg.method), dt) * u).eval();
    }
  }
  return u;
}

/// Propagates a single state, calling observer(t, psi) after every substep.
template <class Hamiltonian, class Observer>
Vec9 propagate_state(Hamiltonian&& hamiltonian, const Vec9& psi0, double T, const PropagationConfig& cfg,
                     double fast_freq, Observer&& observer) {
  cfg.validate();
  const std::size_t n = cfg.substeps(T, fast_freq);
  const double dt = T / static_cast<double>(n);
  Vec9 psi = psi0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = dt * static_cast<double>(i);
    if (cfg.method == PropagationMethod::rk4) {
      psi = (detail::rk4_step(hamiltonian, t, dt, Mat9::Identity()) * psi).eval();
    } else {
      psi = (expm_hermitian(detail::step_generator(hamiltonian, t, dt, cfg.method), dt) * psi).eval();
    }
    observer(t + dt, psi);
  }
  return psi;
}

/// Exact product of per-segment exponentials for piecewise-constant drives.
inline Mat9 propagate_piecewise(const PiecewiseControl& omega, const PiecewiseControl& delta, double blockade) {
  if (omega.n_segments() != delta.n_segments() || omega.T != delta.T)
    throw ParameterError("Rabi and detuning controls must share segmentation");
  const double dt = omega.dt();
  Mat9 u = Mat9::Identity();
  for (std::size_t i = 0; i < omega.n_segments(); ++i) {
    const Mat9 h = hamiltonian_adiabatic(omega.values[i], delta.values[i], blockade);
    detail::check_finite(h, omega.t_start(i));
    u = (expm_hermitian(h, dt) * u).eval();
  }
  return u;
}

struct GateResult {
  Mat4 u4 = Mat4::Zero();
  std::array<double, 4> leakage{};
  double infidelity_raw = 1.0;
  double infidelity_phase_opt = 1.0;
  double theta_opt = 0.0;

  double mean_leakage() const { return 0.25 * (leakage[0] + leakage[1] + leakage[2] + leakage[3]); }
};

inline const Mat4& cz_target() {
  static const Mat4 cz = [] {
    Mat4 m = Mat4::Zero();
    m.diagonal() << 1.0, -1.0, -1.0, -1.0;
    return m;
  }();
  return cz;
}

/// 1 - |Tr(CZ^dagger U) / Tr(CZ^dagger CZ)|^2.
inline double infidelity(const Mat4& u4) {
  const cplx overlap = (cz_target().adjoint() * u4).trace() / 4.0;
  return 1.0 - std::norm(overlap);
}

/// Tr(CZ_theta^dagger U) for CZ_theta = diag(1, e^{i theta}, e^{i theta}, -e^{2 i theta}).
inline cplx phased_cz_overlap(const Mat4& u4, double theta) {
  const cplx e1 = std::polar(1.0, -theta);
  return u4(0, 0) + e1 * (u4(1, 1) + u4(2, 2)) - e1 * e1 * u4(3, 3);
}

struct PhaseOptimum {
  double infidelity = 1.0;
  double theta = 0.0;  // in (-pi, pi]
};

/// Minimizes the infidelity against CZ_theta over the single-qubit phase theta.
inline PhaseOptimum infidelity_phase_optimized(const Mat4& u4) {
  const auto fidelity = [&](double theta) { return std::norm(phased_cz_overlap(u4, theta)) / 16.0; };
  constexpr int kGrid = 1024;
  const double step = kTwoPi / kGrid;
  int best_i = 0;
  double best = -1.0;
  for (int i = 0; i < kGrid; ++i) {
    const double v = fidelity(step * i);
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  double a = step * (best_i - 1);
  double b = step * (best_i + 1);
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = fidelity(c);
  double fd = fidelity(d);
  double previous = best;
  for (int it = 0; it < 200; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = fidelity(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = fidelity(d);
    }
    const double current = std::max(fc, fd);
    if (b - a < 1e-9 && std::abs(current - previous) < 1e-12) break;
    previous = current;
  }
  double theta = fc > fd ? c : d;
  double value = std::max(fc, fd);
  if (best > value) {
    value = best;
    theta = step * best_i;
  }
  theta = std::remainder(theta, kTwoPi);
  if (theta <= -0.5 * kTwoPi) theta += kTwoPi;
  return {std::clamp(1.0 - value, 0.0, 1.0), theta};
}

/// Restricts U9 to the computational subspace and evaluates both infidelities.
inline GateResult extract_gate(const Mat9& u9) {
  GateResult g;
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 4; ++k) g.u4(j, k) = u9(kComputationalIndices[j], kComputationalIndices[k]);
  for (int k = 0; k < 4; ++k) g.leakage[k] = 1.0 - g.u4.col(k).squaredNorm();
  g.infidelity_raw = std::clamp(infidelity(g.u4), 0.0, 1.0);
  const PhaseOptimum po = infidelity_phase_optimized(g.u4);
  g.infidelity_phase_opt = std::min(po.infidelity, g.infidelity_raw);
  g.theta_opt = po.theta;
  return g;
}

/// Original adiabatic gate under the unsmoothed two-pulse sweep.
inline GateResult simulate_adiabatic(const SweepParams& sweep, double blockade,
                                     const ErrorModel& errors = {}, const PropagationConfig& cfg = {}) {
  sweep.validate();
  const auto drive = apply_drive_errors(SaffmanDrive{sweep}, errors);
  const Mat9 u = propagate(
      [&](double t) {
        const DriveSample d = drive(t);
        return hamiltonian_adiabatic(d.omega, d.delta, blockade);
      },
      sweep.T, cfg);
  return extract_gate(u);
}

/// Effective-counterdiabatic gate: H_eCD(t) alone plus the blockade term,
/// with f_k from the smoothed sweep.
inline GateResult simulate_ecd(const SweepParams& sweep, const ECDParams& ecd, const ErrorModel& errors = {},
                               const PropagationConfig& cfg = {}, BlockadeTerm term = BlockadeTerm::pair) {
  sweep.validate();
  ecd.validate();
  const SmoothedSweep smooth(sweep);
  const Mat9 u = propagate(
      [&](double t) {
        const EcdControls g = apply_ecd_errors(ecd_controls(t, smooth, ecd), errors);
        return hamiltonian_ecd(g.g1, g.g2, g.g3, ecd.blockade, term);
      },
      sweep.T, cfg, ecd.osc_freq);
  return extract_gate(u);
}

/// Gate from piecewise-constant (omega, delta) controls evaluated exactly.
inline GateResult simulate_piecewise(const PiecewiseControl& omega, const PiecewiseControl& delta,
                                     double blockade, const ErrorModel& errors = {}) {
  const auto [o, d] = apply_drive_errors(omega, delta, errors);
  return extract_gate(propagate_piecewise(o, d, blockade));
}

}  // namespace rydcz
