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

/// Control waveforms: the two-pulse adiabatic sweep, its smoothed variant,
/// counterdiabatic coefficients, effective-counterdiabatic (eCD) controls,
/// band-limited piecewise-constant controls and static pulse errors.
///
/// The sweep consists of two identical half-pulses of duration T/2 centred at
/// T/4 and 3T/4. Within a half-pulse the Rabi frequency is a flat-topped
/// quartic exponential and the detuning sweeps through resonance as
/// delta_max * sin(2 pi (t - t0) / T).

#include "rydcz/errors.hpp"
#include "rydcz/hamiltonian.hpp"
#include "rydcz/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace rydcz {

/// Reference amplitudes at unit pulse scaling s = 1.
inline constexpr double kReferenceRabiMHz = 17.0;
inline constexpr double kReferenceDetuningMHz = 23.0;
inline constexpr double kDefaultWidthFraction = 0.175;

struct SweepParams {
  double omega_max = 0.0;  // rad/s
  double delta_max = 0.0;  // rad/s
  double T = 0.0;          // s
  double tau = 0.0;        // s
  double s_scale = 1.0;

  /// Omega_max = s 2pi 17 MHz, Delta_max = s 2pi 23 MHz, tau = 0.175 T.
  static SweepParams scaled(double T, double s) {
    SweepParams p;
    p.T = T;
    p.s_scale = s;
    p.omega_max = s * mhz_to_rad(kReferenceRabiMHz);
    p.delta_max = s * mhz_to_rad(kReferenceDetuningMHz);
    p.tau = kDefaultWidthFraction * T;
    p.validate();
    return p;
  }

  void validate() const {
    if (!(T > 0.0)) throw ParameterError("sweep: protocol time T must be positive");
    if (!(tau > 0.0)) throw ParameterError("sweep: pulse width tau must be positive");
    if (!(omega_max >= 0.0) || !(delta_max >= 0.0))
      throw ParameterError("sweep: amplitudes must be non-negative");
  }
};

/// Position inside one of the two half-pulses.
struct HalfPulsePoint {
  int half = 0;          // 0 for [0, T/2], 1 for (T/2, T]
  double local = 0.0;    // time since the start of the half-pulse
  double center = 0.0;   // global centre t0 (T/4 or 3T/4)
};

inline HalfPulsePoint locate_half_pulse(double t, double T) {
  const double slack = 1e-12 * T;
  if (!(t >= -slack && t <= T + slack)) throw DomainError("time outside the protocol window [0, T]");
  t = std::clamp(t, 0.0, T);
  if (t <= 0.5 * T) return {0, t, 0.25 * T};
  return {1, t - 0.5 * T, 0.75 * T};
}

inline double saffman_rabi(double t, const SweepParams& p) {
  const HalfPulsePoint hp = locate_half_pulse(t, p.T);
  const double c = 0.25 * p.T;
  const double a = std::exp(-std::pow(c / p.tau, 4));
  const double u = (hp.local - c) / p.tau;
  return p.omega_max / (1.0 - a) * (std::exp(-u * u * u * u) - a);
}

inline double saffman_detuning(double t, const SweepParams& p) {
  const HalfPulsePoint hp = locate_half_pulse(t, p.T);
  return p.delta_max * std::sin(kTwoPi / p.T * (t - hp.center));
}

inline double saffman_detuning_rate(double t, const SweepParams& p) {
  const HalfPulsePoint hp = locate_half_pulse(t, p.T);
  return p.delta_max * kTwoPi / p.T * std::cos(kTwoPi / p.T * (t - hp.center));
}

/// Omega(t) = (Omega_max / norm) (exp(-(t - t0)^4 / tau^4) - a - b t (t - 2 t0))
/// in half-pulse local time; value and slope vanish at both endpoints.
struct SmoothedPulseCoeffs {
  double a = 0.0;
  double b = 0.0;     // 1/s^2
  double norm = 1.0;
  double t0 = 0.0;    // local half-pulse centre
  double tau = 0.0;

  double shape(double local) const {
    const double u = (local - t0) / tau;
    return std::exp(-u * u * u * u) - a - b * local * (local - 2.0 * t0);
  }
  double shape_rate(double local) const {
    const double u = (local - t0) / tau;
    return -4.0 * u * u * u / tau * std::exp(-u * u * u * u) - b * (2.0 * local - 2.0 * t0);
  }
};

namespace detail {

/// Maximizes f on [lo, hi] by a dense scan followed by golden-section refinement.
template <class F>
std::pair<double, double> maximize_scalar(F&& f, double lo, double hi, int grid = 4001) {
  double best_x = lo;
  double best = -std::numeric_limits<double>::infinity();
  const double step = (hi - lo) / (grid - 1);
  for (int i = 0; i < grid; ++i) {
    const double x = lo + step * i;
    const double v = f(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  double a = std::max(lo, best_x - step);
  double b = std::min(hi, best_x + step);
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 100 && (b - a) > 1e-15 * std::max(1.0, std::abs(best_x)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  const double v = f(x);
  if (v > best) return {x, v};
  return {best_x, best};
}

}  // namespace detail

/// Coefficients of the smoothed half-pulse centred at local time t0.
inline SmoothedPulseCoeffs smoothed_rabi_coeffs(const SweepParams& p, double t0) {
  if (!(p.tau > 0.0)) throw ParameterError("smoothed pulse: tau must be positive");
  if (!(t0 > 0.0)) throw ParameterError("smoothed pulse: centre must be positive");
  SmoothedPulseCoeffs c;
  c.t0 = t0;
  c.tau = p.tau;
  c.a = std::exp(-std::pow(t0 / p.tau, 4));
  c.b = -2.0 * t0 * t0 / std::pow(p.tau, 4) * c.a;
  c.norm = 1.0;
  c.norm = detail::maximize_scalar([&](double x) { return c.shape(x); }, 0.0, 2.0 * t0).second;
  return c;
}

/// The smoothed sweep with its coefficients precomputed; used for eCD.
class SmoothedSweep {
 public:
  explicit SmoothedSweep(const SweepParams& p) : p_(p), coeffs_(smoothed_rabi_coeffs(p, 0.25 * p.T)) {}

  const SweepParams& params() const { return p_; }
  const SmoothedPulseCoeffs& coeffs() const { return coeffs_; }

  double rabi(double t) const {
    const HalfPulsePoint hp = locate_half_pulse(t, p_.T);
    return p_.omega_max / coeffs_.norm * coeffs_.shape(hp.local);
  }
  double rabi_rate(double t) const {
    const HalfPulsePoint hp = locate_half_pulse(t, p_.T);
    return p_.omega_max / coeffs_.norm * coeffs_.shape_rate(hp.local);
  }
  double detuning(double t) const { return saffman_detuning(t, p_); }
  double detuning_rate(double t) const { return saffman_detuning_rate(t, p_); }

 private:
  SweepParams p_;
  SmoothedPulseCoeffs coeffs_;
};

/// (delta omega' - omega delta') / (delta^2 + omega^2), or 0 when the
/// denominator is below eps^2.
inline double cd_coefficient(double omega, double omega_rate, double delta, double delta_rate,
                             double eps) {
  const double den = delta * delta + omega * omega;
  if (den < eps * eps) return 0.0;
  return (delta * omega_rate - omega * delta_rate) / den;
}

/// f_k for k = 0 (single excitation, Omega_0 = Omega) and k = 1 (blockaded
/// pair, Omega_1 = sqrt(2) Omega), from the smoothed pulse.
inline double cd_coefficient_analytic(double t, int k, const SmoothedSweep& sweep) {
  if (k != 0 && k != 1) throw ParameterError("cd coefficient index must be 0 or 1");
  const SweepParams& p = sweep.params();
  const double scale = k == 0 ? 1.0 : std::sqrt(2.0);
  const double eps = 1e-6 * std::max(p.omega_max, p.delta_max);
  return cd_coefficient(scale * sweep.rabi(t), scale * sweep.rabi_rate(t), sweep.detuning(t),
                        sweep.detuning_rate(t), eps);
}

/// Counterdiabatic Hamiltonian of the two-atom adiabatic Hamiltonian,
/// obtained from its eigenvectors, and the coefficients read off it.
struct CdCoefficients {
  double f0 = 0.0;          // single-excitation sector, from <0r|H_CD|01>
  double f1 = 0.0;          // blockaded sector in the symmetric state (|1r> + |r1>)/sqrt2
  double f1_element = 0.0;  // same sector read in the product basis, <r1|H_CD|11>
  Mat9 h_cd = Mat9::Zero();
};

namespace detail {

/// Unitary from the product basis to a basis where |1r>, |r1> are replaced by
/// their symmetric and antisymmetric combinations (columns 5 and 7).
inline Mat9 exchange_adapted_basis() {
  Mat9 s = Mat9::Identity();
  const int a = basis_index(AtomLevel::g1, AtomLevel::ryd);
  const int b = basis_index(AtomLevel::ryd, AtomLevel::g1);
  const double r = 1.0 / std::sqrt(2.0);
  s(a, a) = r;
  s(b, a) = r;
  s(a, b) = r;
  s(b, b) = -r;
  return s;
}

inline Mat9 cd_hamiltonian_from(const std::function<Mat9(double)>& hamiltonian, double t, double h,
                                double gap_floor) {
  const Mat9 s = exchange_adapted_basis();
  const auto adapted = [&](double time) { return Mat9((s.adjoint() * hamiltonian(time) * s).eval()); };
  const Mat9 h_minus = adapted(t - h);
  const Mat9 h_mid = adapted(t);
  const Mat9 h_plus = adapted(t + h);
  // One partition for all three points so eigenvector columns correspond.
  const Mat9 pattern = (h_minus.cwiseAbs() + h_mid.cwiseAbs() + h_plus.cwiseAbs()).cast<cplx>();
  const BlockPartition partition = BlockPartition::of(pattern);
  const SpectralDecomposition mid = eigh(h_mid, partition);
  for (const auto& block : mid.partition.blocks)
    for (std::size_t i = 1; i < block.size(); ++i)
      if (mid.values(block[i]) - mid.values(block[i - 1]) < gap_floor)
        throw DegeneracyError("eigenvalue gap below floor at t = " + std::to_string(t) + " s", t);

  auto aligned = [&](const Mat9& hh) {
    const SpectralDecomposition sd = eigh(hh, partition);
    Mat9 v = sd.vectors;
    for (int k = 0; k < 9; ++k) {
      const cplx overlap = mid.vectors.col(k).dot(v.col(k));
      if (std::abs(overlap) > 0.0) v.col(k) *= std::conj(overlap) / std::abs(overlap);
    }
    return v;
  };
  const Mat9 minus = aligned(h_minus);
  const Mat9 plus = aligned(h_plus);
  const Mat9 deriv = (plus - minus) / (2.0 * h);
  Mat9 cd = Mat9::Zero();
  for (int k = 0; k < 9; ++k) {
    const auto n = mid.vectors.col(k);
    const auto dn = deriv.col(k);
    const cplx berry = n.dot(dn);
    cd += cplx(0.0, 1.0) * (dn * n.adjoint() - berry * n * n.adjoint());
  }
  cd = 0.5 * (cd + cd.adjoint()).eval();
  return s * cd * s.adjoint();
}

}  // namespace detail

/// Numerical CD coefficients of H(t) built from the smoothed sweep at blockade V.
/// Eigenvectors at t +- h are phase-aligned to their partners at t;
/// h defaults to 1e-4 T.
inline CdCoefficients cd_coefficient_numeric(double t, const SmoothedSweep& sweep, double blockade,
                                             double h_rel = 1e-4) {
  const SweepParams& p = sweep.params();
  const double h = h_rel * p.T;
  // Stay inside the half-pulse that contains t.
  const HalfPulsePoint hp = locate_half_pulse(t, p.T);
  const double start = hp.half == 0 ? 0.0 : 0.5 * p.T;
  const double t_eval = std::clamp(t, start + 2.0 * h, start + 0.5 * p.T - 2.0 * h);
  const auto hamiltonian = [&](double time) {
    // Continue the half-pulse analytically across its endpoints.
    const double local = time - start;
    const double omega = p.omega_max / sweep.coeffs().norm * sweep.coeffs().shape(local);
    const double delta = p.delta_max * std::sin(kTwoPi / p.T * (time - hp.center));
    return hamiltonian_adiabatic(omega, delta, blockade);
  };
  const double gap_floor = 1e-6 * std::abs(blockade);
  CdCoefficients out;
  out.h_cd = detail::cd_hamiltonian_from(hamiltonian, t_eval, h, gap_floor);
  const int i01 = basis_index(AtomLevel::g0, AtomLevel::g1);
  const int i0r = basis_index(AtomLevel::g0, AtomLevel::ryd);
  const int i11 = basis_index(AtomLevel::g1, AtomLevel::g1);
  const int ir1 = basis_index(AtomLevel::ryd, AtomLevel::g1);
  const int i1r = basis_index(AtomLevel::g1, AtomLevel::ryd);
  // A two-level CD term -(f/2) sigma_y in the (|1>, |r>) basis has <r|H_CD|1> = -i f/2.
  out.f0 = -2.0 * out.h_cd(i0r, i01).imag();
  out.f1_element = -2.0 * out.h_cd(ir1, i11).imag();
  const cplx sym = (out.h_cd(ir1, i11) + out.h_cd(i1r, i11)) / std::sqrt(2.0);
  out.f1 = -2.0 * sym.imag();
  return out;
}

struct ECDParams {
  double osc_freq = 0.0;  // rad/s
  double blockade = 0.0;  // rad/s

  void validate() const {
    if (!(osc_freq > 0.0)) throw ParameterError("eCD oscillation frequency must be positive");
  }
  /// Fewer than ten fast periods per protocol.
  bool undersampled(double T) const { return osc_freq * T / kTwoPi < 10.0; }
};

struct EcdControls {
  double g1 = 0.0;
  double g2 = 0.0;
  double g3 = 0.0;
};

/// Pair-sector channel strength. The pair coupling |11> <-> (|1r> + |r1>)/sqrt2
/// carries an extra sqrt2, so the pair channel is driven with the product-basis
/// element f1 / sqrt2.
inline double pair_channel(double f1) { return f1 / std::sqrt(2.0); }

/// g1 = S(f0) sin wt, g2 = R(f1') cos wt, g3 = -S(f1') sin wt + R(f0) cos wt,
/// with R(f) = sqrt(w |f|), S(f) = sign(f) R(f) and f1' = pair_channel(f1).
/// The signed factor sits on the sine quadrature so the period-averaged
/// commutator reproduces f with its sign.
inline EcdControls ecd_controls_from(double f0, double f1, double osc_freq, double t) {
  const double f1p = pair_channel(f1);
  const double r0 = std::sqrt(osc_freq * std::abs(f0));
  const double r1 = std::sqrt(osc_freq * std::abs(f1p));
  const double s0 = f0 < 0.0 ? -r0 : r0;
  const double s1 = f1p < 0.0 ? -r1 : r1;
  const double sn = std::sin(osc_freq * t);
  const double cs = std::cos(osc_freq * t);
  return {s0 * sn, r1 * cs, -s1 * sn + r0 * cs};
}

inline EcdControls ecd_controls(double t, const SmoothedSweep& sweep, const ECDParams& e) {
  return ecd_controls_from(cd_coefficient_analytic(t, 0, sweep), cd_coefficient_analytic(t, 1, sweep),
                           e.osc_freq, t);
}

/// Largest envelope among |g1|, |g2|, |g3| at time t for unit osc_freq.
inline double ecd_unit_envelope(double t, const SmoothedSweep& sweep) {
  const double a0 = std::abs(cd_coefficient_analytic(t, 0, sweep));
  const double a1 = std::abs(pair_channel(cd_coefficient_analytic(t, 1, sweep)));
  // g3 envelope sqrt(w (|f0| + |f1'|)) dominates both single-channel envelopes.
  return std::sqrt(a0 + a1);
}

/// Oscillation frequency whose largest eCD envelope equals target_amp.
/// Envelopes scale as sqrt(w) because f_k does not depend on w.
inline double calibrate_osc_freq(double target_amp, const SmoothedSweep& sweep) {
  if (!(target_amp > 0.0)) throw ParameterError("calibration target amplitude must be positive");
  const double T = sweep.params().T;
  double peak = 0.0;
  for (int half = 0; half < 2; ++half) {
    const double lo = 0.5 * T * half;
    const double hi = lo + 0.5 * T;
    const auto [x, v] = detail::maximize_scalar(
        [&](double t) { return ecd_unit_envelope(t, sweep); }, lo, hi, 4001);
    (void)x;
    peak = std::max(peak, v);
  }
  if (!(peak > 0.0)) throw CalibrationError("CD coefficients vanish identically; cannot calibrate");
  return target_amp * target_amp / (peak * peak);
}

/// Uniform-segment piecewise-constant control on [0, T].
struct PiecewiseControl {
  std::vector<double> values;  // rad/s
  double T = 0.0;
  double cutoff = 0.0;         // rad/s

  std::size_t n_segments() const { return values.size(); }
  double dt() const { return T / static_cast<double>(values.size()); }
  double t_start(std::size_t i) const { return dt() * static_cast<double>(i); }
  double at(double t) const {
    const auto i = static_cast<std::size_t>(std::clamp(t / dt(), 0.0, double(values.size() - 1)));
    return values[i];
  }
  void validate() const {
    if (values.size() < 8) throw ParameterError("piecewise control needs at least 8 segments");
    if (!(T > 0.0)) throw ParameterError("piecewise control duration must be positive");
  }
};

inline constexpr std::size_t kDefaultSegments = 128;

/// Samples f at segment midpoints.
template <class F>
PiecewiseControl sample_control(F&& f, double T, std::size_t n, double cutoff) {
  PiecewiseControl c;
  c.T = T;
  c.cutoff = cutoff;
  c.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) c.values[i] = f((static_cast<double>(i) + 0.5) * T / double(n));
  return c;
}

/// Circular sinc low-pass of angular cutoff over n segments of width dt.
/// kernel[m] is the weight at lag m (mod n): the sinc sin(cutoff t) / (pi t)
/// summed over all periodic images, i.e. the Dirichlet kernel that keeps
/// every DFT bin with |2 pi k / (n dt)| <= cutoff and drops the rest.
/// Constants pass unchanged and applying it twice is the same as once.
inline std::vector<double> sinc_kernel(std::size_t n, double dt, double cutoff) {
  if (!(cutoff > 0.0)) throw ParameterError("band limit cutoff must be positive");
  if (n == 0) throw ParameterError("band limit needs at least one segment");
  const double bin = kTwoPi / (static_cast<double>(n) * dt);
  // highest kept bin; the slack absorbs rounding when cutoff sits on a bin
  const auto k_max = static_cast<long>(std::floor(cutoff / bin * (1.0 + 1e-12)));
  const long nn = static_cast<long>(n);
  std::vector<long> kept;
  for (long j = 0; j < nn; ++j)
    if (std::abs(j <= nn / 2 ? j : j - nn) <= k_max) kept.push_back(j);
  std::vector<double> kernel(n, 0.0);
  for (long m = 0; m < nn; ++m) {
    double acc = 0.0;
    for (long k : kept) acc += std::cos(kTwoPi * static_cast<double>(k * m % nn) / static_cast<double>(nn));
    kernel[static_cast<std::size_t>(m)] = acc / static_cast<double>(nn);
  }
  return kernel;
}

namespace detail {

struct KernelKey {
  std::size_t n;
  double dt;
  double cutoff;
  bool operator<(const KernelKey& o) const {
    return std::tie(n, dt, cutoff) < std::tie(o.n, o.dt, o.cutoff);
  }
};

inline const std::vector<double>& cached_sinc_kernel(std::size_t n, double dt, double cutoff) {
  static std::mutex mutex;
  static std::map<KernelKey, std::vector<double>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto [it, inserted] = cache.try_emplace(KernelKey{n, dt, cutoff});
  if (inserted) it->second = sinc_kernel(n, dt, cutoff);
  return it->second;
}

}  // namespace detail

/// out[i] = sum_j kernel[(i - j) mod n] in[j]. The kernel is even, so this
/// operator is symmetric and also serves as its own adjoint.
inline std::vector<double> circular_convolve(std::span<const double> in, std::span<const double> kernel) {
  const std::size_t n = in.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += kernel[(i + n - j) % n] * in[j];
    out[i] = acc;
  }
  return out;
}

inline PiecewiseControl band_limit(const PiecewiseControl& c) {
  if (!(c.cutoff > 0.0)) throw ParameterError("band limit cutoff must be positive");
  const auto& kernel = detail::cached_sinc_kernel(c.n_segments(), c.dt(), c.cutoff);
  PiecewiseControl out = c;
  out.values = circular_convolve(c.values, kernel);
  return out;
}

struct ErrorModel {
  double delta_offset = 0.0;  // rad/s, absolute detuning error
  double omega_rel = 0.0;     // relative Rabi amplitude error
};

struct DriveSample {
  double omega = 0.0;
  double delta = 0.0;
};

inline DriveSample apply_drive_errors(DriveSample d, const ErrorModel& e) {
  return {(1.0 + e.omega_rel) * d.omega, d.delta + e.delta_offset};
}

/// Wraps a drive (callable t -> DriveSample) with static errors.
template <class Drive>
auto apply_drive_errors(Drive drive, const ErrorModel& e) {
  return [drive = std::move(drive), e](double t) { return apply_drive_errors(drive(t), e); };
}

inline std::pair<PiecewiseControl, PiecewiseControl> apply_drive_errors(const PiecewiseControl& omega,
                                                                        const PiecewiseControl& delta,
                                                                        const ErrorModel& e) {
  std::pair<PiecewiseControl, PiecewiseControl> out{omega, delta};
  for (double& v : out.first.values) v *= 1.0 + e.omega_rel;
  for (double& v : out.second.values) v += e.delta_offset;
  return out;
}

/// g1, g2 scaled by (1 + d_omega); g3 shifted by d_delta.
inline EcdControls apply_ecd_errors(EcdControls g, const ErrorModel& e) {
  return {(1.0 + e.omega_rel) * g.g1, (1.0 + e.omega_rel) * g.g2, g.g3 + e.delta_offset};
}

/// The unperturbed two-pulse sweep as a drive.
struct SaffmanDrive {
  SweepParams params;
  DriveSample operator()(double t) const { return {saffman_rabi(t, params), saffman_detuning(t, params)}; }
};

/// Segment-wise evaluation of a pair of piecewise controls.
struct PiecewiseDrive {
  PiecewiseControl omega;
  PiecewiseControl delta;
  DriveSample operator()(double t) const { return {omega.at(t), delta.at(t)}; }
};

}  // namespace rydcz
