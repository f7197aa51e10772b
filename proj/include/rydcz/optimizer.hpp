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

/// Gradient-based optimization of piecewise-constant (Omega, Delta) controls
/// for a CZ gate with free single-qubit phase.
///
/// Pipeline shared by optimizer and evaluator:
///
///   pre-filter values --sinc band limit--> filtered --soft clamp--> physical
///   physical --exact segment exponentials--> U --phase-optimized infidelity--> cost
///
/// The soft clamp is the identity below knee * bound and saturates smoothly
/// (tanh) towards the bound above it, so realized pulses never exceed the
/// amplitude limits and the cost stays differentiable. Gradients are exact:
/// each segment derivative uses the spectral (Daleckii-Krein) formula for the
/// derivative of exp(-i H dt), back-propagated through clamp and filter.

#include "rydcz/dynamics.hpp"
#include "rydcz/errors.hpp"
#include "rydcz/hamiltonian.hpp"
#include "rydcz/linalg.hpp"
#include "rydcz/pulses.hpp"
#include "rydcz/worker_pool.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace rydcz {

struct OptimizerConfig {
  std::size_t n_segments = kDefaultSegments;
  double T = 0.0;            // s
  double omega_bound = 0.0;  // rad/s
  double delta_bound = 0.0;  // rad/s
  double cutoff = 0.0;       // rad/s, band limit of both controls
  int max_iters = 2000;
  double grad_tol = 1e-10;   // max-norm of the gradient in bound-normalized variables
  double cost_target = 1e-10;  // stop once the cost falls below this (0 disables)
  int n_starts = 8;
  std::uint64_t rng_seed = 0;
  double clamp_knee = 0.9;
  int lbfgs_memory = 10;
  double init_scale = 0.3;   // random starts uniform in [-init_scale, init_scale] * bound

  /// Bounds s 2pi 17 MHz and s 2pi 23 MHz, cutoff equal to the Rabi bound.
  static OptimizerConfig for_scaling(double T, double s) {
    OptimizerConfig c;
    c.T = T;
    c.omega_bound = s * mhz_to_rad(kReferenceRabiMHz);
    c.delta_bound = s * mhz_to_rad(kReferenceDetuningMHz);
    c.cutoff = c.omega_bound;
    return c;
  }

  void validate() const {
    if (n_segments < 8) throw ParameterError("optimizer: need at least 8 segments");
    if (!(T > 0.0)) throw ParameterError("optimizer: T must be positive");
    if (!(omega_bound > 0.0) || !(delta_bound > 0.0)) throw ParameterError("optimizer: bounds must be positive");
    if (!(cutoff > 0.0)) throw ParameterError("optimizer: cutoff must be positive");
    if (n_starts < 1) throw ParameterError("optimizer: n_starts must be at least 1");
    if (!(clamp_knee > 0.0 && clamp_knee < 1.0)) throw ParameterError("optimizer: clamp knee must lie in (0, 1)");
    if (lbfgs_memory < 1) throw ParameterError("optimizer: L-BFGS memory must be positive");
  }
};

struct OptimizedPulse {
  PiecewiseControl omega_ctrl;  // post-filter, post-clamp, as simulated
  PiecewiseControl delta_ctrl;
  double final_infidelity = 1.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;
  int best_start = 0;
};

/// Identity below knee, tanh saturation towards 1 above; odd in y.
inline double soft_clamp(double y, double knee) {
  const double a = std::abs(y);
  if (a <= knee) return y;
  const double w = 1.0 - knee;
  return std::copysign(knee + w * std::tanh((a - knee) / w), y);
}

inline double soft_clamp_derivative(double y, double knee) {
  const double a = std::abs(y);
  if (a <= knee) return 1.0;
  const double c = std::cosh((a - knee) / (1.0 - knee));
  return 1.0 / (c * c);
}

/// Sum of values times segment width.
inline double pulse_area(const PiecewiseControl& c) {
  double acc = 0.0;
  for (double v : c.values) acc += v;
  return acc * c.dt();
}

/// Cost and, optionally, its gradient with respect to the pre-filter
/// segment values in bound-normalized units.
class GateCostModel {
 public:
  GateCostModel(double blockade, const OptimizerConfig& cfg)
      : blockade_(blockade),
        cfg_(cfg),
        dt_(cfg.T / static_cast<double>(cfg.n_segments)),
        kernel_(detail::cached_sinc_kernel(cfg.n_segments, dt_, cfg.cutoff)),
        gen_omega_(hamiltonian_adiabatic_omega_generator()),
        gen_delta_(hamiltonian_adiabatic_delta_generator()),
        partition_(BlockPartition::of(hamiltonian_adiabatic(1.0, 1.0, 1.0))) {
    cfg.validate();
  }

  std::size_t n() const { return cfg_.n_segments; }
  const OptimizerConfig& config() const { return cfg_; }
  double blockade() const { return blockade_; }

  /// Physical controls for normalized pre-filter variables x = [x_omega, x_delta].
  std::pair<PiecewiseControl, PiecewiseControl> realize(std::span<const double> x) const {
    const std::size_t n = cfg_.n_segments;
    const auto yo = circular_convolve(x.subspan(0, n), kernel_);
    const auto yd = circular_convolve(x.subspan(n, n), kernel_);
    std::pair<PiecewiseControl, PiecewiseControl> out;
    out.first = PiecewiseControl{std::vector<double>(n), cfg_.T, cfg_.cutoff};
    out.second = PiecewiseControl{std::vector<double>(n), cfg_.T, cfg_.cutoff};
    for (std::size_t i = 0; i < n; ++i) {
      out.first.values[i] = cfg_.omega_bound * soft_clamp(yo[i], cfg_.clamp_knee);
      out.second.values[i] = cfg_.delta_bound * soft_clamp(yd[i], cfg_.clamp_knee);
    }
    return out;
  }

  double cost(std::span<const double> x) const { return evaluate(x, nullptr); }

  /// Returns the cost and writes d cost / d x into grad (size 2n).
  double cost_and_gradient(std::span<const double> x, std::span<double> grad) const {
    return evaluate(x, &grad);
  }

 private:
  double evaluate(std::span<const double> x, std::span<double>* grad) const {
    const std::size_t n = cfg_.n_segments;
    const auto yo = circular_convolve(x.subspan(0, n), kernel_);
    const auto yd = circular_convolve(x.subspan(n, n), kernel_);

    std::vector<SpectralDecomposition> spectra;
    std::vector<Mat9> segments(n);
    if (grad) spectra.resize(n);
    Mat9 u = Mat9::Identity();
    std::vector<Mat9> forward;  // forward[i] = U_{i-1} ... U_0
    if (grad) forward.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double omega = cfg_.omega_bound * soft_clamp(yo[i], cfg_.clamp_knee);
      const double delta = cfg_.delta_bound * soft_clamp(yd[i], cfg_.clamp_knee);
      SpectralDecomposition sd = eigh(hamiltonian_adiabatic(omega, delta, blockade_), partition_);
      segments[i] = unitary_from(sd, dt_);
      if (grad) {
        forward[i] = u;
        spectra[i] = std::move(sd);
      }
      u = (segments[i] * u).eval();
    }
    Mat4 u4;
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) u4(j, k) = u(kComputationalIndices[j], kComputationalIndices[k]);
    const PhaseOptimum po = infidelity_phase_optimized(u4);
    if (!grad) return po.infidelity;

    // Embedded conj(CZ_theta) target: z = Tr(target_adj U).
    Mat9 target_adj = Mat9::Zero();
    const cplx e1 = std::polar(1.0, -po.theta);
    const std::array<cplx, 4> diag{1.0, e1, e1, -e1 * e1};
    for (int j = 0; j < 4; ++j) target_adj(kComputationalIndices[j], kComputationalIndices[j]) = diag[j];
    const cplx z = (target_adj * u).trace();

    std::vector<double> d_omega(n), d_delta(n);
    Mat9 backward = Mat9::Identity();  // U_{n-1} ... U_{i+1}
    for (std::size_t idx = n; idx-- > 0;) {
      const SpectralDecomposition& sd = spectra[idx];
      const Mat9& w = sd.vectors;
      const Mat9 m = forward[idx] * target_adj * backward;
      const Mat9 m_eig = w.adjoint() * m * w;
      const Mat9 kern = exp_derivative_kernel(sd.values, dt_);
      const Mat9 go = w.adjoint() * gen_omega_ * w;
      const Mat9 gd = w.adjoint() * gen_delta_ * w;
      // Tr(M dU) = sum_jk (W^dag M W)_kj L_jk (W^dag G W)_jk
      const cplx dz_o = (m_eig.transpose().array() * kern.array() * go.array()).sum();
      const cplx dz_d = (m_eig.transpose().array() * kern.array() * gd.array()).sum();
      d_omega[idx] = -(std::conj(z) * dz_o).real() / 8.0;
      d_delta[idx] = -(std::conj(z) * dz_d).real() / 8.0;
      backward = (backward * segments[idx]).eval();
    }
    for (std::size_t i = 0; i < n; ++i) {
      d_omega[i] *= cfg_.omega_bound * soft_clamp_derivative(yo[i], cfg_.clamp_knee);
      d_delta[i] *= cfg_.delta_bound * soft_clamp_derivative(yd[i], cfg_.clamp_knee);
    }
    const auto go = circular_convolve(d_omega, kernel_);
    const auto gd = circular_convolve(d_delta, kernel_);
    std::copy(go.begin(), go.end(), grad->begin());
    std::copy(gd.begin(), gd.end(), grad->begin() + static_cast<std::ptrdiff_t>(n));
    return po.infidelity;
  }

  double blockade_;
  OptimizerConfig cfg_;
  double dt_;
  const std::vector<double>& kernel_;
  Mat9 gen_omega_;
  Mat9 gen_delta_;
  BlockPartition partition_;
};

namespace detail {

inline std::vector<double> normalized_variables(const PiecewiseControl& omega, const PiecewiseControl& delta,
                                                const OptimizerConfig& cfg) {
  if (omega.n_segments() != cfg.n_segments || delta.n_segments() != cfg.n_segments)
    throw ParameterError("control segment count does not match the optimizer configuration");
  std::vector<double> x(2 * cfg.n_segments);
  for (std::size_t i = 0; i < cfg.n_segments; ++i) {
    x[i] = omega.values[i] / cfg.omega_bound;
    x[cfg.n_segments + i] = delta.values[i] / cfg.delta_bound;
  }
  return x;
}

}  // namespace detail

/// Phase-optimized infidelity of pre-filter controls after band limit and clamp.
inline double cost(const PiecewiseControl& omega_ctrl, const PiecewiseControl& delta_ctrl, double blockade,
                   const OptimizerConfig& cfg) {
  const GateCostModel model(blockade, cfg);
  return model.cost(detail::normalized_variables(omega_ctrl, delta_ctrl, cfg));
}

struct ControlGradient {
  std::vector<double> omega;  // d cost / d omega_i, s/rad
  std::vector<double> delta;  // d cost / d delta_i, s/rad
};

/// Gradient of cost() with respect to the pre-filter segment values.
inline ControlGradient gradient(const PiecewiseControl& omega_ctrl, const PiecewiseControl& delta_ctrl,
                                double blockade, const OptimizerConfig& cfg) {
  const GateCostModel model(blockade, cfg);
  const auto x = detail::normalized_variables(omega_ctrl, delta_ctrl, cfg);
  std::vector<double> g(x.size());
  model.cost_and_gradient(x, g);
  ControlGradient out;
  out.omega.resize(cfg.n_segments);
  out.delta.resize(cfg.n_segments);
  for (std::size_t i = 0; i < cfg.n_segments; ++i) {
    out.omega[i] = g[i] / cfg.omega_bound;
    out.delta[i] = g[cfg.n_segments + i] / cfg.delta_bound;
  }
  return out;
}

struct DescentResult {
  std::vector<double> x;
  double cost = 1.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;
};

/// Limited-memory BFGS with Armijo backtracking. Accepted steps never
/// increase the cost, so history is monotone non-increasing.
inline DescentResult lbfgs_descent(const GateCostModel& model, std::vector<double> x) {
  const OptimizerConfig& cfg = model.config();
  const std::size_t dim = x.size();
  auto dot = [](std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
  };
  auto max_norm = [](std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
  };

  DescentResult r;
  std::vector<double> g(dim), g_new(dim), d(dim), x_new(dim);
  double f = model.cost_and_gradient(x, g);
  r.history.push_back(f);
  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;
  int stalled = 0;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    if (max_norm(g) < cfg.grad_tol || f < cfg.cost_target) {
      r.converged = true;
      break;
    }
    // Two-loop recursion for d = -H g.
    std::vector<double> q = g;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      alpha[k] = rho_hist[k] * dot(s_hist[k], q);
      for (std::size_t i = 0; i < dim; ++i) q[i] -= alpha[k] * y_hist[k][i];
    }
    double gamma;
    if (s_hist.empty()) {
      gamma = 0.05 / std::max(max_norm(g), 1e-300);
    } else {
      gamma = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
    }
    for (std::size_t i = 0; i < dim; ++i) q[i] *= gamma;
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = rho_hist[k] * dot(y_hist[k], q);
      for (std::size_t i = 0; i < dim; ++i) q[i] += (alpha[k] - beta) * s_hist[k][i];
    }
    for (std::size_t i = 0; i < dim; ++i) d[i] = -q[i];
    double slope = dot(g, d);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      const double scale = 0.05 / std::max(max_norm(g), 1e-300);
      for (std::size_t i = 0; i < dim; ++i) d[i] = -scale * g[i];
      slope = dot(g, d);
    }

    double step = 1.0;
    double f_new = f;
    bool accepted = false;
    for (int k = 0; k < 50; ++k) {
      for (std::size_t i = 0; i < dim; ++i) x_new[i] = x[i] + step * d[i];
      f_new = model.cost_and_gradient(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (s_hist.empty()) break;
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      continue;
    }

    std::vector<double> s(dim), y(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      s[i] = x_new[i] - x[i];
      y[i] = g_new[i] - g[i];
    }
    const double sy = dot(s, y);
    if (sy > 1e-16 * std::sqrt(dot(s, s) * dot(y, y))) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > cfg.lbfgs_memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    const double decrease = f - f_new;
    stalled = decrease <= 1e-14 * std::max(f, 1e-300) ? stalled + 1 : 0;
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    r.history.push_back(f);
    r.iterations = iter + 1;
    if (stalled >= 25) break;
  }
  if (max_norm(g) < cfg.grad_tol || f < cfg.cost_target) r.converged = true;
  r.x = std::move(x);
  r.cost = f;
  return r;
}

/// Random start: uniform in [-init_scale, init_scale] per normalized segment,
/// from a generator seeded by (rng_seed, start).
inline std::vector<double> random_start(const OptimizerConfig& cfg, int start) {
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.rng_seed & 0xffffffffu),
                    static_cast<std::uint32_t>(cfg.rng_seed >> 32), static_cast<std::uint32_t>(start)};
  std::mt19937_64 rng(seq);
  std::vector<double> x(2 * cfg.n_segments);
  for (double& v : x) {
    const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
    v = cfg.init_scale * (2.0 * unit - 1.0);
  }
  return x;
}

/// Runs up to n_starts L-BFGS descents and returns the realized pulse of the
/// lowest-index start that meets cost_target, else the lowest cost (ties go to
/// the lower index). Starts run in batches on the worker pool; later batches
/// are skipped once a start meets the target, so the choice does not depend on
/// the batch size.
inline OptimizedPulse optimize(double blockade, const OptimizerConfig& cfg, std::size_t workers = 0) {
  cfg.validate();
  const GateCostModel model(blockade, cfg);
  const std::size_t n = static_cast<std::size_t>(cfg.n_starts);
  if (workers == 0) workers = default_workers();
  std::vector<DescentResult> runs;
  runs.reserve(n);
  auto meets_target = [&](const DescentResult& r) { return cfg.cost_target > 0.0 && r.cost < cfg.cost_target; };
  std::size_t best = 0;
  bool found = false;
  while (runs.size() < n && !found) {
    const std::size_t first = runs.size();
    const std::size_t batch = std::min(workers, n - first);
    runs.resize(first + batch);
    parallel_for(batch, workers, [&](std::size_t k) {
      runs[first + k] = lbfgs_descent(model, random_start(cfg, static_cast<int>(first + k)));
    });
    for (std::size_t k = first; k < runs.size() && !found; ++k)
      if (meets_target(runs[k])) {
        best = k;
        found = true;
      }
  }
  if (!found)
    for (std::size_t k = 1; k < runs.size(); ++k)
      if (runs[k].cost < runs[best].cost) best = k;

  OptimizedPulse out;
  auto [omega, delta] = model.realize(runs[best].x);
  out.omega_ctrl = std::move(omega);
  out.delta_ctrl = std::move(delta);
  out.final_infidelity = std::clamp(runs[best].cost, 0.0, 1.0);
  out.iterations = runs[best].iterations;
  out.converged = runs[best].converged;
  out.history = std::move(runs[best].history);
  out.best_start = static_cast<int>(best);
  return out;
}

}  // namespace rydcz
