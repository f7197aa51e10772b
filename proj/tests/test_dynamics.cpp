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


#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "rydcz/dynamics.hpp"

namespace rydcz {
namespace {

const double kT = 0.54e-6;
const double kV = mhz_to_rad(500.0);

Mat4 diag4(cplx a, cplx b, cplx c, cplx d) {
  Mat4 m = Mat4::Zero();
  m.diagonal() << a, b, c, d;
  return m;
}

Mat4 phased_cz(double theta) {
  return diag4(1.0, std::polar(1.0, theta), std::polar(1.0, theta), -std::polar(1.0, 2.0 * theta));
}

Mat9 embed(const Mat4& u4) {
  Mat9 u = Mat9::Identity();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) u(kComputationalIndices[i], kComputationalIndices[j]) = u4(i, j);
  return u;
}

// ------------------------------------------------------------ propagation

TEST(Propagate, ZeroHamiltonianGivesIdentity) {
  const Mat9 u = propagate([](double) { return Mat9::Zero().eval(); }, 1e-6, PropagationConfig{});
  EXPECT_LT(max_abs(u - Mat9::Identity()), 1e-15);
}

TEST(Propagate, ConstantDiagonalHamiltonian) {
  Mat9 h = Mat9::Zero();
  for (int i = 0; i < 9; ++i) h(i, i) = 1e7 * (i - 4);
  for (PropagationMethod m : {PropagationMethod::expm_midpoint, PropagationMethod::magnus4}) {
    PropagationConfig cfg;
    cfg.method = m;
    const Mat9 u = propagate([&](double) { return h; }, 1e-6, cfg);
    for (int i = 0; i < 9; ++i) EXPECT_LT(std::abs(u(i, i) - std::polar(1.0, -1e7 * (i - 4) * 1e-6)), 1e-11);
  }
}

TEST(Propagate, NonFiniteHamiltonianThrows) {
  const auto bad = [](double t) {
    Mat9 h = Mat9::Zero();
    if (t > 5e-7) h(0, 0) = std::numeric_limits<double>::quiet_NaN();
    return h;
  };
  EXPECT_THROW(propagate(bad, 1e-6, PropagationConfig{}), PropagationError);
  PropagationConfig rk;
  rk.method = PropagationMethod::rk4;
  EXPECT_THROW(propagate(bad, 1e-6, rk), PropagationError);
}

TEST(Propagate, ConfigValidation) {
  PropagationConfig cfg;
  cfg.substeps_per_fast_period = 9;
  EXPECT_THROW(cfg.validate(), ParameterError);
  cfg = {};
  EXPECT_EQ(cfg.substeps(kT), 4096u);
  EXPECT_EQ(cfg.substeps(kT, kTwoPi * 1000.0 / kT), 40000u);
  EXPECT_THROW(propagate([](double) { return Mat9::Zero().eval(); }, 0.0, cfg), ParameterError);
  EXPECT_EQ(propagation_method_from("rk4"), PropagationMethod::rk4);
  EXPECT_EQ(to_string(PropagationMethod::magnus4), "magnus4");
  EXPECT_THROW(propagation_method_from("euler"), ParameterError);
}

TEST(Propagate, AdiabaticSelfConvergence) {
  const SweepParams p = SweepParams::scaled(kT, 1.0);
  const auto h = [&](double t) { return hamiltonian_adiabatic(saffman_rabi(t, p), saffman_detuning(t, p), kV); };
  PropagationConfig fine;
  fine.min_substeps *= 2;
  const Mat9 a = propagate(h, kT, PropagationConfig{});
  const Mat9 b = propagate(h, kT, fine);
  EXPECT_LT(max_abs(a - b), 1e-8);
  EXPECT_LT(std::abs(extract_gate(a).infidelity_phase_opt - extract_gate(b).infidelity_phase_opt), 1e-9);
}

TEST(Propagate, EcdSelfConvergence) {
  const SweepParams p = SweepParams::scaled(kT, 1.0);
  const SmoothedSweep smooth(p);
  const ECDParams e{calibrate_osc_freq(p.omega_max, smooth), kV};
  PropagationConfig fine;
  fine.substeps_per_fast_period *= 2;
  const double a = simulate_ecd(p, e).infidelity_phase_opt;
  const double b = simulate_ecd(p, e, {}, fine).infidelity_phase_opt;
  EXPECT_LT(std::abs(a - b), 1e-7);
}

TEST(Propagate, Rk4CrossCheck) {
  const SweepParams p = SweepParams::scaled(kT, 1.0);
  const auto h = [&](double t) { return hamiltonian_adiabatic(saffman_rabi(t, p), saffman_detuning(t, p), kV); };
  PropagationConfig rk;
  rk.method = PropagationMethod::rk4;
  rk.min_substeps = 80000;
  EXPECT_LT(max_abs(propagate(h, kT, rk) - propagate(h, kT, PropagationConfig{})), 1e-5);
}

TEST(Propagate, UnitarityAndNormConservation) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 6; ++k) {
    const double T = 0.027e-6 * std::pow(20.0, u(rng));
    const SweepParams p = SweepParams::scaled(T, 1.0 + 3.8 * u(rng));
    const auto h = [&](double t) { return hamiltonian_adiabatic(saffman_rabi(t, p), saffman_detuning(t, p), kV); };
    EXPECT_LT(unitarity_defect(propagate(h, T, PropagationConfig{})), 1e-8);
    Vec9 psi = Vec9::Zero();
    psi(4) = 1.0;
    double worst = 0.0;
    propagate_state(h, psi, T, PropagationConfig{}, 0.0,
                    [&](double, const Vec9& s) { worst = std::max(worst, std::abs(s.squaredNorm() - 1.0)); });
    EXPECT_LT(worst, 1e-9);
  }
}

TEST(Propagate, StrongBlockadeSuppressesDoubleExcitation) {
  const SweepParams p = SweepParams::scaled(kT, 1.0);
  const double V = mhz_to_rad(5e5);
  const auto h = [&](double t) { return hamiltonian_adiabatic(saffman_rabi(t, p), saffman_detuning(t, p), V); };
  Vec9 psi = Vec9::Zero();
  psi(basis_index(AtomLevel::g1, AtomLevel::g1)) = 1.0;
  double peak = 0.0;
  propagate_state(h, psi, kT, PropagationConfig{}, 0.0,
                  [&](double, const Vec9& s) { peak = std::max(peak, std::norm(s(kDoubleRydberg))); });
  EXPECT_LT(peak, 1e-4);
}

TEST(PropagatePiecewise, MatchesSteppedPropagation) {
  const PiecewiseControl o = sample_control([](double t) { return 1e8 * std::sin(1e7 * t); }, kT, 16, 1e8);
  const PiecewiseControl d = sample_control([](double t) { return 5e7 * std::cos(3e6 * t); }, kT, 16, 1e8);
  const PiecewiseDrive drive{o, d};
  PropagationConfig cfg;
  cfg.min_substeps = 16 * 8;
  const Mat9 stepped = propagate(
      [&](double t) {
        const DriveSample s = drive(t);
        return hamiltonian_adiabatic(s.omega, s.delta, kV);
      },
      kT, cfg);
  EXPECT_LT(max_abs(propagate_piecewise(o, d, kV) - stepped), 1e-10);
  PiecewiseControl bad = d;
  bad.values.resize(8);
  EXPECT_THROW(propagate_piecewise(o, bad, kV), ParameterError);
}

// ------------------------------------------------------------ gate metrics

TEST(Infidelity, HandValues) {
  EXPECT_EQ(infidelity(cz_target()), 0.0);
  EXPECT_DOUBLE_EQ(infidelity(Mat4::Identity()), 0.75);
  EXPECT_DOUBLE_EQ(infidelity(diag4(1, -1, -1, 1)), 0.75);
  EXPECT_LT(infidelity(std::polar(1.0, 0.3) * cz_target()), 1e-15);
}

TEST(PhaseOptimized, MembersOfTheFamily) {
  const PhaseOptimum a = infidelity_phase_optimized(phased_cz(0.7));
  EXPECT_LT(a.infidelity, 1e-12);
  EXPECT_NEAR(a.theta, 0.7, 1e-6);
  const PhaseOptimum b = infidelity_phase_optimized(cz_target());
  EXPECT_LT(b.infidelity, 1e-12);
  // CZ = diag(1, -1, -1, -1) is the family member at theta = pi.
  EXPECT_NEAR(std::abs(b.theta), M_PI, 1e-6);
  const PhaseOptimum c = infidelity_phase_optimized(phased_cz(-2.9));
  EXPECT_LT(c.infidelity, 1e-12);
  EXPECT_NEAR(c.theta, -2.9, 1e-6);
}

TEST(PhaseOptimized, IdentityAgainstDenseScan) {
  double best = 1.0;
  for (int i = 0; i < 1000000; ++i) {
    const double th = -M_PI + kTwoPi * i / 1000000.0;
    const cplx z = 1.0 + 2.0 * std::polar(1.0, -th) - std::polar(1.0, -2.0 * th);
    best = std::min(best, 1.0 - std::norm(z) / 16.0);
  }
  EXPECT_NEAR(infidelity_phase_optimized(Mat4::Identity()).infidelity, best, 1e-10);
}

TEST(PhaseOptimized, NeverAboveRaw) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 50; ++k) {
    Mat4 m;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) m(i, j) = cplx(nd(rng), nd(rng));
    const Eigen::HouseholderQR<Mat4> qr(m);
    const Mat4 q = qr.householderQ();
    EXPECT_LE(infidelity_phase_optimized(q).infidelity, infidelity(q) + 1e-15);
  }
}

TEST(ExtractGate, Examples) {
  const GateResult id = extract_gate(Mat9::Identity());
  EXPECT_LT((id.u4 - Mat4::Identity()).cwiseAbs().maxCoeff(), 1e-15);
  for (double l : id.leakage) EXPECT_NEAR(l, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(id.infidelity_raw, 0.75);

  const GateResult cz = extract_gate(embed(cz_target()));
  EXPECT_EQ(cz.infidelity_raw, 0.0);
  EXPECT_LT(cz.infidelity_phase_opt, 1e-15);

  Mat9 swap = Mat9::Identity();
  swap(4, 4) = 0.0;
  swap(8, 8) = 0.0;
  swap(8, 4) = 1.0;
  swap(4, 8) = 1.0;
  const GateResult lk = extract_gate(swap);
  EXPECT_NEAR(lk.leakage[3], 1.0, 1e-15);
  EXPECT_NEAR(lk.leakage[0], 0.0, 1e-15);
}

// ------------------------------------------------------------ gates

TEST(SimulateAdiabatic, ReferenceParameters) {
  const GateResult g = simulate_adiabatic(SweepParams::scaled(kT, 1.0), kV);
  EXPECT_GT(g.infidelity_raw, 0.0);
  EXPECT_LT(g.infidelity_raw, 0.1);
  EXPECT_GT(g.infidelity_phase_opt, 0.0);
  EXPECT_LT(g.infidelity_phase_opt, g.infidelity_raw);
  // Leakage consistency.
  const double from_norms = 1.0 - g.u4.colwise().squaredNorm().sum() / 4.0;
  EXPECT_GE(from_norms, -1e-12);
  EXPECT_NEAR(from_norms, g.mean_leakage(), 1e-12);
}

TEST(SimulateAdiabatic, InfidelityFallsWithProtocolTime) {
  std::vector<double> T, inf;
  for (int i = 0; i < 12; ++i) {
    T.push_back(0.027e-6 * std::pow(20.0, i / 11.0));
    inf.push_back(simulate_adiabatic(SweepParams::scaled(T.back(), 1.0), kV).infidelity_phase_opt);
  }
  // Spearman rank correlation between T and infidelity.
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t k = 0; k < idx.size(); ++k) r[idx[k]] = static_cast<double>(k);
    return r;
  };
  const auto rt = ranks(T), ri = ranks(inf);
  double d2 = 0.0;
  for (std::size_t k = 0; k < rt.size(); ++k) d2 += (rt[k] - ri[k]) * (rt[k] - ri[k]);
  const double n = static_cast<double>(rt.size());
  const double rho = 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
  EXPECT_LT(rho, -0.7);
  EXPECT_LT(inf.back(), inf.front());
}

TEST(SimulateEcd, DoublingFrequencyCutsInfidelity) {
  const SweepParams p = SweepParams::scaled(kT, 1.0);
  const double w = calibrate_osc_freq(p.omega_max, SmoothedSweep(p));
  const double a = simulate_ecd(p, ECDParams{w, kV}).infidelity_phase_opt;
  const double b = simulate_ecd(p, ECDParams{2 * w, kV}).infidelity_phase_opt;
  EXPECT_GT(a / b, 2.5);
  EXPECT_LT(a / b, 6.0);
}

TEST(SimulateEcd, BlockadeReadingSwitch) {
  const SweepParams p = SweepParams::scaled(kT, 1.0);
  const ECDParams e{calibrate_osc_freq(p.omega_max, SmoothedSweep(p)), kV};
  const GateResult pair = simulate_ecd(p, e);
  const GateResult single = simulate_ecd(p, e, {}, {}, BlockadeTerm::single_atom);
  EXPECT_LT(pair.infidelity_phase_opt, 0.01);
  EXPECT_TRUE(std::isfinite(single.infidelity_raw));
  EXPECT_NE(pair.infidelity_raw, single.infidelity_raw);
}

TEST(SimulatePiecewise, SampledSweepTracksAnalyticGate) {
  const SweepParams p = SweepParams::scaled(kT, 1.0);
  const std::size_t n = 4096;
  const PiecewiseControl o = sample_control([&](double t) { return saffman_rabi(t, p); }, kT, n, p.omega_max);
  const PiecewiseControl d = sample_control([&](double t) { return saffman_detuning(t, p); }, kT, n, p.omega_max);
  const double analytic = simulate_adiabatic(p, kV).infidelity_phase_opt;
  EXPECT_NEAR(simulate_piecewise(o, d, kV).infidelity_phase_opt, analytic, 1e-5);
}

}  // namespace
}  // namespace rydcz
