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

// Command line front end: simulate, optimize, sweep, stability, verify.
//
// Frequencies on the command line are ordinary frequencies in Hz (the
// angular value divided by 2 pi), times in seconds. Every flag may also come
// from a JSON object passed with --config; keys are flag names without the
// leading dashes. Flags given on the command line win over the file.
//
// Exit codes: 0 success, 1 numerical failure, 2 usage error.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rydcz/experiments.hpp"

namespace rydcz::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double hz_to_rad(double hz) { return kTwoPi * hz; }
inline double rad_to_hz(double rad) { return rad / kTwoPi; }

/// Flag values, with the defaults of the library types.
struct Settings {
  // physics
  std::string method = "ecd";
  double T = kGridTMax;
  double s = 1.0;
  double V_hz = kDefaultBlockadeMHz * kMHz;
  double delta_offset_hz = 0.0;
  double omega_rel = 0.0;
  double osc_freq_hz = 0.0;  // 0: calibrate to the Rabi bound
  std::string ecd_blockade = "pair";
  std::string pulse_dir;     // simulate --method optimized from saved files
  // propagation
  std::string integrator = to_string(PropagationConfig{}.method);
  int substeps_per_period = PropagationConfig{}.substeps_per_fast_period;
  int min_substeps = PropagationConfig{}.min_substeps;
  // optimizer
  std::size_t segments = OptimizerConfig{}.n_segments;
  int starts = OptimizerConfig{}.n_starts;
  std::uint64_t seed = OptimizerConfig{}.rng_seed;
  int max_iters = OptimizerConfig{}.max_iters;
  double grad_tol = OptimizerConfig{}.grad_tol;
  double cost_target = OptimizerConfig{}.cost_target;
  // grids
  double T_min = kGridTMin;
  double T_max = kGridTMax;
  std::size_t n_T = 24;
  double s_min = 1.0;
  double s_max = 4.8;
  std::size_t n_s = 8;
  std::vector<std::string> methods;
  std::string axis = "both";
  double detuning_min_hz = rad_to_hz(default_error_range(ErrorAxis::detuning).lo);
  double detuning_max_hz = rad_to_hz(default_error_range(ErrorAxis::detuning).hi);
  double amplitude_min = default_error_range(ErrorAxis::amplitude).lo;
  double amplitude_max = default_error_range(ErrorAxis::amplitude).hi;
  std::size_t points = default_error_range(ErrorAxis::amplitude).n;
  // run
  std::string out;
  std::size_t workers = 0;
  bool quiet = false;
};

inline PropagationConfig propagation_config(const Settings& st) {
  PropagationConfig c;
  c.method = propagation_method_from(st.integrator);
  c.substeps_per_fast_period = st.substeps_per_period;
  c.min_substeps = st.min_substeps;
  c.validate();
  return c;
}

inline OptimizerConfig optimizer_config(const Settings& st) {
  OptimizerConfig c = OptimizerConfig::for_scaling(st.T, st.s);
  c.n_segments = st.segments;
  c.n_starts = st.starts;
  c.rng_seed = st.seed;
  c.max_iters = st.max_iters;
  c.grad_tol = st.grad_tol;
  c.cost_target = st.cost_target;
  return c;
}

inline BlockadeTerm blockade_term(const Settings& st) {
  if (st.ecd_blockade == "pair") return BlockadeTerm::pair;
  if (st.ecd_blockade == "single_atom") return BlockadeTerm::single_atom;
  throw UsageError("--ecd-blockade must be pair or single_atom");
}

inline RunOptions run_options(const Settings& st, std::ostream& err) {
  RunOptions o;
  o.optimizer = optimizer_config(st);
  o.propagation = propagation_config(st);
  o.ecd_blockade = blockade_term(st);
  o.workers = st.workers;
  if (!st.quiet) o.log = [&err](const std::string& msg) { err << msg << '\n'; };
  return o;
}

inline json gate_to_json(const GateResult& g) {
  return {{"infidelity_raw", g.infidelity_raw},
          {"infidelity_phase_opt", g.infidelity_phase_opt},
          {"theta_opt", g.theta_opt},
          {"leakage", {g.leakage[0], g.leakage[1], g.leakage[2], g.leakage[3]}},
          {"mean_leakage", g.mean_leakage()}};
}

inline json settings_to_json(const Settings& st) {
  return {{"method", st.method},       {"T", st.T},
          {"s", st.s},                 {"V", st.V_hz},
          {"delta-offset", st.delta_offset_hz}, {"omega-rel", st.omega_rel},
          {"osc-freq", st.osc_freq_hz}, {"ecd-blockade", st.ecd_blockade},
          {"integrator", st.integrator}, {"substeps-per-period", st.substeps_per_period},
          {"min-substeps", st.min_substeps}, {"segments", st.segments},
          {"starts", st.starts},       {"seed", st.seed},
          {"max-iters", st.max_iters}, {"grad-tol", st.grad_tol},
          {"cost-target", st.cost_target}, {"T-min", st.T_min},
          {"T-max", st.T_max},         {"n-T", st.n_T},
          {"s-min", st.s_min},         {"s-max", st.s_max},
          {"n-s", st.n_s},             {"methods", st.methods},
          {"axis", st.axis},           {"detuning-min", st.detuning_min_hz},
          {"detuning-max", st.detuning_max_hz}, {"amplitude-min", st.amplitude_min},
          {"amplitude-max", st.amplitude_max}, {"points", st.points},
          {"out", st.out},             {"workers", st.workers}};
}

inline void write_run_metadata(const std::filesystem::path& dir, const std::string& command, const Settings& st) {
  write_json(dir / "metadata.json",
             {{"command", command}, {"code_version", kVersion}, {"seed", st.seed}, {"settings", settings_to_json(st)}});
}

inline std::vector<Method> parse_methods(const std::vector<std::string>& names, std::vector<Method> fallback) {
  if (names.empty()) return fallback;
  std::vector<Method> out;
  for (const auto& n : names) {
    try {
      out.push_back(method_from(n));
    } catch (const ParameterError& e) {
      throw UsageError(e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------- commands

inline int cmd_simulate(const Settings& st, std::ostream& out, std::ostream& err) {
  const double V = hz_to_rad(st.V_hz);
  const SweepParams sweep = SweepParams::scaled(st.T, st.s);
  const PropagationConfig prop = propagation_config(st);
  ErrorModel errors;
  errors.delta_offset = hz_to_rad(st.delta_offset_hz);
  errors.omega_rel = st.omega_rel;
  json j = {{"method", st.method}, {"T", st.T}, {"s", st.s}, {"V", st.V_hz},
            {"delta_offset", st.delta_offset_hz}, {"omega_rel", st.omega_rel}};
  GateResult g;
  const Method m = parse_methods({st.method}, {}).front();
  if (m == Method::original) {
    g = simulate_adiabatic(sweep, V, errors, prop);
  } else if (m == Method::ecd) {
    ECDParams e = st.osc_freq_hz > 0.0 ? ECDParams{hz_to_rad(st.osc_freq_hz), V} : matched_ecd_params(sweep, V);
    if (e.undersampled(st.T) && !st.quiet) err << "warning: fewer than 10 oscillation periods over T\n";
    j["osc_freq"] = rad_to_hz(e.osc_freq);
    g = simulate_ecd(sweep, e, errors, prop, blockade_term(st));
  } else {
    PiecewiseControl omega, delta;
    if (!st.pulse_dir.empty()) {
      const std::filesystem::path dir(st.pulse_dir);
      omega = control_from_json(read_json(dir / "omega.json"));
      delta = control_from_json(read_json(dir / "delta.json"));
    } else {
      OptimizedPulse p = optimize(V, optimizer_config(st), st.workers);
      j["optimizer"] = {{"iterations", p.iterations}, {"converged", p.converged}, {"best_start", p.best_start}};
      omega = std::move(p.omega_ctrl);
      delta = std::move(p.delta_ctrl);
    }
    j["pulse_area"] = pulse_area(omega);
    g = simulate_piecewise(omega, delta, V, errors);
  }
  j.update(gate_to_json(g));
  out << j.dump(2) << '\n';
  if (!st.out.empty()) {
    write_json(std::filesystem::path(st.out) / "result.json", j);
    write_run_metadata(st.out, "simulate", st);
  }
  return kExitOk;
}

inline int cmd_optimize(const Settings& st, std::ostream& out, std::ostream& err) {
  const std::filesystem::path dir = st.out.empty() ? "runs/optimize" : st.out;
  const OptimizerConfig cfg = optimizer_config(st);
  const OptimizedPulse p = optimize(hz_to_rad(st.V_hz), cfg, st.workers);
  save_optimized_pulse(p, dir);
  write_run_metadata(dir, "optimize", st);
  json summary = {{"final_infidelity", p.final_infidelity}, {"iterations", p.iterations},
                  {"converged", p.converged},               {"best_start", p.best_start},
                  {"pulse_area", pulse_area(p.omega_ctrl)}, {"out", dir.string()}};
  out << summary.dump(2) << '\n';
  if (!p.converged && !st.quiet) err << "warning: optimizer did not converge; best-so-far pulse written\n";
  return kExitOk;
}

inline int cmd_sweep(const Settings& st, std::ostream& out, std::ostream& err) {
  const std::filesystem::path dir = st.out.empty() ? "runs/fig1" : st.out;
  SweepGrid grid;
  grid.T_values = log_space(st.T_min, st.T_max, st.n_T);
  grid.s_values = lin_space(st.s_min, st.s_max, st.n_s);
  grid.V = hz_to_rad(st.V_hz);
  const auto methods = parse_methods(st.methods, {Method::ecd, Method::optimized});
  const Fig1Result res = run_fig1(grid, methods, run_options(st, err));
  json files = json::array();
  for (const auto& t : res.tables) {
    save_scan_table(t, dir / ("fig1_" + t.method));
    files.push_back("fig1_" + t.method + ".csv");
  }
  if (!res.pulse_area.values.empty()) {
    save_scan_table(res.pulse_area, dir / "fig1_optimized_pulse_area");
    files.push_back("fig1_optimized_pulse_area.csv");
  }
  json failures = json::array();
  for (const auto& f : res.failures)
    failures.push_back({{"method", f.method}, {"row", f.row}, {"col", f.col}, {"message", f.message}});
  write_json(dir / "failures.json", failures);
  write_run_metadata(dir, "sweep", st);
  out << json{{"out", dir.string()}, {"files", files}, {"failed_cells", res.failures.size()}}.dump(2) << '\n';
  return kExitOk;
}

inline int cmd_stability(const Settings& st, std::ostream& out, std::ostream& err) {
  const std::filesystem::path dir = st.out.empty() ? "runs/fig2" : st.out;
  std::vector<ErrorAxis> axes;
  if (st.axis == "both")
    axes = {ErrorAxis::detuning, ErrorAxis::amplitude};
  else
    try {
      axes = {error_axis_from(st.axis)};
    } catch (const ParameterError& e) {
      throw UsageError(e.what());
    }
  const auto methods = parse_methods(st.methods, {Method::original, Method::ecd, Method::optimized});
  const RunOptions opt = run_options(st, err);
  const StabilitySetup setup{st.T, st.s, hz_to_rad(st.V_hz)};
  const bool want_opt = std::find(methods.begin(), methods.end(), Method::optimized) != methods.end();
  OptimizedPulse pulse;
  if (want_opt) {
    pulse = optimize(setup.V, cell_optimizer_config(opt.optimizer, setup.T, setup.s), opt.workers);
    save_optimized_pulse(pulse, dir / "pulse");
  }
  json files = json::array();
  json minima = json::object();
  for (ErrorAxis axis : axes) {
    const ErrorRange range = axis == ErrorAxis::detuning
                                 ? ErrorRange{hz_to_rad(st.detuning_min_hz), hz_to_rad(st.detuning_max_hz), st.points}
                                 : ErrorRange{st.amplitude_min, st.amplitude_max, st.points};
    const Fig2Result res = run_fig2(axis, range, methods, setup, opt, want_opt ? &pulse : nullptr);
    for (const auto& t : res.tables) {
      const std::string stem = "fig2_" + to_string(axis) + "_" + t.method;
      save_scan_table(t, dir / stem);
      files.push_back(stem + ".csv");
      const auto col = t.column();
      minima[to_string(axis)][t.method] = t.x.values[argmin(col)];
    }
  }
  write_run_metadata(dir, "stability", st);
  out << json{{"out", dir.string()}, {"files", files}, {"argmin", minima}}.dump(2) << '\n';
  return kExitOk;
}

/// Quick invariant checks; one line per check.
inline int cmd_verify(const Settings& st, std::ostream& out) {
  int failed = 0;
  auto report = [&](const std::string& name, bool ok, const std::string& detail) {
    out << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
    if (!ok) ++failed;
  };
  auto sci = [](double v) {
    std::ostringstream s;
    s << std::scientific << std::setprecision(3) << v;
    return s.str();
  };

  {
    const Mat4 id = Mat4::Identity();
    Mat4 zz = Mat4::Zero();
    zz.diagonal() << 1.0, -1.0, -1.0, 1.0;
    const double a = infidelity(cz_target()), b = infidelity(id), c = infidelity(zz);
    report("gate formula", a == 0.0 && std::abs(b - 0.75) < 1e-15 && std::abs(c - 0.75) < 1e-15,
           "CZ " + sci(a) + ", I " + sci(b) + ", diag(1,-1,-1,1) " + sci(c));
  }
  {
    std::mt19937_64 rng(st.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const double T = kGridTMin * std::pow(kGridTMax / kGridTMin, u(rng));
      const double s = 1.0 + 3.8 * u(rng);
      const SweepParams sweep = SweepParams::scaled(T, s);
      const Mat9 prop = propagate(
          [&](double t) {
            return hamiltonian_adiabatic(saffman_rabi(t, sweep), saffman_detuning(t, sweep),
                                         mhz_to_rad(kDefaultBlockadeMHz));
          },
          T, propagation_config(st));
      worst = std::max(worst, unitarity_defect(prop));
      const Mat9 h = hamiltonian_adiabatic(s * mhz_to_rad(kReferenceRabiMHz) * u(rng),
                                           s * mhz_to_rad(kReferenceDetuningMHz) * (2 * u(rng) - 1),
                                           mhz_to_rad(kDefaultBlockadeMHz));
      worst = std::max(worst, unitarity_defect(expm_hermitian(h, T)));
    }
    report("unitarity", worst < 1e-8, "max |U^dag U - I| " + sci(worst));
  }
  {
    OptimizerConfig cfg = OptimizerConfig::for_scaling(0.27e-6, 1.0);
    cfg.n_segments = 32;
    const GateCostModel model(mhz_to_rad(kDefaultBlockadeMHz), cfg);
    const std::vector<double> x = random_start(cfg, 0);
    std::vector<double> g(x.size());
    model.cost_and_gradient(x, g);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); i += 7) {
      std::vector<double> xp = x, xm = x;
      xp[i] += 1e-6;
      xm[i] -= 1e-6;
      const double fd = (model.cost(xp) - model.cost(xm)) / 2e-6;
      worst = std::max(worst, std::abs(fd - g[i]) / std::max(std::abs(g[i]), 1e-8));
    }
    report("gradient", worst < 1e-4, "max relative deviation from finite differences " + sci(worst));
  }
  {
    PiecewiseControl c{std::vector<double>(64, 3.0), 1e-7, 1e8};
    const PiecewiseControl f = band_limit(c);
    double dev = 0.0;
    for (double v : f.values) dev = std::max(dev, std::abs(v - 3.0));
    report("band limit", dev < 1e-12, "constant preserved to " + sci(dev));
  }
  {
    ScanTable t;
    t.x = {"T", "s", {1e-7, 2.5e-7}};
    t.y = {"s", "", {1.0, 4.8}};
    t.method = "ecd";
    t.values = {0.1, 1.0 / 3.0, kNaN, 1e-300};
    const ScanTable r = scan_table_from_csv(to_csv(t));
    bool same = r.values.size() == t.values.size();
    for (std::size_t i = 0; same && i < t.values.size(); ++i)
      same = (std::isnan(t.values[i]) && std::isnan(r.values[i])) || t.values[i] == r.values[i];
    report("table round trip", same, same ? "bit-exact" : "values differ");
  }
  return failed == 0 ? kExitOk : kExitNumerical;
}

// ---------------------------------------------------------------- parsing

/// The JSON object as "--key value" tokens.
inline std::vector<std::string> config_tokens(const json& cfg) {
  if (!cfg.is_object()) throw UsageError("config file must hold a JSON object");
  std::vector<std::string> tokens;
  auto scalar = [](const json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
    if (v.is_number()) return format_double(v.get<double>());
    throw UsageError("config values must be strings, numbers, booleans or arrays of those");
  };
  for (const auto& [key, v] : cfg.items()) {
    const std::string flag = "--" + key;
    if (v.is_boolean()) {
      if (v.get<bool>()) tokens.push_back(flag);
    } else if (v.is_array()) {
      tokens.push_back(flag);
      for (const auto& e : v) tokens.push_back(scalar(e));
    } else {
      tokens.push_back(flag);
      tokens.push_back(scalar(v));
    }
  }
  return tokens;
}

inline void add_physics(CLI::App* c, Settings& st) {
  c->add_option("--T", st.T, "protocol time [s]")->check(CLI::PositiveNumber);
  c->add_option("--s", st.s, "amplitude scaling")->check(CLI::PositiveNumber);
  c->add_option("--V", st.V_hz, "blockade V/(2 pi) [Hz]")->check(CLI::PositiveNumber);
  c->add_option("--integrator", st.integrator, "magnus4, expm_midpoint or rk4")
      ->check(CLI::IsMember({"magnus4", "expm_midpoint", "rk4"}));
  c->add_option("--substeps-per-period", st.substeps_per_period, "substeps per fast oscillation period")
      ->check(CLI::Range(10, 1 << 20));
  c->add_option("--min-substeps", st.min_substeps, "minimum substeps over T")->check(CLI::Range(1, 1 << 26));
  c->add_option("--ecd-blockade", st.ecd_blockade, "pair or single_atom")
      ->check(CLI::IsMember({"pair", "single_atom"}));
  c->add_option("--workers", st.workers, "worker threads (0: RYDCZ_WORKERS or all cores)");
  c->add_option("--out", st.out, "run directory");
  c->add_flag("--quiet", st.quiet, "suppress progress output");
}

inline void add_optimizer(CLI::App* c, Settings& st) {
  c->add_option("--segments", st.segments, "piecewise-constant segments")->check(CLI::Range(8, 1 << 16));
  c->add_option("--starts", st.starts, "random restarts")->check(CLI::Range(1, 1 << 16));
  c->add_option("--seed", st.seed, "random seed");
  c->add_option("--max-iters", st.max_iters, "iteration budget per start")->check(CLI::Range(1, 1 << 30));
  c->add_option("--grad-tol", st.grad_tol, "gradient max-norm tolerance")->check(CLI::NonNegativeNumber);
  c->add_option("--cost-target", st.cost_target, "stop below this infidelity (0 disables)")
      ->check(CLI::NonNegativeNumber);
}

/// Entry point; argv[0] is the program name.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  Settings st;
  CLI::App app{"Rydberg CZ gate simulation, optimization and scans", "rydcz"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;

  CLI::App* sim = app.add_subcommand("simulate", "simulate one gate and print its figures of merit");
  CLI::App* opt = app.add_subcommand("optimize", "optimize a pulse and write it to the run directory");
  CLI::App* swp = app.add_subcommand("sweep", "infidelity over the (T, s) grid");
  CLI::App* stb = app.add_subcommand("stability", "infidelity against static pulse errors");
  CLI::App* ver = app.add_subcommand("verify", "run the invariant checks");
  for (CLI::App* c : {sim, opt, swp, stb, ver}) {
    c->add_option("--config", config_path, "JSON file with flag values");
    add_physics(c, st);
  }
  for (CLI::App* c : {sim, opt, swp, stb}) add_optimizer(c, st);
  sim->add_option("--method", st.method, "original, ecd or optimized")
      ->check(CLI::IsMember({"original", "ecd", "optimized"}));
  sim->add_option("--delta-offset", st.delta_offset_hz, "static detuning error / (2 pi) [Hz]");
  sim->add_option("--omega-rel", st.omega_rel, "relative amplitude error");
  sim->add_option("--osc-freq", st.osc_freq_hz, "eCD oscillation frequency / (2 pi) [Hz], 0 calibrates")
      ->check(CLI::NonNegativeNumber);
  sim->add_option("--pulse-dir", st.pulse_dir, "directory with omega.json and delta.json");
  swp->add_option("--T-min", st.T_min, "shortest T [s]")->check(CLI::PositiveNumber);
  swp->add_option("--T-max", st.T_max, "longest T [s]")->check(CLI::PositiveNumber);
  swp->add_option("--n-T", st.n_T, "log-spaced T points")->check(CLI::Range(1, 4096));
  swp->add_option("--s-min", st.s_min, "smallest s")->check(CLI::PositiveNumber);
  swp->add_option("--s-max", st.s_max, "largest s")->check(CLI::PositiveNumber);
  swp->add_option("--n-s", st.n_s, "linearly spaced s points")->check(CLI::Range(1, 4096));
  for (CLI::App* c : {swp, stb}) {
    c->add_option("--methods", st.methods, "subset of original, ecd, optimized")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
        ->delimiter(',')
        ->check(CLI::IsMember({"original", "ecd", "optimized"}));
  }
  stb->add_option("--axis", st.axis, "detuning, amplitude or both")
      ->check(CLI::IsMember({"detuning", "amplitude", "both"}));
  stb->add_option("--detuning-min", st.detuning_min_hz, "smallest detuning error / (2 pi) [Hz]");
  stb->add_option("--detuning-max", st.detuning_max_hz, "largest detuning error / (2 pi) [Hz]");
  stb->add_option("--amplitude-min", st.amplitude_min, "smallest relative amplitude error");
  stb->add_option("--amplitude-max", st.amplitude_max, "largest relative amplitude error");
  stb->add_option("--points", st.points, "points per scan")->check(CLI::Range(1, 100000));

  // Splice the config file in right after the subcommand name so that flags
  // on the command line come later and take precedence.
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    std::vector<std::string> rest;
    std::string cfg_file;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config") {
        if (i + 1 >= args.size()) throw UsageError("--config needs a file");
        cfg_file = args[++i];
      } else if (args[i].rfind("--config=", 0) == 0) {
        cfg_file = args[i].substr(9);
      } else {
        rest.push_back(args[i]);
      }
    }
    if (!cfg_file.empty()) {
      json cfg;
      try {
        cfg = read_json(cfg_file);
      } catch (const FormatError& e) {
        throw UsageError(e.what());
      }
      const auto tokens = config_tokens(cfg);
      auto sub = std::find_if(rest.begin(), rest.end(), [&](const std::string& a) {
        return a == "simulate" || a == "optimize" || a == "sweep" || a == "stability" || a == "verify";
      });
      if (sub == rest.end()) throw UsageError("--config needs a subcommand");
      rest.insert(sub + 1, tokens.begin(), tokens.end());
    }
    std::reverse(rest.begin(), rest.end());
    app.parse(rest);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (sim->parsed()) return cmd_simulate(st, out, err);
    if (opt->parsed()) return cmd_optimize(st, out, err);
    if (swp->parsed()) return cmd_sweep(st, out, err);
    if (stb->parsed()) return cmd_stability(st, out, err);
    if (ver->parsed()) return cmd_verify(st, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace rydcz::cli
