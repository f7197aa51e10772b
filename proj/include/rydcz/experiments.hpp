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

// Parameter grids over (T, s) and static-error scans, plus the CSV/JSON
// persistence of their results and of optimized pulses.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "rydcz/dynamics.hpp"
#include "rydcz/optimizer.hpp"
#include "rydcz/version.hpp"
#include "rydcz/worker_pool.hpp"

namespace rydcz {

using json = nlohmann::json;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Method { original, ecd, optimized };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::original: return "original";
    case Method::ecd: return "ecd";
    case Method::optimized: return "optimized";
  }
  return "?";
}

inline Method method_from(const std::string& name) {
  if (name == "original") return Method::original;
  if (name == "ecd") return Method::ecd;
  if (name == "optimized") return Method::optimized;
  throw ParameterError("unknown method '" + name + "'");
}

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------- numbers

/// Shortest text that parses back to the same double ("nan", "inf" too).
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw FormatError("not a number: '" + std::string(s) + "'");
  return v;
}

inline json number_to_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
inline double number_from_json(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

// ---------------------------------------------------------------- grids

/// n points from lo to hi, equally spaced in log (n = 1 gives lo).
inline std::vector<double> log_space(double lo, double hi, std::size_t n) {
  if (n == 0) throw ParameterError("log_space: need at least one point");
  if (!(lo > 0.0) || !(hi >= lo)) throw ParameterError("log_space: need 0 < lo <= hi");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
  if (n > 1) v.back() = hi;
  return v;
}

inline std::vector<double> lin_space(double lo, double hi, std::size_t n) {
  if (n == 0) throw ParameterError("lin_space: need at least one point");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  if (n > 1) v.back() = hi;
  return v;
}

inline constexpr double kGridTMin = 0.027e-6;
inline constexpr double kGridTMax = 0.54e-6;
inline constexpr double kDefaultBlockadeMHz = 500.0;

struct SweepGrid {
  std::vector<double> T_values = log_space(kGridTMin, kGridTMax, 24);  // s
  std::vector<double> s_values = lin_space(1.0, 4.8, 8);
  double V = mhz_to_rad(kDefaultBlockadeMHz);                         // rad/s

  void validate() const {
    if (T_values.empty() || s_values.empty()) throw ParameterError("sweep grid: empty axis");
    for (double T : T_values)
      if (!(T > 0.0)) throw ParameterError("sweep grid: T must be positive");
    for (double s : s_values)
      if (!(s > 0.0)) throw ParameterError("sweep grid: s must be positive");
    if (!(V > 0.0)) throw ParameterError("sweep grid: V must be positive");
  }
};

// ---------------------------------------------------------------- tables

struct Axis {
  std::string label;
  std::string unit;
  std::vector<double> values;
};

/// Rows follow the x axis, columns the y axis. A table with an empty y axis
/// is one-dimensional with a single column.
struct ScanTable {
  Axis x;
  Axis y;
  std::string method;
  std::string quantity = "infidelity";
  std::vector<double> values;  // row-major
  json metadata = json::object();

  std::size_t rows() const { return x.values.size(); }
  std::size_t cols() const { return y.values.empty() ? 1 : y.values.size(); }
  double& at(std::size_t r, std::size_t c = 0) { return values[r * cols() + c]; }
  double at(std::size_t r, std::size_t c = 0) const { return values[r * cols() + c]; }

  void resize() { values.assign(rows() * cols(), kNaN); }

  void validate() const {
    if (values.size() != rows() * cols()) throw FormatError("scan table: value count does not match the axes");
    if (quantity == "infidelity")
      for (double v : values)
        if (std::isfinite(v) && (v < 0.0 || v > 1.0)) throw FormatError("scan table: infidelity outside [0, 1]");
  }

  /// Column c as a one-dimensional series over x.
  std::vector<double> column(std::size_t c = 0) const {
    std::vector<double> out(rows());
    for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, c);
    return out;
  }
};

/// Header: "x|y,<y values...>" for a grid, "x,<quantity>" for a series.
inline std::string to_csv(const ScanTable& t) {
  t.validate();
  std::ostringstream out;
  if (t.y.values.empty()) {
    out << t.x.label << ',' << t.quantity << '\n';
  } else {
    out << t.x.label << '|' << t.y.label;
    for (double v : t.y.values) out << ',' << format_double(v);
    out << '\n';
  }
  for (std::size_t r = 0; r < t.rows(); ++r) {
    out << format_double(t.x.values[r]);
    for (std::size_t c = 0; c < t.cols(); ++c) out << ',' << format_double(t.at(r, c));
    out << '\n';
  }
  return out.str();
}

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) cells.push_back(cell);
  if (!line.empty() && line.back() == sep) cells.emplace_back();
  return cells;
}

}  // namespace detail

/// Inverse of to_csv for the axes and values; units, method and metadata
/// live in the JSON sidecar.
inline ScanTable scan_table_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("scan table csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split(line, ',');
  if (header.size() < 2) throw FormatError("scan table csv: header needs at least two cells");
  ScanTable t;
  const auto bar = header[0].find('|');
  if (bar == std::string::npos) {
    if (header.size() != 2) throw FormatError("scan table csv: series header must have two cells");
    t.x.label = header[0];
    t.quantity = header[1];
  } else {
    t.x.label = header[0].substr(0, bar);
    t.y.label = header[0].substr(bar + 1);
    for (std::size_t c = 1; c < header.size(); ++c) t.y.values.push_back(parse_double(header[c]));
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split(line, ',');
    if (cells.size() != t.cols() + 1)
      throw FormatError("scan table csv: line " + std::to_string(line_no) + " has " +
                        std::to_string(cells.size()) + " cells, expected " + std::to_string(t.cols() + 1));
    t.x.values.push_back(parse_double(cells[0]));
    for (std::size_t c = 1; c < cells.size(); ++c) t.values.push_back(parse_double(cells[c]));
  }
  t.validate();
  return t;
}

inline json axis_to_json(const Axis& a) {
  json v = json::array();
  for (double x : a.values) v.push_back(number_to_json(x));
  return {{"label", a.label}, {"unit", a.unit}, {"values", v}};
}

inline Axis axis_from_json(const json& j) {
  Axis a;
  a.label = j.at("label").get<std::string>();
  a.unit = j.value("unit", "");
  for (const auto& v : j.at("values")) a.values.push_back(number_from_json(v));
  return a;
}

/// Self-contained JSON form, and the sidecar written next to the CSV.
inline json to_json(const ScanTable& t) {
  t.validate();
  json values = json::array();
  for (std::size_t r = 0; r < t.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < t.cols(); ++c) row.push_back(number_to_json(t.at(r, c)));
    values.push_back(std::move(row));
  }
  return {{"method", t.method},   {"quantity", t.quantity}, {"x_axis", axis_to_json(t.x)},
          {"y_axis", axis_to_json(t.y)}, {"values", values}, {"metadata", t.metadata}};
}

inline ScanTable scan_table_from_json(const json& j) {
  ScanTable t;
  t.method = j.value("method", "");
  t.quantity = j.value("quantity", "infidelity");
  t.x = axis_from_json(j.at("x_axis"));
  t.y = axis_from_json(j.at("y_axis"));
  t.metadata = j.value("metadata", json::object());
  const auto& values = j.at("values");
  if (values.size() != t.rows()) throw FormatError("scan table json: row count does not match the x axis");
  for (const auto& row : values) {
    if (row.size() != t.cols()) throw FormatError("scan table json: column count does not match the y axis");
    for (const auto& v : row) t.values.push_back(number_from_json(v));
  }
  t.validate();
  return t;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
  if (!out) throw FormatError("write failed for " + path.string());
}

inline void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }
inline json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

/// Writes <stem>.csv and <stem>.json.
inline void save_scan_table(const ScanTable& t, const std::filesystem::path& stem) {
  write_text(std::filesystem::path(stem).concat(".csv"), to_csv(t));
  write_json(std::filesystem::path(stem).concat(".json"), to_json(t));
}

/// Values and axes from the CSV; method, units and metadata from the sidecar.
inline ScanTable load_scan_table(const std::filesystem::path& stem) {
  ScanTable t = scan_table_from_csv(read_text(std::filesystem::path(stem).concat(".csv")));
  const json side = read_json(std::filesystem::path(stem).concat(".json"));
  const ScanTable meta = scan_table_from_json(side);
  if (meta.rows() != t.rows() || meta.cols() != t.cols()) throw FormatError("scan table: csv and json shapes differ");
  t.method = meta.method;
  t.x.unit = meta.x.unit;
  t.y.unit = meta.y.unit;
  t.metadata = meta.metadata;
  return t;
}

/// Index of the smallest finite entry of a series (first one on ties).
inline std::size_t argmin(const std::vector<double>& v) {
  std::size_t best = v.size();
  for (std::size_t i = 0; i < v.size(); ++i)
    if (std::isfinite(v[i]) && (best == v.size() || v[i] < v[best])) best = i;
  if (best == v.size()) throw FormatError("argmin: no finite entries");
  return best;
}

/// Index of the entry closest to x.
inline std::size_t nearest_index(const std::vector<double>& grid, double x) {
  if (grid.empty()) throw ParameterError("nearest_index: empty grid");
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (std::abs(grid[i] - x) < std::abs(grid[best] - x)) best = i;
  return best;
}

// ---------------------------------------------------------------- pulses

/// Rows "t_start,value".
inline std::string control_to_csv(const PiecewiseControl& c) {
  std::ostringstream out;
  out << "t_start,value\n";
  for (std::size_t i = 0; i < c.n_segments(); ++i)
    out << format_double(c.t_start(i)) << ',' << format_double(c.values[i]) << '\n';
  return out.str();
}

inline json control_to_json(const PiecewiseControl& c) {
  return {{"T", c.T}, {"cutoff", c.cutoff}, {"n_segments", c.n_segments()}, {"dt", c.dt()}, {"values", c.values}};
}

inline PiecewiseControl control_from_json(const json& j) {
  PiecewiseControl c;
  try {
    c.T = j.at("T").get<double>();
    c.cutoff = j.value("cutoff", 0.0);
    c.values = j.at("values").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("piecewise control json: ") + e.what());
  }
  if (j.contains("n_segments") && j.at("n_segments").get<std::size_t>() != c.values.size())
    throw FormatError("piecewise control json: n_segments does not match the values");
  c.validate();
  return c;
}

inline json trace_to_json(const OptimizedPulse& p) {
  json it = json::array();
  for (std::size_t i = 0; i < p.history.size(); ++i) it.push_back({{"iteration", i}, {"cost", p.history[i]}});
  return {{"final_infidelity", p.final_infidelity},
          {"iterations", p.iterations},
          {"converged", p.converged},
          {"best_start", p.best_start},
          {"trace", it}};
}

inline json optimizer_config_to_json(const OptimizerConfig& c) {
  return {{"n_segments", c.n_segments}, {"T", c.T},
          {"omega_bound", c.omega_bound}, {"delta_bound", c.delta_bound},
          {"cutoff", c.cutoff}, {"max_iters", c.max_iters},
          {"grad_tol", c.grad_tol}, {"cost_target", c.cost_target},
          {"n_starts", c.n_starts}, {"rng_seed", c.rng_seed},
          {"clamp_knee", c.clamp_knee}, {"lbfgs_memory", c.lbfgs_memory},
          {"init_scale", c.init_scale}};
}

/// Writes omega.{csv,json}, delta.{csv,json} and trace.json into dir.
inline void save_optimized_pulse(const OptimizedPulse& p, const std::filesystem::path& dir) {
  write_text(dir / "omega.csv", control_to_csv(p.omega_ctrl));
  write_json(dir / "omega.json", control_to_json(p.omega_ctrl));
  write_text(dir / "delta.csv", control_to_csv(p.delta_ctrl));
  write_json(dir / "delta.json", control_to_json(p.delta_ctrl));
  write_json(dir / "trace.json", trace_to_json(p));
}

// ---------------------------------------------------------------- runs

struct CellFailure {
  std::string method;
  std::size_t row = 0;
  std::size_t col = 0;
  std::string message;
};

/// Settings shared by the grid and the error scans. The optimizer entry is a
/// template: T, bounds and cutoff are replaced per cell.
struct RunOptions {
  OptimizerConfig optimizer;
  PropagationConfig propagation;
  BlockadeTerm ecd_blockade = BlockadeTerm::pair;
  std::size_t workers = 0;
  std::function<void(const std::string&)> log;  // optional progress sink
};

/// Per-cell optimizer settings at (T, s).
inline OptimizerConfig cell_optimizer_config(const OptimizerConfig& base, double T, double s) {
  OptimizerConfig c = base;
  const OptimizerConfig scaled = OptimizerConfig::for_scaling(T, s);
  c.T = scaled.T;
  c.omega_bound = scaled.omega_bound;
  c.delta_bound = scaled.delta_bound;
  c.cutoff = scaled.cutoff;
  return c;
}

/// Oscillation frequency giving an eCD peak amplitude of Omega_max.
inline ECDParams matched_ecd_params(const SweepParams& sweep, double blockade) {
  return ECDParams{calibrate_osc_freq(sweep.omega_max, SmoothedSweep(sweep)), blockade};
}

inline json run_metadata(const RunOptions& o, double blockade) {
  return {{"code_version", kVersion},
          {"V", blockade},
          {"seed", o.optimizer.rng_seed},
          {"optimizer", optimizer_config_to_json(o.optimizer)},
          {"propagation",
           {{"method", to_string(o.propagation.method)},
            {"substeps_per_fast_period", o.propagation.substeps_per_fast_period},
            {"min_substeps", o.propagation.min_substeps}}},
          {"ecd_blockade", o.ecd_blockade == BlockadeTerm::pair ? "pair" : "single_atom"},
          {"metric", "phase_optimized_infidelity"}};
}

struct Fig1Result {
  std::vector<ScanTable> tables;  // one per requested method, in request order
  ScanTable pulse_area;           // optimized pulse areas; empty unless optimized ran
  std::vector<CellFailure> failures;

  const ScanTable& table(Method m) const {
    for (const auto& t : tables)
      if (t.method == to_string(m)) return t;
    throw ParameterError("no table for method " + to_string(m));
  }
};

/// Phase-optimized infidelity on every (T, s) cell of the grid.
inline Fig1Result run_fig1(const SweepGrid& grid, const std::vector<Method>& methods, const RunOptions& opt = {}) {
  grid.validate();
  Fig1Result res;
  const bool want_opt = std::find(methods.begin(), methods.end(), Method::optimized) != methods.end();
  auto make_table = [&](const std::string& method, const std::string& quantity) {
    ScanTable t;
    t.x = {"T", "s", grid.T_values};
    t.y = {"s", "", grid.s_values};
    t.method = method;
    t.quantity = quantity;
    t.resize();
    t.metadata = run_metadata(opt, grid.V);
    return t;
  };
  for (Method m : methods) res.tables.push_back(make_table(to_string(m), "infidelity"));
  if (want_opt) res.pulse_area = make_table(to_string(Method::optimized), "pulse_area");

  const std::size_t nT = grid.T_values.size(), ns = grid.s_values.size();
  const std::size_t jobs = methods.size() * nT * ns;
  std::mutex mutex;
  parallel_for(jobs, opt.workers, [&](std::size_t job) {
    const std::size_t mi = job / (nT * ns);
    const std::size_t r = (job / ns) % nT;
    const std::size_t c = job % ns;
    const Method m = methods[mi];
    const double T = grid.T_values[r], s = grid.s_values[c];
    double value = kNaN, area = kNaN;
    try {
      const SweepParams sweep = SweepParams::scaled(T, s);
      switch (m) {
        case Method::original:
          value = simulate_adiabatic(sweep, grid.V, {}, opt.propagation).infidelity_phase_opt;
          break;
        case Method::ecd:
          value = simulate_ecd(sweep, matched_ecd_params(sweep, grid.V), {}, opt.propagation, opt.ecd_blockade)
                      .infidelity_phase_opt;
          break;
        case Method::optimized: {
          const OptimizedPulse p = optimize(grid.V, cell_optimizer_config(opt.optimizer, T, s), 1);
          value = p.final_infidelity;
          area = pulse_area(p.omega_ctrl);
          break;
        }
      }
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(mutex);
      res.failures.push_back({to_string(m), r, c, e.what()});
      if (opt.log) opt.log("cell " + to_string(m) + " T=" + format_double(T) + " s=" + format_double(s) +
                           " failed: " + e.what());
    }
    std::lock_guard<std::mutex> lock(mutex);
    res.tables[mi].at(r, c) = value;
    if (m == Method::optimized) res.pulse_area.at(r, c) = area;
    if (opt.log)
      opt.log(to_string(m) + " T=" + format_double(T) + " s=" + format_double(s) + " -> " + format_double(value));
  });
  std::sort(res.failures.begin(), res.failures.end(), [](const CellFailure& a, const CellFailure& b) {
    return std::tie(a.method, a.row, a.col) < std::tie(b.method, b.row, b.col);
  });
  return res;
}

enum class ErrorAxis { detuning, amplitude };

inline std::string to_string(ErrorAxis a) { return a == ErrorAxis::detuning ? "detuning" : "amplitude"; }

inline ErrorAxis error_axis_from(const std::string& name) {
  if (name == "detuning") return ErrorAxis::detuning;
  if (name == "amplitude") return ErrorAxis::amplitude;
  throw ParameterError("unknown error axis '" + name + "'");
}

/// Error values: rad/s absolute for detuning, dimensionless relative for
/// amplitude.
struct ErrorRange {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 1;

  std::vector<double> values() const {
    if (n == 0) throw ParameterError("error range: need at least one point");
    if (!(hi >= lo)) throw ParameterError("error range: need lo <= hi");
    return lin_space(lo, hi, n);
  }
};

inline ErrorModel error_at(ErrorAxis axis, double value) {
  ErrorModel e;
  if (axis == ErrorAxis::detuning)
    e.delta_offset = value;
  else
    e.omega_rel = value;
  return e;
}

inline ErrorRange default_error_range(ErrorAxis axis) {
  return axis == ErrorAxis::detuning ? ErrorRange{-mhz_to_rad(2.0), mhz_to_rad(2.0), 41} : ErrorRange{-0.2, 0.2, 41};
}

struct StabilitySetup {
  double T = kGridTMax;
  double s = 1.0;
  double V = mhz_to_rad(kDefaultBlockadeMHz);
};

struct Fig2Result {
  std::vector<ScanTable> tables;  // one per method
  OptimizedPulse pulse;           // zero-error optimum used for every point
  std::vector<CellFailure> failures;

  const ScanTable& table(Method m) const {
    for (const auto& t : tables)
      if (t.method == to_string(m)) return t;
    throw ParameterError("no table for method " + to_string(m));
  }
};

/// Infidelity against one static error. The optimized pulse is computed once
/// at zero error (or taken from `pulse`) and only re-evaluated.
inline Fig2Result run_fig2(ErrorAxis axis, const ErrorRange& range, const std::vector<Method>& methods,
                           const StabilitySetup& setup = {}, const RunOptions& opt = {},
                           const OptimizedPulse* pulse = nullptr) {
  const std::vector<double> errors = range.values();
  const SweepParams sweep = SweepParams::scaled(setup.T, setup.s);
  Fig2Result res;
  const bool want_opt = std::find(methods.begin(), methods.end(), Method::optimized) != methods.end();
  if (want_opt) {
    if (pulse) {
      res.pulse = *pulse;
    } else {
      res.pulse = optimize(setup.V, cell_optimizer_config(opt.optimizer, setup.T, setup.s), opt.workers);
      if (opt.log) opt.log("optimized zero-error pulse: infidelity " + format_double(res.pulse.final_infidelity));
    }
  }
  ECDParams ecd{};
  const bool want_ecd = std::find(methods.begin(), methods.end(), Method::ecd) != methods.end();
  if (want_ecd) ecd = matched_ecd_params(sweep, setup.V);

  for (Method m : methods) {
    ScanTable t;
    t.x = {axis == ErrorAxis::detuning ? "delta_offset" : "omega_rel", axis == ErrorAxis::detuning ? "rad/s" : "",
           errors};
    t.method = to_string(m);
    t.resize();
    t.metadata = run_metadata(opt, setup.V);
    t.metadata["T"] = setup.T;
    t.metadata["s"] = setup.s;
    t.metadata["error_axis"] = to_string(axis);
    if (m == Method::ecd) t.metadata["osc_freq"] = ecd.osc_freq;
    res.tables.push_back(std::move(t));
  }
  std::mutex mutex;
  const std::size_t n = errors.size();
  parallel_for(methods.size() * n, opt.workers, [&](std::size_t job) {
    const std::size_t mi = job / n, i = job % n;
    const ErrorModel e = error_at(axis, errors[i]);
    double value = kNaN;
    try {
      switch (methods[mi]) {
        case Method::original:
          value = simulate_adiabatic(sweep, setup.V, e, opt.propagation).infidelity_phase_opt;
          break;
        case Method::ecd:
          value = simulate_ecd(sweep, ecd, e, opt.propagation, opt.ecd_blockade).infidelity_phase_opt;
          break;
        case Method::optimized:
          value = simulate_piecewise(res.pulse.omega_ctrl, res.pulse.delta_ctrl, setup.V, e).infidelity_phase_opt;
          break;
      }
    } catch (const std::exception& ex) {
      std::lock_guard<std::mutex> lock(mutex);
      res.failures.push_back({to_string(methods[mi]), i, 0, ex.what()});
      if (opt.log) opt.log("stability " + to_string(methods[mi]) + " point " + std::to_string(i) + " failed: " + ex.what());
    }
    std::lock_guard<std::mutex> lock(mutex);
    res.tables[mi].at(i) = value;
  });
  std::sort(res.failures.begin(), res.failures.end(), [](const CellFailure& a, const CellFailure& b) {
    return std::tie(a.method, a.row) < std::tie(b.method, b.row);
  });
  return res;
}

}  // namespace rydcz
