/*
 * Copyright 2026 The pkrr Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "pkrr/run.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pkrr/error.hpp"
#include "pkrr/hetero.hpp"
#include "pkrr/homo.hpp"
#include "pkrr/inference.hpp"
#include "pkrr/linalg.hpp"
#include "pkrr/panel_io.hpp"
#include "pkrr/spectral.hpp"
#include "pkrr/version.hpp"

namespace fs = std::filesystem;

namespace pkrr {

const char* to_string(Mode m) {
  switch (m) {
    case Mode::FitHetero: return "fit-hetero";
    case Mode::FitHomo: return "fit-homo";
    case Mode::Interval: return "interval";
    case Mode::SimulateMse: return "simulate-mse";
    case Mode::SimulateCoverage: return "simulate-coverage";
    case Mode::Generate: return "generate";
  }
  return "?";
}

Mode parse_mode(const std::string& s) {
  for (Mode m : {Mode::FitHetero, Mode::FitHomo, Mode::Interval,
                 Mode::SimulateMse, Mode::SimulateCoverage, Mode::Generate}) {
    if (s == to_string(m)) return m;
  }
  throw SpecError("unknown mode '" + s +
                  "' (fit-hetero, fit-homo, interval, simulate-mse, "
                  "simulate-coverage, generate)");
}

const std::vector<OptionKey>& run_option_keys() {
  static const std::vector<OptionKey> keys = {
      {"data", "panel CSV (unit,time,y,x1..xd[,f1..fq])"},
      {"kernel", "kernel spec, e.g. gaussian(b=1), poly(k=3), add([0]:gaussian,[1]:linear)"},
      {"eta", "smoothing parameter: a positive number or 'gcv'"},
      {"eta-lo", "GCV grid lower bound (times tr(K)/n)"},
      {"eta-hi", "GCV grid upper bound (times tr(K)/n)"},
      {"eta-points", "GCV grid size"},
      {"refine", "refine the GCV minimum between grid neighbours (true/false)"},
      {"level", "confidence level in (0, 1)"},
      {"eta-deflation", "factor in (0, 1] applied to eta before interval construction (undersmoothing)"},
      {"seed", "simulation seed"},
      {"reps", "Monte Carlo replications"},
      {"nt-cap", "largest pooled N*T accepted"},
      {"threads", "worker threads (0: all logical cores)"},
      {"grid-file", "prediction points, CSV with header x1..xd"},
      {"grid-lo", "prediction grid lower end (first coordinate)"},
      {"grid-hi", "prediction grid upper end (first coordinate)"},
      {"grid-points", "prediction grid size"},
      {"interval", "interval kind: mean, prediction, g, beta"},
      {"unit", "unit label for mean and prediction intervals"},
      {"x", "evaluation point, comma separated"},
      {"f0", "observed factor row at the new period (default: last period)"},
      {"xbar0", "covariate cross-section mean at the new period (default: last period)"},
      {"noise", "prediction noise model: gaussian or empirical"},
      {"coordinate", "input coordinate of a linear block (beta interval)"},
      {"design", "simulation design: hetero_sj, homo_beta, firm_analog"},
      {"n", "simulated units"},
      {"t", "simulated periods"},
      {"noise-sd", "noise sd (homo_beta, firm_analog)"},
      {"common-g", "hetero_sj: one regression function for all units"},
      {"sqrt-innovation-scale", "hetero_sj: AR innovations scaled by sqrt(1 - rho^2)"},
      {"model", "simulate-mse estimator: homo or hetero"},
      {"center-mse", "compare g_hat and g after removing their mean difference"},
      {"x-grid", "coverage grid, comma separated (default: 100 points in [0, 1])"},
      {"out-dir", "directory for the output files"},
  };
  return keys;
}

namespace {

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* b = v.data();
  const char* e = b + v.size();
  if (b != e && *b == '+') ++b;
  const auto [ptr, ec] = std::from_chars(b, e, out);
  if (v.empty() || ec != std::errc() || ptr != e || !std::isfinite(out)) {
    throw InputError("option '" + key + "': '" + v + "' is not a number");
  }
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw InputError("option '" + key + "': '" + v +
                     "' is not a non-negative integer");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InputError("option '" + key + "': '" + v + "' is not a boolean");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    out.push_back(to_double(key, b == std::string::npos
                                     ? std::string()
                                     : item.substr(b, e - b + 1)));
  }
  if (out.empty()) throw InputError("option '" + key + "' is empty");
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void set_option(RunConfig& c, const std::string& raw_key,
                const std::string& value) {
  std::string key = raw_key;
  if (key.rfind("--", 0) == 0) key = key.substr(2);
  const std::string& v = value;
  if (key == "mode") c.mode = parse_mode(v);
  else if (key == "data") c.data = v;
  else if (key == "kernel") c.kernel = v;
  else if (key == "eta") {
    if (v == "gcv") {
      c.eta.reset();
    } else {
      c.eta = to_double(key, v);
    }
  }
  else if (key == "eta-lo") c.gcv.lo = to_double(key, v);
  else if (key == "eta-hi") c.gcv.hi = to_double(key, v);
  else if (key == "eta-points") c.gcv.points = int(to_uint(key, v));
  else if (key == "refine") c.gcv.refine = to_bool(key, v);
  else if (key == "level") c.level = to_double(key, v);
  else if (key == "eta-deflation") c.eta_deflation = to_double(key, v);
  else if (key == "seed") c.seed = to_uint(key, v);
  else if (key == "reps") c.reps = to_uint(key, v);
  else if (key == "nt-cap") c.nt_cap = to_uint(key, v);
  else if (key == "threads") c.threads = int(to_uint(key, v));
  else if (key == "grid-file") c.grid_file = v;
  else if (key == "grid-lo") c.grid_lo = to_double(key, v);
  else if (key == "grid-hi") c.grid_hi = to_double(key, v);
  else if (key == "grid-points") c.grid_points = to_uint(key, v);
  else if (key == "interval") c.interval = v;
  else if (key == "unit") c.unit = v;
  else if (key == "x") c.x = to_list(key, v);
  else if (key == "f0") c.f0 = to_list(key, v);
  else if (key == "xbar0") c.xbar0 = to_list(key, v);
  else if (key == "noise") c.noise = v;
  else if (key == "coordinate") c.coordinate = to_uint(key, v);
  else if (key == "design") c.design = v;
  else if (key == "n") c.n = to_uint(key, v);
  else if (key == "t") c.t = to_uint(key, v);
  else if (key == "noise-sd") c.noise_sd = to_double(key, v);
  else if (key == "common-g") c.common_g = to_bool(key, v);
  else if (key == "sqrt-innovation-scale") c.sqrt_innovation_scale = to_bool(key, v);
  else if (key == "model") c.model = v;
  else if (key == "center-mse") c.center_mse = to_bool(key, v);
  else if (key == "x-grid") c.x_grid = to_list(key, v);
  else if (key == "out-dir") c.out_dir = v;
  else throw SpecError("unknown option '" + key + "'");
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw SpecError(path + ":" + std::to_string(lineno) +
                      ": expected 'key = value'");
    }
    try {
      set_option(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Spec) {
        throw SpecError(path + ":" + std::to_string(lineno) + ": " + e.what());
      }
      throw InputError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["mode"] = pkrr::to_string(mode);
  j["data"] = data;
  j["kernel"] = kernel;
  if (eta) {
    j["eta"] = *eta;
  } else {
    j["eta"] = "gcv";
  }
  j["eta-lo"] = gcv.lo;
  j["eta-hi"] = gcv.hi;
  j["eta-points"] = gcv.points;
  j["refine"] = gcv.refine;
  j["level"] = level;
  j["eta-deflation"] = eta_deflation;
  j["seed"] = seed;
  j["reps"] = reps;
  j["nt-cap"] = nt_cap;
  j["grid-file"] = grid_file;
  j["grid-lo"] = grid_lo;
  j["grid-hi"] = grid_hi;
  j["grid-points"] = grid_points;
  j["interval"] = interval;
  j["unit"] = unit;
  j["x"] = x;
  j["f0"] = f0;
  j["xbar0"] = xbar0;
  j["noise"] = noise;
  j["coordinate"] = coordinate;
  j["design"] = design;
  j["n"] = n;
  j["t"] = t;
  j["noise-sd"] = noise_sd;
  j["common-g"] = common_g;
  j["sqrt-innovation-scale"] = sqrt_innovation_scale;
  j["model"] = model;
  j["center-mse"] = center_mse;
  j["x-grid"] = x_grid;
  return j;
}

void validate(const RunConfig& c) {
  const bool fit = c.mode == Mode::FitHetero || c.mode == Mode::FitHomo;
  if ((fit || c.mode == Mode::Interval) && c.data.empty()) {
    throw SpecError(std::string(to_string(c.mode)) + " needs --data");
  }
  if (c.eta && !(*c.eta > 0.0)) throw SpecError("eta must be positive");
  if (!c.eta && c.gcv.grid.empty() &&
      (!(c.gcv.lo > 0.0) || !(c.gcv.hi >= c.gcv.lo) || c.gcv.points < 1)) {
    throw SpecError("invalid eta grid (need 0 < eta-lo <= eta-hi, eta-points >= 1)");
  }
  if (!(c.level > 0.0 && c.level < 1.0)) {
    throw SpecError("level must be in (0, 1)");
  }
  if (!(c.eta_deflation > 0.0 && c.eta_deflation <= 1.0)) {
    throw SpecError("eta-deflation must be in (0, 1]");
  }
  if (fit && c.grid_file.empty() &&
      (c.grid_points < 1 || !(c.grid_hi >= c.grid_lo))) {
    throw SpecError("invalid prediction grid");
  }
  if (c.mode == Mode::Interval) {
    const auto& k = c.interval;
    if (k != "mean" && k != "prediction" && k != "g" && k != "beta") {
      throw SpecError("interval must be one of mean, prediction, g, beta");
    }
    if (c.x.empty()) throw SpecError("interval mode needs --x");
    if ((k == "mean" || k == "prediction") && c.unit.empty()) {
      throw SpecError("mean and prediction intervals need --unit");
    }
    if (c.noise != "gaussian" && c.noise != "empirical") {
      throw SpecError("noise must be gaussian or empirical");
    }
  }
  if (c.mode == Mode::Generate) {
    parse_design(c.design);
    if (c.n < 1 || c.t < 1) throw SpecError("n and t must be positive");
  }
  if (c.mode == Mode::SimulateMse || c.mode == Mode::SimulateCoverage) {
    parse_design(c.design);
    parse_model(c.model);
    if (c.reps < 2) throw SpecError("reps must be at least 2");
    if (c.n < 1 || c.t < 1) throw SpecError("n and t must be positive");
  }
}

std::vector<std::string> output_paths(const RunConfig& c) {
  const fs::path dir(c.out_dir);
  switch (c.mode) {
    case Mode::FitHetero:
    case Mode::FitHomo:
      return {(dir / "fit_report.json").string(),
              (dir / "predictions.csv").string()};
    case Mode::Interval:
      return {(dir / "interval.json").string()};
    case Mode::SimulateMse:
    case Mode::SimulateCoverage:
      return {(dir / "mc_report.json").string(),
              (dir / "mc_report.csv").string()};
    case Mode::Generate:
      return {(dir / "panel.csv").string()};
  }
  return {};
}

namespace {

std::string tmp_path(const std::string& p) { return p + ".partial"; }

void check_writable(const std::string& path) {
  const std::string tmp = tmp_path(path);
  {
    std::ofstream probe(tmp);
    if (!probe) {
      throw InputError("output '" + path + "' is not writable");
    }
  }
  std::error_code ec;
  fs::remove(tmp, ec);
}

struct Outputs {
  std::vector<std::string> final_paths;
  std::vector<std::string> staged;
  std::vector<std::string> committed;

  void stage(const std::string& path, const std::string& content) {
    const std::string tmp = tmp_path(path);
    std::ofstream out(tmp, std::ios::binary);
    out << content;
    out.close();
    if (!out) throw ResourceError("failed writing '" + tmp + "'");
    staged.push_back(path);
  }
  void commit() {
    for (const auto& p : staged) {
      fs::rename(tmp_path(p), p);
      committed.push_back(p);
    }
    staged.clear();
  }
  void discard() {
    std::error_code ec;
    for (const auto& p : staged) fs::remove(tmp_path(p), ec);
    for (const auto& p : committed) fs::remove(p, ec);
    staged.clear();
    committed.clear();
  }
};

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int resolve_threads(int threads) {
  return threads > 0 ? threads : std::max(1, omp_get_num_procs());
}

nlohmann::json meta(double wall, int threads, const RunConfig& c) {
  return {{"created_utc", utc_now()},
          {"out_dir", c.out_dir},
          {"wall_seconds", wall},
          {"threads", threads},
          {"eigen_backend", eigen_backend()}};
}

nlohmann::json artifact(const char* kind, const RunConfig& cfg,
                        nlohmann::json body) {
  body["kind"] = kind;
  body["version"] = kVersion;
  body["config"] = cfg.to_json();
  return body;
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

nlohmann::json gcv_json(const GcvResult& g) {
  return {{"eta", g.eta},
          {"score", g.score},
          {"trace", g.trace},
          {"skipped", g.skipped},
          {"eta_grid", g.eta_grid},
          {"eta_hat", g.eta_hat},
          {"score_hat", g.score_hat},
          {"refined", g.refined},
          {"warnings", g.warnings}};
}

nlohmann::json vec_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::string fmt(double v) { return format_number(v); }

PointMatrix prediction_grid(const RunConfig& c, const PanelData& p) {
  const auto d = static_cast<Eigen::Index>(p.dim());
  if (!c.grid_file.empty()) {
    std::ifstream in(c.grid_file);
    if (!in) throw InputError("cannot open grid file '" + c.grid_file + "'");
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      const auto row = to_list(c.grid_file + ":" + std::to_string(lineno), line);
      if (static_cast<Eigen::Index>(row.size()) != d) {
        throw InputError(c.grid_file + ":" + std::to_string(lineno) +
                         ": expected " + std::to_string(d) + " values");
      }
      rows.push_back(row);
    }
    if (rows.empty()) throw InputError("grid file '" + c.grid_file + "' has no points");
    PointMatrix g(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (Eigen::Index k = 0; k < d; ++k) {
        g(static_cast<Eigen::Index>(r), k) = rows[r][std::size_t(k)];
      }
    }
    return g;
  }
  // First coordinate on [grid-lo, grid-hi]; the others at their sample means.
  const auto xs = linspace(c.grid_lo, c.grid_hi, c.grid_points);
  PointMatrix g(static_cast<Eigen::Index>(xs.size()), d);
  const Eigen::RowVectorXd means = p.x.colwise().mean();
  for (std::size_t r = 0; r < xs.size(); ++r) {
    g.row(static_cast<Eigen::Index>(r)) = means;
    g(static_cast<Eigen::Index>(r), 0) = xs[r];
  }
  return g;
}

std::string grid_header(Eigen::Index d) {
  std::string h;
  for (Eigen::Index k = 0; k < d; ++k) h += "x" + std::to_string(k + 1) + ",";
  return h;
}

std::string grid_row(const PointMatrix& g, Eigen::Index r) {
  std::string s;
  for (Eigen::Index k = 0; k < g.cols(); ++k) s += fmt(g(r, k)) + ",";
  return s;
}

nlohmann::json panel_shape(const ParsedPanel& pp) {
  return {{"units", pp.panel.units()},
          {"periods", pp.panel.periods()},
          {"dim", pp.panel.dim()},
          {"factors", pp.panel.factors()},
          {"x_names", pp.x_names},
          {"f_names", pp.f_names},
          {"intercept_added", pp.intercept_added}};
}

std::vector<std::string> z_names(const ParsedPanel& pp) {
  std::vector<std::string> names = pp.f_names;
  for (const auto& x : pp.x_names) names.push_back("mean_" + x);
  return names;
}

EtaChoice eta_choice(const RunConfig& c) {
  if (c.eta) return *c.eta;
  return c.gcv;
}

void fit_homo_mode(const RunConfig& c, Outputs& out, int threads) {
  const auto start = std::chrono::steady_clock::now();
  const ParsedPanel pp = parse_panel_csv(c.data);
  const PanelData& p = pp.panel;
  const PointMatrix grid = prediction_grid(c, p);
  HomoModel model(p, parse_kernel_spec(c.kernel), {c.nt_cap, true});
  nlohmann::json body;
  double eta = 0.0;
  if (c.eta) {
    eta = *c.eta;
    body["eta_source"] = "fixed";
    body["gcv"] = nullptr;
  } else {
    const GcvResult g = model.gcv(c.gcv);
    eta = g.eta_hat;
    body["eta_source"] = "gcv";
    body["gcv"] = gcv_json(g);
  }
  const HomoFit fit = model.fit(eta);
  body["panel"] = panel_shape(pp);
  body["kernel"] = to_string(fit.spec);
  body["eta"] = eta;
  body["h_hat"] = effective_dim(*fit.gram_eigen, eta);
  body["sigma_eps_sq"] = fit.sigma_eps_sq;
  body["beta_names"] = z_names(pp);
  nlohmann::json betas = nlohmann::json::array();
  for (std::size_t i = 0; i < p.units(); ++i) {
    betas.push_back({{"unit", p.unit_labels[i]},
                     {"beta", vec_json(fit.betas.row(Eigen::Index(i)).transpose())}});
  }
  body["betas"] = betas;
  body["warnings"] = fit.warnings;

  std::string csv = grid_header(grid.cols()) + "g_hat\n";
  for (Eigen::Index r = 0; r < grid.rows(); ++r) {
    const Eigen::RowVectorXd row = grid.row(r);
    csv += grid_row(grid, r) +
           fmt(predict_homo(fit, std::span<const double>(row.data(), row.size()))) +
           "\n";
  }
  const double wall = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start).count();
  const nlohmann::json doc = {{"payload", artifact("fit-homo", c, body)},
                              {"meta", meta(wall, threads, c)}};
  out.stage(out.final_paths[0], dump(doc));
  out.stage(out.final_paths[1], csv);
}

void fit_hetero_mode(const RunConfig& c, Outputs& out, int threads) {
  const auto start = std::chrono::steady_clock::now();
  const ParsedPanel pp = parse_panel_csv(c.data);
  const PanelData& p = pp.panel;
  const PointMatrix grid = prediction_grid(c, p);
  const HeteroPanelFit fit =
      fit_hetero_panel(p, parse_kernel_spec(c.kernel), eta_choice(c), threads);
  nlohmann::json body;
  body["panel"] = panel_shape(pp);
  body["kernel"] = to_string(fit.units.front().spec);
  body["eta_source"] = c.eta ? "fixed" : "gcv";
  body["beta_names"] = z_names(pp);
  nlohmann::json units = nlohmann::json::array();
  std::string csv = "unit," + grid_header(grid.cols()) + "g_hat\n";
  for (std::size_t i = 0; i < fit.units.size(); ++i) {
    const HeteroUnitFit& u = fit.units[i];
    nlohmann::json ju = {{"unit", p.unit_labels[i]},
                         {"eta", u.eta},
                         {"h_hat", u.h_hat},
                         {"sigma_eps_sq", u.sigma_eps_sq},
                         {"beta", vec_json(u.beta)},
                         {"warnings", u.warnings}};
    ju["gcv"] = fit.gcv.empty() ? nlohmann::json(nullptr) : gcv_json(fit.gcv[i]);
    ju["flags"] = nlohmann::json::array();
    if (u.h_hat < kLowEffectiveDim) ju["flags"].push_back("low effective dimension");
    units.push_back(ju);
    for (Eigen::Index r = 0; r < grid.rows(); ++r) {
      const Eigen::RowVectorXd row = grid.row(r);
      csv += p.unit_labels[i] + "," + grid_row(grid, r) +
             fmt(predict_hetero(u, std::span<const double>(row.data(), row.size()))) +
             "\n";
    }
  }
  body["units"] = units;
  const double wall = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start).count();
  const nlohmann::json doc = {{"payload", artifact("fit-hetero", c, body)},
                              {"meta", meta(wall, threads, c)}};
  out.stage(out.final_paths[0], dump(doc));
  out.stage(out.final_paths[1], csv);
}

nlohmann::json interval_json(const IntervalEstimate& e) {
  return {{"point", e.point},     {"std_error", e.std_error},
          {"lower", e.lower},     {"upper", e.upper},
          {"level", e.level},     {"interval_kind", to_string(e.kind)},
          {"flags", e.flags}};
}

void interval_mode(const RunConfig& c, Outputs& out, int threads) {
  const auto start = std::chrono::steady_clock::now();
  const ParsedPanel pp = parse_panel_csv(c.data);
  const PanelData& p = pp.panel;
  const KernelSpec spec = parse_kernel_spec(c.kernel);
  if (c.x.size() != p.dim()) {
    throw InputError("--x has " + std::to_string(c.x.size()) +
                     " values, the panel has d = " + std::to_string(p.dim()));
  }
  nlohmann::json body;
  IntervalEstimate est;
  double eta = 0.0;
  if (c.interval == "g" || c.interval == "beta") {
    HomoModel model(p, spec, {c.nt_cap, true});
    eta = (c.eta ? *c.eta : model.gcv(c.gcv).eta_hat) * c.eta_deflation;
    const HomoFit fit = model.fit(eta);
    est = c.interval == "g"
              ? ci_g_homo(fit, *fit.gram_eigen, c.x, c.level)
              : ci_beta_partial_linear(fit, c.x, c.coordinate, c.level);
    body["model"] = "homo";
  } else {
    const auto it = std::find(p.unit_labels.begin(), p.unit_labels.end(), c.unit);
    if (it == p.unit_labels.end()) {
      throw InputError("unit '" + c.unit + "' is not in the panel");
    }
    const auto unit = static_cast<std::size_t>(it - p.unit_labels.begin());
    HeteroUnitModel model(p, unit, spec);
    eta = (c.eta ? *c.eta : model.gcv(c.gcv).eta_hat) * c.eta_deflation;
    const HeteroUnitFit fit = model.fit(eta);
    const auto last = static_cast<Eigen::Index>(p.periods() - 1);
    std::vector<double> f0 = c.f0;
    if (f0.empty()) {
      for (Eigen::Index k = 0; k < p.f1.cols(); ++k) f0.push_back(p.f1(last, k));
    }
    PointMatrix xbar(1, static_cast<Eigen::Index>(p.dim()));
    if (!c.xbar0.empty()) {
      if (c.xbar0.size() != p.dim()) {
        throw InputError("--xbar0 needs " + std::to_string(p.dim()) + " values");
      }
      for (std::size_t k = 0; k < p.dim(); ++k) xbar(0, Eigen::Index(k)) = c.xbar0[k];
    } else {
      for (std::size_t k = 0; k < p.dim(); ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < p.units(); ++i) {
          s += p.x(Eigen::Index(i * p.periods()) + last, Eigen::Index(k));
        }
        xbar(0, Eigen::Index(k)) = s / double(p.units());
      }
    }
    if (c.interval == "mean") {
      est = ci_mean_hetero(fit, c.x, f0, xbar, c.level);
    } else {
      PredictionOptions opt;
      opt.noise = c.noise == "empirical" ? NoiseModel::Empirical : NoiseModel::Gaussian;
      est = prediction_interval(fit, c.x, f0, xbar, c.level, opt);
    }
    body["model"] = "hetero";
    body["unit"] = c.unit;
    body["h_hat"] = fit.h_hat;
  }
  body["eta"] = eta;
  body["interval"] = interval_json(est);
  const double wall = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start).count();
  const nlohmann::json doc = {{"payload", artifact("interval", c, body)},
                              {"meta", meta(wall, threads, c)}};
  out.stage(out.final_paths[0], dump(doc));
}

DgpSpec dgp_of(const RunConfig& c) {
  DgpSpec d;
  d.design = parse_design(c.design);
  d.n = c.n;
  d.t = c.t;
  d.seed = c.seed;
  d.noise_sd = c.noise_sd;
  d.common_g = c.common_g;
  d.sqrt_innovation_scale = c.sqrt_innovation_scale;
  return d;
}

EstimatorConfig estimator_of(const RunConfig& c) {
  EstimatorConfig e;
  e.model = parse_model(c.model);
  e.kernel = parse_kernel_spec(c.kernel);
  e.eta = eta_choice(c);
  e.nt_cap = c.nt_cap;
  e.center_mse = c.center_mse;
  e.eta_deflation = c.eta_deflation;
  return e;
}

void simulate_mode(const RunConfig& c, Outputs& out, int threads) {
  const DgpSpec dgp = dgp_of(c);
  const EstimatorConfig est = estimator_of(c);
  McReport report;
  if (c.mode == Mode::SimulateMse) {
    report = mc_mse(dgp, est, c.reps, threads);
  } else {
    const auto grid = c.x_grid.empty() ? linspace(0.0, 1.0, 100) : c.x_grid;
    report = mc_coverage(dgp, est, grid, c.level, c.reps, threads);
  }
  nlohmann::json payload = report.payload();
  payload["version"] = kVersion;
  payload["run_config"] = c.to_json();
  nlohmann::json doc = {{"payload", payload},
                        {"meta", meta(report.wall_seconds, threads, c)}};
  out.stage(out.final_paths[0], dump(doc));
  out.stage(out.final_paths[1], report.to_csv());
}

void generate_mode(const RunConfig& c, Outputs& out) {
  const GeneratedPanel gp = generate(dgp_of(c));
  std::ostringstream os;
  write_panel_csv(gp.panel, os);
  out.stage(out.final_paths[0], os.str());
}

}  // namespace

RunResult run(const RunConfig& cfg) {
  RunResult result;
  Outputs out;
  try {
    validate(cfg);
    out.final_paths = output_paths(cfg);
    for (const auto& p : out.final_paths) check_writable(p);
    const int threads = resolve_threads(cfg.threads);
    switch (cfg.mode) {
      case Mode::FitHomo: fit_homo_mode(cfg, out, threads); break;
      case Mode::FitHetero: fit_hetero_mode(cfg, out, threads); break;
      case Mode::Interval: interval_mode(cfg, out, threads); break;
      case Mode::SimulateMse:
      case Mode::SimulateCoverage: simulate_mode(cfg, out, threads); break;
      case Mode::Generate: generate_mode(cfg, out); break;
    }
    out.commit();
    result.written = out.committed;
    return result;
  } catch (const Error& e) {
    out.discard();
    result.exit_code = exit_code(e.kind());
    result.error = {{"error",
                     {{"kind", to_string(e.kind())},
                      {"message", e.what()},
                      {"exit_code", result.exit_code},
                      {"mode", to_string(cfg.mode)},
                      {"version", kVersion}}}};
  } catch (const std::bad_alloc&) {
    out.discard();
    result.exit_code = exit_code(ErrorKind::Resource);
    result.error = {{"error",
                     {{"kind", to_string(ErrorKind::Resource)},
                      {"message", "out of memory"},
                      {"exit_code", result.exit_code},
                      {"mode", to_string(cfg.mode)},
                      {"version", kVersion}}}};
  } catch (const std::exception& e) {
    out.discard();
    result.exit_code = exit_code(ErrorKind::Numeric);
    result.error = {{"error",
                     {{"kind", to_string(ErrorKind::Numeric)},
                      {"message", e.what()},
                      {"exit_code", result.exit_code},
                      {"mode", to_string(cfg.mode)},
                      {"version", kVersion}}}};
  }
  return result;
}

}  // namespace pkrr
