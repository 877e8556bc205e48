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

#include "pkrr/montecarlo.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <sstream>

#include "pkrr/error.hpp"
#include "pkrr/homo.hpp"
#include "pkrr/inference.hpp"
#include "pkrr/panel_io.hpp"
#include "pkrr/version.hpp"

extern "C" void openblas_set_num_threads(int);

namespace pkrr {

const char* to_string(Model m) {
  return m == Model::Hetero ? "hetero" : "homo";
}

Model parse_model(const std::string& s) {
  if (s == "hetero") return Model::Hetero;
  if (s == "homo") return Model::Homo;
  throw InputError("unknown model '" + s + "' (expected hetero or homo)");
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = n == 1 ? lo : lo + (hi - lo) * double(k) / double(n - 1);
  }
  return out;
}

McStat summarize(const std::string& name, const std::vector<double>& values) {
  McStat s;
  s.name = name;
  s.reps = values.size();
  if (values.empty()) {
    s.mean = s.mc_se = std::nan("");
    return s;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / double(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.mc_se = std::sqrt(ss / double(values.size() - 1)) /
              std::sqrt(double(values.size()));
  }
  return s;
}

nlohmann::json to_json(const GcvOptions& gcv) {
  nlohmann::json j;
  if (!gcv.grid.empty()) {
    j["grid"] = gcv.grid;
  } else {
    j["lo"] = gcv.lo;
    j["hi"] = gcv.hi;
    j["points"] = gcv.points;
  }
  j["refine"] = gcv.refine;
  return j;
}

nlohmann::json to_json(const DgpSpec& dgp) {
  nlohmann::json j;
  j["design"] = to_string(dgp.design);
  j["n"] = dgp.n;
  j["t"] = dgp.t;
  j["seed"] = dgp.seed;
  j["noise_sd"] = dgp.noise_sd;
  j["sqrt_innovation_scale"] = dgp.sqrt_innovation_scale;
  j["common_g"] = dgp.common_g;
  j["firm_beta"] = dgp.firm_beta;
  return j;
}

nlohmann::json to_json(const EstimatorConfig& est) {
  nlohmann::json j;
  j["model"] = to_string(est.model);
  j["kernel"] = to_string(est.kernel);
  if (const auto* e = std::get_if<double>(&est.eta)) {
    j["eta"] = *e;
  } else {
    j["eta"] = {{"gcv", to_json(std::get<GcvOptions>(est.eta))}};
  }
  j["nt_cap"] = est.nt_cap;
  j["center_mse"] = est.center_mse;
  j["eta_deflation"] = est.eta_deflation;
  return j;
}

nlohmann::json McReport::payload() const {
  nlohmann::json j;
  j["kind"] = kind;
  j["config"] = config;
  j["reps_requested"] = reps_requested;
  j["reps_ok"] = reps_ok;
  nlohmann::json fails = nlohmann::json::array();
  for (const auto& f : failures) {
    fails.push_back({{"rep", f.rep}, {"message", f.message}});
  }
  j["failures"] = fails;
  nlohmann::json cells_j = nlohmann::json::array();
  for (const auto& c : cells) {
    cells_j.push_back(
        {{"name", c.name}, {"mean", c.mean}, {"mc_se", c.mc_se}, {"reps", c.reps}});
  }
  j["cells"] = cells_j;
  if (kind == "coverage") {
    nlohmann::json cov = nlohmann::json::array();
    for (const auto& p : coverage) {
      cov.push_back({{"x", p.x},
                     {"true_g", p.true_g},
                     {"coverage", p.coverage},
                     {"binomial_se", p.binomial_se},
                     {"mean_width", p.mean_width},
                     {"reps", p.reps}});
    }
    j["coverage"] = cov;
  }
  return j;
}

nlohmann::json McReport::to_json() const {
  return {{"payload", payload()},
          {"meta",
           {{"wall_seconds", wall_seconds},
            {"threads", threads},
            {"version", kVersion}}}};
}

std::string McReport::to_csv() const {
  std::ostringstream os;
  const auto num = [](double v) { return format_number(v); };
  if (kind == "coverage") {
    os << "x,true_g,coverage,binomial_se,mean_width,reps\n";
    for (const auto& p : coverage) {
      os << num(p.x) << ',' << num(p.true_g) << ',' << num(p.coverage) << ','
         << num(p.binomial_se) << ',' << num(p.mean_width) << ',' << p.reps
         << '\n';
    }
  } else {
    os << "cell,mean,mc_se,reps\n";
    for (const auto& c : cells) {
      os << c.name << ',' << num(c.mean) << ',' << num(c.mc_se) << ','
         << c.reps << '\n';
    }
  }
  return os.str();
}

const McStat& McReport::cell(const std::string& name) const {
  for (const auto& c : cells) {
    if (c.name == name) return c;
  }
  throw InputError("report has no cell '" + name + "'");
}

double McReport::mean_coverage() const {
  if (coverage.empty()) return std::nan("");
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& p : coverage) {
    if (p.reps == 0) continue;
    s += p.coverage;
    ++n;
  }
  return n ? s / double(n) : std::nan("");
}

namespace {

struct RepResult {
  bool ok = false;
  std::string error;
  double mse = 0.0;
  double mse_centered = 0.0;
  double sigma_sq = 0.0;
  double eta = 0.0;
  std::vector<char> covered;
  std::vector<char> inside;
  std::vector<double> width;
};

double mean_sq_error(const Eigen::VectorXd& est, const Eigen::VectorXd& truth,
                     bool center) {
  Eigen::VectorXd diff = est - truth;
  if (center) diff.array() -= diff.mean();
  return diff.squaredNorm() / double(diff.size());
}

Eigen::VectorXd truth_at_points(const GeneratedPanel& gp) {
  const PanelData& p = gp.panel;
  Eigen::VectorXd out(p.x.rows());
  for (std::size_t i = 0; i < p.units(); ++i) {
    for (std::size_t s = 0; s < p.periods(); ++s) {
      out(static_cast<Eigen::Index>(i * p.periods() + s)) =
          gp.g(i, p.covariate(i, s));
    }
  }
  return out;
}

double select_or_fixed(const EtaChoice& choice,
                       const std::function<GcvResult(const GcvOptions&)>& gcv) {
  if (const auto* e = std::get_if<double>(&choice)) return *e;
  return gcv(std::get<GcvOptions>(choice)).eta_hat;
}

RepResult run_mse_rep(const DgpSpec& dgp, const EstimatorConfig& est,
                      std::size_t r) {
  RepResult out;
  Rng rng = make_stream(dgp.seed, r);
  const GeneratedPanel gp = generate(dgp, rng);
  const Eigen::VectorXd truth = truth_at_points(gp);
  if (est.model == Model::Homo) {
    HomoModel model(gp.panel, est.kernel, {est.nt_cap, false});
    out.eta = select_or_fixed(
        est.eta, [&](const GcvOptions& o) { return model.gcv(o); });
    const HomoFit fit = model.fit(out.eta);
    out.mse = mean_sq_error(fit.g_at_points, truth, est.center_mse);
    out.mse_centered = mean_sq_error(fit.g_at_points, truth, true);
    out.sigma_sq = fit.sigma_eps_sq;
  } else {
    const HeteroPanelFit fit = fit_hetero_panel(gp.panel, est.kernel, est.eta, 1);
    const auto t = static_cast<Eigen::Index>(gp.panel.periods());
    double mse = 0.0;
    double mse_c = 0.0;
    double sig = 0.0;
    double eta = 0.0;
    for (const auto& u : fit.units) {
      const Eigen::VectorXd g_hat = u.gram_eigen->gram * u.a;
      const auto g = truth.segment(static_cast<Eigen::Index>(u.unit) * t, t);
      mse += mean_sq_error(g_hat, g, est.center_mse);
      mse_c += mean_sq_error(g_hat, g, true);
      sig += u.sigma_eps_sq;
      eta += std::log(u.eta);
    }
    const double n = double(fit.units.size());
    out.mse = mse / n;
    out.mse_centered = mse_c / n;
    out.sigma_sq = sig / n;
    out.eta = std::exp(eta / n);
  }
  out.ok = true;
  return out;
}

RepResult run_coverage_rep(const DgpSpec& dgp, const EstimatorConfig& est,
                           const std::vector<double>& grid, double level,
                           std::size_t r) {
  RepResult out;
  Rng rng = make_stream(dgp.seed, r);
  const GeneratedPanel gp = generate(dgp, rng);
  if (gp.panel.dim() != 1) {
    throw InputError("coverage study needs a one-dimensional covariate");
  }
  HomoModel model(gp.panel, est.kernel, {est.nt_cap, true});
  out.eta = select_or_fixed(est.eta,
                            [&](const GcvOptions& o) { return model.gcv(o); }) *
            est.eta_deflation;
  const HomoFit fit = model.fit(out.eta);
  out.sigma_sq = fit.sigma_eps_sq;
  const double lo = gp.panel.x.col(0).minCoeff();
  const double hi = gp.panel.x.col(0).maxCoeff();
  out.covered.resize(grid.size());
  out.inside.resize(grid.size());
  out.width.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out.inside[k] = lo <= grid[k] && grid[k] <= hi;
    if (!out.inside[k]) continue;
    const double x[1] = {grid[k]};
    const IntervalEstimate ci = ci_g_homo(fit, *fit.gram_eigen, x, level);
    const double g = gp.g(0, x);
    out.covered[k] = ci.lower <= g && g <= ci.upper;
    out.width[k] = ci.upper - ci.lower;
  }
  out.ok = true;
  return out;
}

template <typename Fn>
std::vector<RepResult> run_reps(std::size_t reps, int threads, Fn&& fn) {
  openblas_set_num_threads(1);
  std::vector<RepResult> results(reps);
  const auto n = static_cast<std::ptrdiff_t>(reps);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads > 0 ? threads : 1)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    const auto k = static_cast<std::size_t>(r);
    try {
      results[k] = fn(k);
    } catch (const std::exception& e) {
      results[k].ok = false;
      results[k].error = e.what();
    }
  }
  return results;
}

McReport base_report(const char* kind, const DgpSpec& dgp,
                     const EstimatorConfig& est, std::size_t reps,
                     int threads) {
  if (reps < 2) throw InputError("Monte Carlo needs at least 2 replications");
  McReport rep;
  rep.kind = kind;
  rep.config = {{"dgp", to_json(dgp)}, {"estimator", to_json(est)},
                {"reps", reps}};
  rep.reps_requested = reps;
  rep.threads = threads;
  return rep;
}

}  // namespace

McReport mc_mse(const DgpSpec& dgp, const EstimatorConfig& est,
                std::size_t reps, int threads) {
  const auto start = std::chrono::steady_clock::now();
  McReport report = base_report("mse", dgp, est, reps, threads);
  const auto results = run_reps(
      reps, threads, [&](std::size_t r) { return run_mse_rep(dgp, est, r); });
  std::vector<double> mse, mse_c, sig, log_eta;
  for (std::size_t r = 0; r < reps; ++r) {
    if (!results[r].ok) {
      report.failures.push_back({r, results[r].error});
      continue;
    }
    mse.push_back(results[r].mse);
    mse_c.push_back(results[r].mse_centered);
    sig.push_back(results[r].sigma_sq);
    log_eta.push_back(std::log(results[r].eta));
  }
  report.reps_ok = mse.size();
  report.cells = {summarize("mse", mse), summarize("mse_centered", mse_c),
                  summarize("sigma_eps_sq", sig),
                  summarize("log_eta", log_eta)};
  report.wall_seconds = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
  return report;
}

McReport mc_coverage(const DgpSpec& dgp, const EstimatorConfig& est,
                     const std::vector<double>& x_grid, double level,
                     std::size_t reps, int threads) {
  const auto start = std::chrono::steady_clock::now();
  if (x_grid.empty()) throw InputError("coverage grid is empty");
  two_sided_z(level);
  McReport report = base_report("coverage", dgp, est, reps, threads);
  report.config["level"] = level;
  report.config["x_grid"] = x_grid;
  const auto results = run_reps(reps, threads, [&](std::size_t r) {
    return run_coverage_rep(dgp, est, x_grid, level, r);
  });
  std::vector<double> sig, log_eta;
  std::vector<std::size_t> hits(x_grid.size(), 0);
  std::vector<std::size_t> seen(x_grid.size(), 0);
  std::vector<double> width(x_grid.size(), 0.0);
  for (std::size_t r = 0; r < reps; ++r) {
    if (!results[r].ok) {
      report.failures.push_back({r, results[r].error});
      continue;
    }
    sig.push_back(results[r].sigma_sq);
    log_eta.push_back(std::log(results[r].eta));
    for (std::size_t k = 0; k < x_grid.size(); ++k) {
      seen[k] += results[r].inside[k] ? 1 : 0;
      hits[k] += results[r].covered[k] ? 1 : 0;
      width[k] += results[r].width[k];
    }
  }
  const std::size_t ok = sig.size();
  report.reps_ok = ok;
  for (std::size_t k = 0; k < x_grid.size(); ++k) {
    CoveragePoint p;
    p.x = x_grid[k];
    const double x[1] = {x_grid[k]};
    p.true_g = dgp.design == Design::HomoBeta ? beta_mixture(x[0]) : std::nan("");
    p.reps = seen[k];
    if (seen[k] > 0) {
      const double m = double(seen[k]);
      p.coverage = double(hits[k]) / m;
      p.binomial_se = std::sqrt(p.coverage * (1.0 - p.coverage) / m);
      p.mean_width = width[k] / m;
    } else {
      p.coverage = p.binomial_se = p.mean_width = std::nan("");
    }
    report.coverage.push_back(p);
  }
  report.cells = {summarize("sigma_eps_sq", sig),
                  summarize("log_eta", log_eta)};
  report.cells.push_back({"mean_coverage", report.mean_coverage(),
                          std::nan(""), ok});
  report.wall_seconds = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
  return report;
}

}  // namespace pkrr
