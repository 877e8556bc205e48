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

#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pkrr/dgp.hpp"
#include "pkrr/hetero.hpp"
#include "pkrr/kernel.hpp"

namespace pkrr {

enum class Model { Hetero, Homo };

const char* to_string(Model m);
Model parse_model(const std::string& s);

struct EstimatorConfig {
  Model model = Model::Homo;
  KernelSpec kernel = KernelSpec::gaussian();
  EtaChoice eta = GcvOptions{};
  std::size_t nt_cap = 6000;
  /// Compare g_hat and g after removing their mean difference over the
  /// evaluation points (g is identified only up to a constant when the
  /// observed factors include an intercept).
  bool center_mse = false;
  /// Coverage studies build intervals at eta * eta_deflation.
  double eta_deflation = 1.0;
};

/// Mean and Monte Carlo standard error (sample sd / sqrt(reps)).
struct McStat {
  std::string name;
  double mean = 0.0;
  double mc_se = 0.0;
  std::size_t reps = 0;
};

struct CoveragePoint {
  double x = 0.0;
  double true_g = 0.0;
  double coverage = 0.0;
  double binomial_se = 0.0;  // sqrt(p (1 - p) / reps)
  double mean_width = 0.0;
  std::size_t reps = 0;  // replications whose sample range of x contains x
};

struct McFailure {
  std::size_t rep = 0;
  std::string message;
};

struct McReport {
  std::string kind;  // "mse" or "coverage"
  nlohmann::json config;
  std::vector<McStat> cells;
  std::vector<CoveragePoint> coverage;
  std::size_t reps_requested = 0;
  std::size_t reps_ok = 0;
  std::vector<McFailure> failures;
  double wall_seconds = 0.0;
  int threads = 1;

  /// Everything except wall-clock and thread metadata. Identical for
  /// identical (seed, spec, config, reps) regardless of scheduling.
  nlohmann::json payload() const;
  /// {"payload": ..., "meta": {...}}.
  nlohmann::json to_json() const;
  /// One row per cell (mse) or per grid point (coverage).
  std::string to_csv() const;

  const McStat& cell(const std::string& name) const;
  /// Mean coverage over grid points seen in at least one replication.
  double mean_coverage() const;
};

McStat summarize(const std::string& name, const std::vector<double>& values);

/// Per replication r (stream stream_seed(dgp.seed, r)): generate a panel,
/// fit (per-unit GCV for Hetero, pooled GCV for Homo), and record the MSE of
/// g_hat against g at the design points, sigma_eps^2 and the selected eta.
/// Failed replications are excluded and listed.
McReport mc_mse(const DgpSpec& dgp, const EstimatorConfig& est,
                std::size_t reps, int threads = 1);

/// Per replication: pooled fit, then the interval for g(x) at each grid
/// point; records whether it covers the true g.
McReport mc_coverage(const DgpSpec& dgp, const EstimatorConfig& est,
                     const std::vector<double>& x_grid, double level,
                     std::size_t reps, int threads = 1);

/// n evenly spaced points in [lo, hi].
std::vector<double> linspace(double lo, double hi, std::size_t n);

nlohmann::json to_json(const DgpSpec& dgp);
nlohmann::json to_json(const EstimatorConfig& est);
nlohmann::json to_json(const GcvOptions& gcv);

}  // namespace pkrr
