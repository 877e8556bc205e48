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

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pkrr/panel.hpp"
#include "pkrr/rng.hpp"

namespace pkrr {

enum class Design {
  HeteroSj,    // additive logistic + quadratic g_i, two latent AR factors
  HomoBeta,    // beta-density mixture g, observed and latent AR factors
  FirmAnalog,  // partially linear production function with export term
};

const char* to_string(Design d);
Design parse_design(const std::string& s);

struct DgpSpec {
  Design design = Design::HomoBeta;
  std::size_t n = 50;
  std::size_t t = 25;
  std::uint64_t seed = 1;
  /// HeteroSj: scale the AR innovations by sqrt(1 - rho^2) instead of the
  /// default (1 - rho^2).
  bool sqrt_innovation_scale = false;
  /// HeteroSj: draw a single delta for all units so g_i = g.
  bool common_g = false;
  /// Noise standard deviation for HomoBeta and FirmAnalog.
  double noise_sd = 1.0;
  /// FirmAnalog coefficients on the three linear inputs.
  std::array<double, 3> firm_beta{0.10, 0.10, 0.73};
};

/// True regression function: g(unit, x).
using TrueFunction = std::function<double(std::size_t, std::span<const double>)>;

struct GeneratedPanel {
  PanelData panel;
  TrueFunction g;
  /// hetero_sj only: N x 4, row i is Gamma_2i in row-major order. Empty for
  /// the other designs.
  Eigen::MatrixXd covariate_loadings;
};

/// AR(1) path e_t = rho e_{t-1} + innovation_sd xi_t of the given length,
/// started from the stationary law N(0, innovation_sd^2 / (1 - rho^2)).
/// Throws InputError when |rho| >= 1.
std::vector<double> gen_ar1(std::size_t length, double rho,
                            double innovation_sd, Rng& rng);

/// logistic(x1) + delta (0.5 x2 - 0.25 x2^2).
double sj_regression(double delta, double x1, double x2);

/// 0.6 Beta(30, 17) density + 0.4 Beta(3, 11) density; zero outside [0, 1].
double beta_mixture(double x);

/// Export premium of the firm analog; increasing on [0, 1], zero at 0.
double export_premium(double u);

GeneratedPanel gen_hetero_sj(const DgpSpec& spec, Rng& rng);
GeneratedPanel gen_homo_beta(const DgpSpec& spec, Rng& rng);
GeneratedPanel gen_firm_analog(const DgpSpec& spec, Rng& rng);

/// Dispatches on spec.design.
GeneratedPanel generate(const DgpSpec& spec, Rng& rng);

/// Uses the stream seeded by spec.seed.
GeneratedPanel generate(const DgpSpec& spec);

}  // namespace pkrr
