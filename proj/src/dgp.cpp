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

#include "pkrr/dgp.hpp"

#include <cmath>
#include <memory>

#include "pkrr/error.hpp"

namespace pkrr {

const char* to_string(Design d) {
  switch (d) {
    case Design::HeteroSj: return "hetero_sj";
    case Design::HomoBeta: return "homo_beta";
    case Design::FirmAnalog: return "firm_analog";
  }
  return "unknown";
}

Design parse_design(const std::string& s) {
  if (s == "hetero_sj") return Design::HeteroSj;
  if (s == "homo_beta") return Design::HomoBeta;
  if (s == "firm_analog") return Design::FirmAnalog;
  throw InputError("unknown design '" + s +
                   "' (expected hetero_sj, homo_beta or firm_analog)");
}

std::vector<double> gen_ar1(std::size_t length, double rho,
                            double innovation_sd, Rng& rng) {
  if (!(std::abs(rho) < 1.0)) {
    throw InputError("AR(1) coefficient must satisfy |rho| < 1");
  }
  if (!(innovation_sd >= 0.0)) {
    throw InputError("AR(1) innovation sd must be nonnegative");
  }
  std::normal_distribution<double> xi(0.0, 1.0);
  double e = innovation_sd / std::sqrt(1.0 - rho * rho) * xi(rng);
  std::vector<double> out(length);
  for (auto& v : out) {
    e = rho * e + innovation_sd * xi(rng);
    v = e;
  }
  return out;
}

double sj_regression(double delta, double x1, double x2) {
  return std::exp(x1) / (1.0 + std::exp(x1)) +
         delta * (0.5 * x2 - 0.25 * x2 * x2);
}

namespace {

double beta_density(double x, double a, double b) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  const double log_norm =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  return std::exp(log_norm + (a - 1.0) * std::log(x) +
                  (b - 1.0) * std::log1p(-x));
}

// Two-dimensional N(0, [[1, 0.5], [0.5, 1]]).
std::array<double, 2> correlated_pair(Rng& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  const double a = z(rng);
  const double b = z(rng);
  return {a, 0.5 * a + std::sqrt(0.75) * b};
}

std::vector<double> factor_series(std::size_t t, Rng& rng) {
  return gen_ar1(t, 0.5, std::sqrt(1.0 - 0.25), rng);
}

void check_size(const DgpSpec& spec, std::size_t min_t) {
  if (spec.n < 1) throw InputError("DGP needs N >= 1");
  if (spec.t < min_t) {
    throw InputError("design " + std::string(to_string(spec.design)) +
                     " needs T >= " + std::to_string(min_t));
  }
}

}  // namespace

double beta_mixture(double x) {
  return 0.6 * beta_density(x, 30.0, 17.0) + 0.4 * beta_density(x, 3.0, 11.0);
}

double export_premium(double u) { return 0.4 * std::log1p(2.0 * u); }

GeneratedPanel gen_hetero_sj(const DgpSpec& spec, Rng& rng) {
  check_size(spec, 4);
  const std::size_t n = spec.n;
  const std::size_t t = spec.t;
  std::uniform_real_distribution<double> unif95(0.0, 0.95);
  std::uniform_real_distribution<double> unif01(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  auto ar_noise = [&](std::size_t len) {
    const double rho = unif95(rng);
    const double sigma = std::sqrt(unif95(rng));
    const double scale = spec.sqrt_innovation_scale
                             ? std::sqrt(1.0 - rho * rho)
                             : (1.0 - rho * rho);
    return gen_ar1(len, rho, sigma * scale, rng);
  };

  const auto f21 = factor_series(t, rng);
  const auto f22 = factor_series(t, rng);
  const double shared_delta = unif01(rng);

  GeneratedPanel out;
  PanelData& p = out.panel;
  p.y.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t));
  p.x.resize(static_cast<Eigen::Index>(n * t), 2);
  p.f1 = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(t), 1);
  auto deltas = std::make_shared<std::vector<double>>(n);
  out.covariate_loadings.resize(static_cast<Eigen::Index>(n), 4);

  for (std::size_t i = 0; i < n; ++i) {
    const auto gamma2 = correlated_pair(rng);
    const auto gamma1_x = correlated_pair(rng);  // Gamma_1i
    double big_gamma2[2][2] = {{1.0 + z(rng), z(rng)}, {z(rng), 1.0 + z(rng)}};
    for (int k = 0; k < 4; ++k) {
      out.covariate_loadings(static_cast<Eigen::Index>(i), k) =
          big_gamma2[k / 2][k % 2];
    }
    const double delta = spec.common_g ? shared_delta : unif01(rng);
    (*deltas)[i] = delta;
    const auto eps = ar_noise(t);
    const auto v1 = ar_noise(t);
    const auto v2 = ar_noise(t);
    double mean1 = 0.0;
    double mean2 = 0.0;
    for (std::size_t s = 0; s < t; ++s) {
      const auto r = static_cast<Eigen::Index>(i * t + s);
      p.x(r, 0) = gamma1_x[0] + big_gamma2[0][0] * f21[s] +
                  big_gamma2[0][1] * f22[s] + v1[s];
      p.x(r, 1) = gamma1_x[1] + big_gamma2[1][0] * f21[s] +
                  big_gamma2[1][1] * f22[s] + v2[s];
      mean1 += p.x(r, 0);
      mean2 += p.x(r, 1);
    }
    const double gamma1 = 0.5 * mean1 / double(t) + 0.5 * mean2 / double(t);
    for (std::size_t s = 0; s < t; ++s) {
      const auto r = static_cast<Eigen::Index>(i * t + s);
      p.y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s)) =
          sj_regression(delta, p.x(r, 0), p.x(r, 1)) + gamma1 +
          gamma2[0] * f21[s] + gamma2[1] * f22[s] + eps[s];
    }
  }
  p.validate();
  out.g = [deltas](std::size_t unit, std::span<const double> x) {
    return sj_regression((*deltas)[unit], x[0], x[1]);
  };
  return out;
}

GeneratedPanel gen_homo_beta(const DgpSpec& spec, Rng& rng) {
  check_size(spec, 5);
  const std::size_t n = spec.n;
  const std::size_t t = spec.t;
  std::normal_distribution<double> z(0.0, 1.0);

  const auto f11 = factor_series(t, rng);
  const auto f12 = factor_series(t, rng);
  const auto f21 = factor_series(t, rng);
  const auto f22 = factor_series(t, rng);

  GeneratedPanel out;
  PanelData& p = out.panel;
  p.y.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t));
  p.x.resize(static_cast<Eigen::Index>(n * t), 1);
  p.f1.resize(static_cast<Eigen::Index>(t), 3);
  for (std::size_t s = 0; s < t; ++s) {
    const auto r = static_cast<Eigen::Index>(s);
    p.f1(r, 0) = 1.0;
    p.f1(r, 1) = f11[s];
    p.f1(r, 2) = f12[s];
  }

  for (std::size_t i = 0; i < n; ++i) {
    const double g1[3] = {z(rng), z(rng), z(rng)};                // Gamma_1i
    const double g2[2] = {1.0 + z(rng), 1.0 + z(rng)};            // Gamma_2i
    const double load2[2] = {z(rng), z(rng)};                     // gamma_2i
    double mean_x = 0.0;
    for (std::size_t s = 0; s < t; ++s) {
      const auto r = static_cast<Eigen::Index>(i * t + s);
      p.x(r, 0) = g1[0] + g1[1] * f11[s] + g1[2] * f12[s] + g2[0] * f21[s] +
                  g2[1] * f22[s] + z(rng);
      mean_x += p.x(r, 0);
    }
    const double gamma1 = mean_x / double(t);
    for (std::size_t s = 0; s < t; ++s) {
      const auto r = static_cast<Eigen::Index>(i * t + s);
      p.y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s)) =
          beta_mixture(p.x(r, 0)) + gamma1 + load2[0] * f21[s] +
          load2[1] * f22[s] + spec.noise_sd * z(rng);
    }
  }
  p.validate();
  out.g = [](std::size_t, std::span<const double> x) {
    return beta_mixture(x[0]);
  };
  return out;
}

GeneratedPanel gen_firm_analog(const DgpSpec& spec, Rng& rng) {
  check_size(spec, 6);
  const std::size_t n = spec.n;
  const std::size_t t = spec.t;
  std::normal_distribution<double> z(0.0, 1.0);
  const auto f2 = factor_series(t, rng);
  const auto beta = spec.firm_beta;

  GeneratedPanel out;
  PanelData& p = out.panel;
  p.y.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t));
  p.x.resize(static_cast<Eigen::Index>(n * t), 4);
  p.f1 = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(t), 1);

  for (std::size_t i = 0; i < n; ++i) {
    double level[4];
    double load[4];
    for (int k = 0; k < 4; ++k) {
      level[k] = z(rng);
      load[k] = 0.5 + 0.5 * z(rng);
    }
    const double gamma1 = z(rng);
    const double gamma2 = z(rng);
    for (std::size_t s = 0; s < t; ++s) {
      const auto r = static_cast<Eigen::Index>(i * t + s);
      for (int k = 0; k < 3; ++k) {
        p.x(r, k) = 2.0 + level[k] + load[k] * f2[s] + 0.5 * z(rng);
      }
      const double latent = level[3] + load[3] * f2[s] + z(rng);
      p.x(r, 3) = 1.0 / (1.0 + std::exp(-latent));
      double g = export_premium(p.x(r, 3));
      for (int k = 0; k < 3; ++k) g += beta[static_cast<std::size_t>(k)] * p.x(r, k);
      p.y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s)) =
          g + gamma1 + gamma2 * f2[s] + spec.noise_sd * z(rng);
    }
  }
  p.validate();
  out.g = [beta](std::size_t, std::span<const double> x) {
    return beta[0] * x[0] + beta[1] * x[1] + beta[2] * x[2] +
           export_premium(x[3]);
  };
  return out;
}

GeneratedPanel generate(const DgpSpec& spec, Rng& rng) {
  switch (spec.design) {
    case Design::HeteroSj: return gen_hetero_sj(spec, rng);
    case Design::HomoBeta: return gen_homo_beta(spec, rng);
    case Design::FirmAnalog: return gen_firm_analog(spec, rng);
  }
  throw InputError("unknown design");
}

GeneratedPanel generate(const DgpSpec& spec) {
  Rng rng(spec.seed);
  return generate(spec, rng);
}

}  // namespace pkrr
