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

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pkrr/hetero.hpp"
#include "pkrr/homo.hpp"
#include "pkrr/spectral.hpp"

namespace pkrr {

enum class IntervalKind { MeanCi, Prediction, GCi, BetaCi };

const char* to_string(IntervalKind kind);

struct IntervalEstimate {
  double point = 0.0;
  double std_error = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  IntervalKind kind = IntervalKind::GCi;
  std::vector<std::string> flags;
};

/// Standard normal quantile. Acklam's rational approximation (relative error
/// below 1.2e-9) followed by one Halley step against erfc, which brings it
/// to within a few ulps over (1e-300, 1 - 1e-16).
double normal_quantile(double p);

/// z_{1 - (1 - level)/2}; throws InputError unless level is in (0, 1).
double two_sided_z(double level);

/// Effective dimension below which intervals are flagged.
inline constexpr double kLowEffectiveDim = 0.5;

/// h_hat * sum_v phi_v(x0)^2 / (1 + eta/mu_v)^2 for the unit's kernel.
double sigma_x0_sq(const HeteroUnitFit& fit, std::span<const double> x0);

/// Interval for the conditional mean mu_i0 = g_i(x_i0) + z_0' beta_i with
/// z_0 = (f_10', mean of the rows of x_all0)'. Standard error
/// sigma_x0 * sigma_eps / sqrt(T h_hat).
IntervalEstimate ci_mean_hetero(const HeteroUnitFit& fit,
                                std::span<const double> x_i0,
                                std::span<const double> f_10,
                                const PointMatrix& x_all0, double level);

enum class NoiseModel { Gaussian, Empirical };

struct PredictionOptions {
  NoiseModel noise = NoiseModel::Gaussian;
  std::size_t draws = 200000;
  std::uint64_t seed = 0xC0FFEE;
};

/// Prediction interval for Y_{i,T+1}. Gaussian noise gives
/// mu_hat +- z sigma_eps sqrt(sigma_x0^2 / (T h) + 1); empirical noise uses
/// Monte Carlo quantiles of residual + N(0, sigma_x0^2 sigma_eps^2 / (T h)).
IntervalEstimate prediction_interval(const HeteroUnitFit& fit,
                                     std::span<const double> x_i0,
                                     std::span<const double> f_10,
                                     const PointMatrix& x_all0, double level,
                                     const PredictionOptions& options = {});

/// Lower/upper (1-level)/2 quantiles of e + N(0, spread_sd^2) with e drawn
/// from `residuals`, by Monte Carlo with a fixed seed and linear
/// interpolation between order statistics. Needs >= 30 residuals.
std::pair<double, double> convolution_quantiles(
    std::span<const double> residuals, double spread_sd, double level,
    std::size_t draws, std::uint64_t seed);

/// V_NT = (1/NT) sum_i v_i' P v_i with v_i(t) = K(X_it, x0) the regularized
/// kernel built from the given spectrum.
double design_variance(const HomoFit& fit, const GramEigen& spectrum,
                       std::span<const double> x0);

/// A_NT(x0) = V_NT^{-1/2}. Throws NumericError when V_NT <= 1e-14.
double a_nt(const HomoFit& fit, std::span<const double> x0);
double a_nt(const HomoFit& fit, const GramEigen& spectrum,
            std::span<const double> x0);

/// g_hat(x0) +- z sigma_eps / (sqrt(NT) A_NT(x0)).
IntervalEstimate ci_g_homo(const HomoFit& fit, std::span<const double> x0,
                           double level);
IntervalEstimate ci_g_homo(const HomoFit& fit, const GramEigen& spectrum,
                           std::span<const double> x0, double level);

/// Interval for the coefficient of input coordinate `coordinate` in a
/// partially linear fit. The coordinate must belong to a `linear` block of
/// an additive kernel. The fit is evaluated at `anchor` with that linear
/// block replaced by the unit vector in `coordinate`; the anchor must be
/// chosen where the nonlinear part vanishes.
IntervalEstimate ci_beta_partial_linear(const HomoFit& fit,
                                        std::span<const double> anchor,
                                        std::size_t coordinate, double level);

}  // namespace pkrr
