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

#include "pkrr/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <variant>

#include "pkrr/error.hpp"

namespace pkrr {

const char* to_string(IntervalKind kind) {
  switch (kind) {
    case IntervalKind::MeanCi: return "mean_ci";
    case IntervalKind::Prediction: return "prediction";
    case IntervalKind::GCi: return "g_ci";
    case IntervalKind::BetaCi: return "beta_ci";
  }
  return "unknown";
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InputError("normal_quantile: probability must be in (0, 1)");
  }
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x = 0.0;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley refinement; use the upper tail for p > 0.5 to keep precision.
  const double e = p <= 0.5
                       ? 0.5 * std::erfc(-x / std::numbers::sqrt2) - p
                       : (1.0 - p) - 0.5 * std::erfc(x / std::numbers::sqrt2);
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double two_sided_z(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw InputError("confidence level must be in (0, 1)");
  }
  return normal_quantile(1.0 - 0.5 * (1.0 - level));
}

namespace {

IntervalEstimate symmetric(double point, double se, double level,
                           IntervalKind kind) {
  const double z = two_sided_z(level);
  IntervalEstimate out;
  out.point = point;
  out.std_error = se;
  out.lower = point - z * se;
  out.upper = point + z * se;
  out.level = level;
  out.kind = kind;
  return out;
}

double conditional_mean(const HeteroUnitFit& fit, std::span<const double> x_i0,
                        std::span<const double> f_10,
                        const PointMatrix& x_all0) {
  const auto p = fit.beta.size();
  const auto d = static_cast<Eigen::Index>(fit.points.cols());
  if (static_cast<Eigen::Index>(f_10.size()) + d != p) {
    throw InputError("f_10 has length " + std::to_string(f_10.size()) +
                     ", expected " + std::to_string(p - d));
  }
  if (x_all0.cols() != d || x_all0.rows() < 1) {
    throw InputError("x_all0 must be a nonempty N x d matrix");
  }
  Eigen::VectorXd z0(p);
  for (std::size_t k = 0; k < f_10.size(); ++k) {
    z0(static_cast<Eigen::Index>(k)) = f_10[k];
  }
  z0.tail(d) = x_all0.colwise().mean().transpose();
  return predict_hetero(fit, x_i0) + z0.dot(fit.beta);
}

double mean_std_error(const HeteroUnitFit& fit, std::span<const double> x_i0,
                      std::vector<std::string>& flags) {
  if (!(fit.h_hat > 0.0)) {
    throw NumericError("effective dimension is zero; interval undefined");
  }
  if (fit.h_hat < kLowEffectiveDim) flags.push_back("low effective dimension");
  const double t = static_cast<double>(fit.points.rows());
  const double s2 = sigma_x0_sq(fit, x_i0);
  return std::sqrt(s2 * fit.sigma_eps_sq / (t * fit.h_hat));
}

}  // namespace

double sigma_x0_sq(const HeteroUnitFit& fit, std::span<const double> x0) {
  if (!fit.gram_eigen) throw InputError("fit carries no gram spectrum");
  if (fit.gram_eigen->rank == 0) return 0.0;
  return fit.h_hat * regularized_kernel_value(*fit.gram_eigen, fit.spec,
                                              fit.points, fit.eta, x0);
}

IntervalEstimate ci_mean_hetero(const HeteroUnitFit& fit,
                                std::span<const double> x_i0,
                                std::span<const double> f_10,
                                const PointMatrix& x_all0, double level) {
  std::vector<std::string> flags;
  const double se = mean_std_error(fit, x_i0, flags);
  auto out = symmetric(conditional_mean(fit, x_i0, f_10, x_all0), se, level,
                       IntervalKind::MeanCi);
  out.flags = std::move(flags);
  return out;
}

std::pair<double, double> convolution_quantiles(
    std::span<const double> residuals, double spread_sd, double level,
    std::size_t draws, std::uint64_t seed) {
  if (residuals.size() < 30) {
    throw InputError("empirical prediction interval needs at least 30 "
                     "residuals, got " + std::to_string(residuals.size()));
  }
  if (draws < 2) throw InputError("need at least two Monte Carlo draws");
  if (!(level > 0.0 && level < 1.0)) {
    throw InputError("confidence level must be in (0, 1)");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, residuals.size() - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> s(draws);
  for (auto& v : s) v = residuals[pick(rng)] + spread_sd * normal(rng);
  std::sort(s.begin(), s.end());
  auto quantile = [&](double q) {
    const double h = q * static_cast<double>(draws - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, draws - 1);
    return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
  };
  const double alpha = 1.0 - level;
  return {quantile(alpha / 2.0), quantile(1.0 - alpha / 2.0)};
}

IntervalEstimate prediction_interval(const HeteroUnitFit& fit,
                                     std::span<const double> x_i0,
                                     std::span<const double> f_10,
                                     const PointMatrix& x_all0, double level,
                                     const PredictionOptions& options) {
  std::vector<std::string> flags;
  const double mean_se = mean_std_error(fit, x_i0, flags);
  const double mu = conditional_mean(fit, x_i0, f_10, x_all0);
  IntervalEstimate out;
  if (options.noise == NoiseModel::Gaussian) {
    const double se =
        std::sqrt(mean_se * mean_se + fit.sigma_eps_sq);
    out = symmetric(mu, se, level, IntervalKind::Prediction);
  } else {
    const auto [ql, qh] = convolution_quantiles(
        {fit.residuals.data(), static_cast<std::size_t>(fit.residuals.size())},
        mean_se, level, options.draws, options.seed);
    out.point = mu;
    out.std_error = std::sqrt(mean_se * mean_se + fit.sigma_eps_sq);
    out.lower = mu + ql;
    out.upper = mu + qh;
    out.level = level;
    out.kind = IntervalKind::Prediction;
    flags.push_back("empirical noise distribution");
  }
  out.flags = std::move(flags);
  return out;
}

double design_variance(const HomoFit& fit, const GramEigen& spectrum,
                       std::span<const double> x0) {
  if (spectrum.n != static_cast<std::size_t>(fit.points.rows())) {
    throw InputError("spectrum does not belong to this fit");
  }
  const Eigen::VectorXd v =
      regularized_kernel_column(spectrum, fit.spec, fit.points, fit.eta, x0);
  const auto t = static_cast<Eigen::Index>(fit.periods);
  double s = 0.0;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(fit.units); ++i) {
    const auto vi = v.segment(i * t, t);
    s += vi.dot(fit.p * vi);
  }
  return s / static_cast<double>(v.size());
}

double a_nt(const HomoFit& fit, const GramEigen& spectrum,
            std::span<const double> x0) {
  const double v = design_variance(fit, spectrum, x0);
  if (!(v > 1e-14)) {
    throw NumericError("design variance V_NT is degenerate at x0 (" +
                       std::to_string(v) + ")");
  }
  return 1.0 / std::sqrt(v);
}

double a_nt(const HomoFit& fit, std::span<const double> x0) {
  return a_nt(fit, *spectrum_of(fit), x0);
}

IntervalEstimate ci_g_homo(const HomoFit& fit, const GramEigen& spectrum,
                           std::span<const double> x0, double level) {
  const double nt = static_cast<double>(fit.points.rows());
  const double a = a_nt(fit, spectrum, x0);
  const double se = std::sqrt(fit.sigma_eps_sq) / (std::sqrt(nt) * a);
  return symmetric(predict_homo(fit, x0), se, level, IntervalKind::GCi);
}

IntervalEstimate ci_g_homo(const HomoFit& fit, std::span<const double> x0,
                           double level) {
  return ci_g_homo(fit, *spectrum_of(fit), x0, level);
}

IntervalEstimate ci_beta_partial_linear(const HomoFit& fit,
                                        std::span<const double> anchor,
                                        std::size_t coordinate, double level) {
  const auto d = static_cast<std::size_t>(fit.points.cols());
  if (anchor.size() != d) {
    throw InputError("anchor has dimension " + std::to_string(anchor.size()) +
                     ", model expects " + std::to_string(d));
  }
  const auto* add = std::get_if<AdditiveKernel>(&fit.spec.variant());
  const AdditiveComponent* block = nullptr;
  if (add != nullptr) {
    for (const auto& c : add->components) {
      if (std::find(c.dims.begin(), c.dims.end(), coordinate) != c.dims.end() &&
          std::holds_alternative<LinearKernel>(c.kernel.variant())) {
        block = &c;
      }
    }
  }
  if (block == nullptr) {
    throw SpecError("coordinate " + std::to_string(coordinate) +
                    " is not in a linear block of an additive kernel");
  }
  std::vector<double> x(anchor.begin(), anchor.end());
  for (std::size_t j : block->dims) x[j] = 0.0;
  x[coordinate] = 1.0;
  auto out = ci_g_homo(fit, x, level);
  out.kind = IntervalKind::BetaCi;
  return out;
}

}  // namespace pkrr
