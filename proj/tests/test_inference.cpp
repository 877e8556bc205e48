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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "pkrr/error.hpp"
#include "pkrr/hetero.hpp"
#include "pkrr/homo.hpp"
#include "pkrr/inference.hpp"
#include "support.hpp"

using namespace pkrr;

namespace {

// Phi^{-1} by bisection on erfc.
double bisect_quantile(double p) {
  double lo = -40.0;
  double hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

Eigen::VectorXd kernel_column(const KernelSpec& s, const PointMatrix& pts,
                              const std::vector<double>& x0) {
  Eigen::VectorXd k(pts.rows());
  for (Eigen::Index r = 0; r < pts.rows(); ++r) {
    k(r) = testing::gaussian_k(std::get<GaussianKernel>(s.variant()).bandwidth.value(),
                               pts.row(r).data(), x0.data(), int(x0.size()));
  }
  return k;
}

// (K/n + eta I)^{-1}, the regularized resolvent.
Eigen::MatrixXd resolvent(const Eigen::MatrixXd& k, double eta) {
  const auto n = k.rows();
  return (k / double(n) + eta * Eigen::MatrixXd::Identity(n, n)).inverse();
}

PointMatrix row_of(std::initializer_list<double> v) {
  PointMatrix m(1, Eigen::Index(v.size()));
  Eigen::Index c = 0;
  for (double e : v) m(0, c++) = e;
  return m;
}

}  // namespace

TEST_CASE("normal quantile") {
  CHECK(two_sided_z(0.95) == doctest::Approx(1.959963984540054).epsilon(1e-13));
  for (double p : {1e-12, 1e-6, 0.001, 0.02, 0.3, 0.5, 0.77, 0.975, 0.999, 1e-9}) {
    CHECK(normal_quantile(p) == doctest::Approx(bisect_quantile(p)).epsilon(1e-10));
  }
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK_THROWS_AS(normal_quantile(0.0), InputError);
  CHECK_THROWS_AS(two_sided_z(1.0), InputError);
}

TEST_CASE("hetero intervals") {
  testing::Gen gen(21);
  const PanelData p = gen.panel(4, 40, 1, 2);
  const KernelSpec s = KernelSpec::gaussian(1.2);
  const HeteroUnitFit fit = fit_hetero_unit(p, 1, s, 0.01);
  const std::vector<double> f0 = {1.0, 0.3};
  const PointMatrix xall = row_of({0.1});
  const PointMatrix xall4 = gen.points(4, 1);

  SUBCASE("sigma_x0 against a closed form") {
    const Eigen::MatrixXd k = gram(s, fit.points);
    const Eigen::MatrixXd r = resolvent(k, fit.eta);
    const double h = (k / 40.0 * r).trace();
    CHECK(fit.h_hat == doctest::Approx(h).epsilon(1e-8));
    for (double xv : {-1.0, 0.0, 0.4, 2.0}) {
      const std::vector<double> x0 = {xv};
      const Eigen::VectorXd kx = kernel_column(s, fit.points, x0);
      const double want = h * kx.dot(r * r * kx) / 40.0;
      CHECK(sigma_x0_sq(fit, x0) == doctest::Approx(want).epsilon(1e-6));
    }
  }

  SUBCASE("width identity and nesting") {
    const std::vector<double> x0 = {0.2};
    const IntervalEstimate ci = ci_mean_hetero(fit, x0, f0, xall4, 0.95);
    const double se = std::sqrt(sigma_x0_sq(fit, x0) * fit.sigma_eps_sq / (40.0 * fit.h_hat));
    CHECK(ci.std_error == doctest::Approx(se).epsilon(1e-12));
    CHECK(ci.upper - ci.lower == doctest::Approx(2 * 1.959963984540054 * se).epsilon(1e-10));
    Eigen::VectorXd z0(3);
    z0 << 1.0, 0.3, xall4.col(0).mean();
    CHECK(ci.point == doctest::Approx(predict_hetero(fit, x0) + z0.dot(fit.beta)).epsilon(1e-12));

    double last = 0.0;
    for (double lvl : {0.5, 0.8, 0.9, 0.95, 0.99}) {
      const auto c = ci_mean_hetero(fit, x0, f0, xall, lvl);
      CHECK(c.upper - c.lower > last);
      last = c.upper - c.lower;
      const auto pi = prediction_interval(fit, x0, f0, xall, lvl);
      CHECK(pi.lower <= c.lower);
      CHECK(pi.upper >= c.upper);
      CHECK(pi.std_error == doctest::Approx(std::sqrt(se * se + fit.sigma_eps_sq)).epsilon(1e-12));
    }
  }

  SUBCASE("zero noise gives zero width") {
    HeteroUnitFit exact = fit;
    exact.sigma_eps_sq = 0.0;
    const std::vector<double> x0 = {0.5};
    const auto c = ci_mean_hetero(exact, x0, f0, xall, 0.95);
    CHECK(c.upper == c.lower);
    const auto pi = prediction_interval(exact, x0, f0, xall, 0.95);
    CHECK(pi.upper == pi.lower);
  }

  SUBCASE("argument errors") {
    const std::vector<double> x0 = {0.5};
    const std::vector<double> short_f = {1.0};
    CHECK_THROWS_AS(ci_mean_hetero(fit, x0, short_f, xall, 0.95), InputError);
    CHECK_THROWS_AS(ci_mean_hetero(fit, x0, f0, xall, 1.5), InputError);
  }

  SUBCASE("low effective dimension flag") {
    const HeteroUnitFit smooth = fit_hetero_unit(p, 1, s, 1e4);
    CHECK(smooth.h_hat < kLowEffectiveDim);
    const std::vector<double> x0 = {0.5};
    const auto c = ci_mean_hetero(smooth, x0, f0, xall, 0.95);
    CHECK(std::find(c.flags.begin(), c.flags.end(), "low effective dimension") != c.flags.end());
  }
}

TEST_CASE("empirical convolution quantiles") {
  testing::Gen gen(22);
  std::vector<double> res(10000);
  for (auto& r : res) r = gen.normal(1.0);
  const auto [lo, hi] = convolution_quantiles(res, 0.5, 0.95, 200000, 0xC0FFEE);
  const double want = 1.959963984540054 * std::sqrt(1.0 + 0.25);
  CHECK(std::abs(lo + want) < 0.01 * want + 0.03);
  CHECK(std::abs(hi - want) < 0.01 * want + 0.03);
  const auto again = convolution_quantiles(res, 0.5, 0.95, 200000, 0xC0FFEE);
  CHECK(again.first == lo);
  CHECK(again.second == hi);

  std::vector<double> few(29, 0.0);
  CHECK_THROWS_AS(convolution_quantiles(few, 1.0, 0.95, 1000, 1), InputError);

  // Residuals of a fit with T < 30 cannot feed the empirical interval.
  const PanelData p = gen.panel(3, 12, 1, 1);
  const auto fit = fit_hetero_unit(p, 0, KernelSpec::gaussian(1.0), 0.01);
  PredictionOptions opt;
  opt.noise = NoiseModel::Empirical;
  const std::vector<double> x0 = {0.0};
  const std::vector<double> f0 = {1.0};
  CHECK_THROWS_AS(prediction_interval(fit, x0, f0, row_of({0.0}), 0.95, opt), InputError);
}

TEST_CASE("design variance and A_NT") {
  testing::Gen gen(23);
  const PanelData p = gen.panel(5, 8, 1, 2);
  const KernelSpec s = KernelSpec::gaussian(1.0);
  const HomoFit fit = fit_homo(p, s, 0.02);
  const Eigen::MatrixXd k = gram(s, p.x);
  const Eigen::MatrixXd r = resolvent(k, fit.eta);
  const Eigen::MatrixXd pm = testing::annihilator(testing::z_of(p));
  for (double xv : {-0.5, 0.0, 1.3}) {
    const std::vector<double> x0 = {xv};
    const Eigen::VectorXd v = r * kernel_column(s, fit.points, x0);
    double want = 0.0;
    for (Eigen::Index i = 0; i < 5; ++i) {
      want += v.segment(i * 8, 8).dot(pm * v.segment(i * 8, 8));
    }
    want /= 40.0;
    CHECK(design_variance(fit, *fit.gram_eigen, x0) == doctest::Approx(want).epsilon(1e-6));
    CHECK(a_nt(fit, x0) == doctest::Approx(1.0 / std::sqrt(want)).epsilon(1e-6));

    const auto ci = ci_g_homo(fit, x0, 0.95);
    CHECK(ci.std_error == doctest::Approx(std::sqrt(fit.sigma_eps_sq) /
                                          (std::sqrt(40.0) * a_nt(fit, x0))).epsilon(1e-12));
    CHECK(ci.point == doctest::Approx(predict_homo(fit, x0)));
  }

  SUBCASE("invariant to unit order") {
    PanelData q = p;
    const std::vector<Eigen::Index> perm = {2, 4, 0, 1, 3};
    for (Eigen::Index i = 0; i < 5; ++i) {
      q.y.row(i) = p.y.row(perm[std::size_t(i)]);
      q.x.middleRows(i * 8, 8) = p.x.middleRows(perm[std::size_t(i)] * 8, 8);
    }
    const HomoFit fq = fit_homo(q, s, 0.02);
    const std::vector<double> x0 = {0.3};
    CHECK(a_nt(fq, x0) == doctest::Approx(a_nt(fit, x0)).epsilon(1e-8));
  }

  SUBCASE("design quantities ignore the response level") {
    PanelData q = p;
    q.y.array() += 3.5;
    const HomoFit fq = fit_homo(q, s, 0.02);
    const std::vector<double> x0 = {0.3};
    CHECK(a_nt(fq, x0) == doctest::Approx(a_nt(fit, x0)).epsilon(1e-10));
  }

  SUBCASE("scaling of the interval width") {
    const std::vector<double> x0 = {0.3};
    HomoFit noisy = fit;
    noisy.sigma_eps_sq *= 4.0;
    const auto a = ci_g_homo(fit, x0, 0.9);
    const auto b = ci_g_homo(noisy, x0, 0.9);
    CHECK(b.upper - b.lower == doctest::Approx(2.0 * (a.upper - a.lower)).epsilon(1e-12));
  }

  SUBCASE("spectrum mismatch") {
    const HomoFit other = fit_homo(gen.panel(2, 8, 1, 2), s, 0.02);
    const std::vector<double> x0 = {0.3};
    CHECK_THROWS_AS(design_variance(fit, *other.gram_eigen, x0), InputError);
  }
}

TEST_CASE("interval width decreases with N") {
  const KernelSpec s = KernelSpec::gaussian(1.0);
  const std::vector<double> x0 = {0.0};
  double last = 1e300;
  for (std::size_t n : {4u, 16u, 64u}) {
    testing::Gen gen(24);
    const PanelData p = gen.panel(n, 10, 1, 1);
    HomoFit fit = fit_homo(p, s, 0.01);
    fit.sigma_eps_sq = 1.0;
    const auto ci = ci_g_homo(fit, x0, 0.95);
    CHECK(ci.upper - ci.lower < last);
    last = ci.upper - ci.lower;
  }
}

TEST_CASE("partially linear coefficient") {
  // y = 0.5 x1 + sin(x2) + unit effect + noise; sin(0) = 0 anchors x2 = 0.
  const KernelSpec s = parse_kernel_spec("add([0]:linear,[1]:gaussian(b=1.5))");
  int covered = 0;
  std::vector<double> points;
  const int reps = 100;
  for (int rep = 0; rep < reps; ++rep) {
    testing::Gen gen(100 + std::uint64_t(rep));
    PanelData p;
    const std::size_t n = 20;
    const std::size_t t = 10;
    p.x = gen.points(Eigen::Index(n * t), 2);
    p.f1 = Eigen::MatrixXd::Ones(Eigen::Index(t), 1);
    p.y.resize(Eigen::Index(n), Eigen::Index(t));
    for (std::size_t i = 0; i < n; ++i) {
      const double fe = gen.normal();
      for (std::size_t u = 0; u < t; ++u) {
        const auto r = Eigen::Index(i * t + u);
        p.y(Eigen::Index(i), Eigen::Index(u)) =
            0.5 * p.x(r, 0) + std::sin(p.x(r, 1)) + fe + gen.normal(0.5);
      }
    }
    p.validate();
    const HomoFit fit = fit_homo(p, s, 1e-3);
    const std::vector<double> anchor = {0.0, 0.0};
    const auto ci = ci_beta_partial_linear(fit, anchor, 0, 0.95);
    CHECK(ci.kind == IntervalKind::BetaCi);
    points.push_back(ci.point);
    CHECK(ci.point - ci.lower == doctest::Approx(ci.upper - ci.point).epsilon(1e-12));
    if (ci.lower <= 0.5 && 0.5 <= ci.upper) ++covered;

    if (rep == 0) {
      // Moving the anchor moves the point by the fitted nonlinear part.
      const std::vector<double> shifted = {0.0, 1.0};
      const std::vector<double> at0 = {0.0, 0.0};
      const std::vector<double> at1 = {0.0, 1.0};
      const auto moved = ci_beta_partial_linear(fit, shifted, 0, 0.95);
      CHECK(moved.point - ci.point ==
            doctest::Approx(predict_homo(fit, at1) - predict_homo(fit, at0)).epsilon(1e-10));
      CHECK_THROWS_AS(ci_beta_partial_linear(fit, anchor, 1, 0.95), SpecError);
      const std::vector<double> bad = {0.0};
      CHECK_THROWS_AS(ci_beta_partial_linear(fit, bad, 0, 0.95), InputError);
    }
  }
  double mean = 0.0;
  for (double v : points) mean += v / reps;
  double var = 0.0;
  for (double v : points) var += (v - mean) * (v - mean) / (reps - 1);
  const double mc_se = std::sqrt(var / reps);
  INFO("mean point " << mean << " (mc se " << mc_se << "), covered " << covered << "/" << reps);
  CHECK(std::abs(mean - 0.5) <= 3.0 * mc_se);
}
