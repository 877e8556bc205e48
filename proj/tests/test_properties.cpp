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

// Randomized properties over hand-rolled generators. Each case draws its
// inputs from a fixed seed so failures replay.

#include <doctest.h>

#include <cmath>
#include <string>

#include "pkrr/gcv.hpp"
#include "pkrr/hetero.hpp"
#include "pkrr/homo.hpp"
#include "pkrr/kernel.hpp"
#include "pkrr/reference.hpp"
#include "pkrr/spectral.hpp"
#include "support.hpp"

using namespace pkrr;

namespace {

KernelSpec random_leaf(testing::Gen& gen) {
  switch (gen.index(0, 2)) {
    case 0: return KernelSpec::linear();
    case 1: return KernelSpec::polynomial(int(gen.index(1, 4)));
    default: return KernelSpec::gaussian(gen.uniform(0.3, 3.0));
  }
}

// Random spec on d inputs: a leaf, or an additive split into blocks.
KernelSpec random_spec(testing::Gen& gen, std::size_t d) {
  if (d == 1 || gen.index(0, 1) == 0) return random_leaf(gen);
  AdditiveKernel add;
  std::size_t next = 0;
  while (next < d) {
    const std::size_t len = gen.index(1, d - next);
    AdditiveComponent c;
    for (std::size_t k = 0; k < len; ++k) c.dims.push_back(next + k);
    c.kernel = random_leaf(gen);
    add.components.push_back(c);
    next += len;
  }
  return add;
}

}  // namespace

TEST_CASE("gram matrices are symmetric and positive semidefinite") {
  testing::Gen gen(41);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t d = gen.index(1, 4);
    const KernelSpec s = random_spec(gen, d);
    const PointMatrix pts = gen.points(Eigen::Index(gen.index(2, 30)), Eigen::Index(d));
    const Eigen::MatrixXd k = gram(s, pts);
    INFO(to_string(s));
    CHECK((k - k.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(k).eigenvalues();
    CHECK(ev.minCoeff() >= -1e-9 * std::max(1.0, ev.maxCoeff()));
    CHECK(parse_kernel_spec(to_string(s)) == s);
  }
}

TEST_CASE("additive kernels sum their blocks") {
  testing::Gen gen(42);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t d = gen.index(2, 5);
    KernelSpec s = random_spec(gen, d);
    if (!s.is_additive()) continue;
    const auto& add = std::get<AdditiveKernel>(s.variant());
    const Eigen::VectorXd x = gen.vector(Eigen::Index(d));
    const Eigen::VectorXd y = gen.vector(Eigen::Index(d));
    double want = 0.0;
    for (const auto& c : add.components) {
      std::vector<double> xs, ys;
      for (auto j : c.dims) {
        xs.push_back(x(Eigen::Index(j)));
        ys.push_back(y(Eigen::Index(j)));
      }
      want += eval_kernel(c.kernel, xs, ys);
    }
    CHECK(eval_kernel(s, {x.data(), d}, {y.data(), d}) == doctest::Approx(want).epsilon(1e-14));
  }
}

TEST_CASE("spectral and direct solvers agree") {
  testing::Gen gen(43);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = gen.index(1, 6);
    const std::size_t d = gen.index(1, 2);
    const std::size_t q = gen.index(1, 2);
    const std::size_t t = gen.index(q + d + 2, 14);
    const PanelData p = gen.panel(n, t, d, q);
    const KernelSpec s = resolve_bandwidths(random_spec(gen, d), p.x);
    const double eta = std::pow(10.0, gen.uniform(-4, 0));
    INFO(to_string(s) << " eta " << eta << " n " << n << " t " << t);

    const std::size_t unit = gen.index(0, n - 1);
    const HeteroUnitFit h = fit_hetero_unit(p, unit, s, eta);
    const auto hr = reference::fit_hetero(p, unit, s, eta);
    const Eigen::MatrixXd k = gram(s, p.unit_points(unit));
    const double scale = std::max(1.0, p.y.cwiseAbs().maxCoeff());
    CHECK((k * h.a - k * hr.a).cwiseAbs().maxCoeff() < 1e-7 * scale);
    CHECK((h.beta - hr.beta).cwiseAbs().maxCoeff() < 1e-6 * scale);

    const HomoFit g = fit_homo(p, s, eta);
    const auto gr = reference::fit_homo(p, s, eta);
    const Eigen::MatrixXd kk = gram(s, p.x);
    CHECK((kk * g.a - kk * gr.a).cwiseAbs().maxCoeff() < 1e-7 * scale);
    CHECK((g.betas - gr.betas).cwiseAbs().maxCoeff() < 1e-6 * scale);
  }
}

TEST_CASE("GCV prefers the smallest eta among ties") {
  const std::vector<double> grid = {1.0, 2.0, 3.0, 4.0};
  const auto flat = [](double) { return GcvPoint{1.0, 1.0, 10.0}; };
  const GcvResult r = select_eta(flat, grid, false);
  CHECK(r.grid_argmin == 0);
  CHECK(r.eta_hat == 1.0);
  const auto bowl = [](double e) {
    const double l = std::log(e / 2.5);
    return GcvPoint{1.0 + l * l, 1.0, 10.0};
  };
  testing::Gen gen(44);
  for (int rep = 0; rep < 20; ++rep) {
    const double c = gen.uniform(-3, 3);
    const auto shifted = [c](double e) {
      const double l = std::log(e) - c;
      return GcvPoint{1.0 + l * l, 1.0, 10.0};
    };
    GcvOptions o;
    const auto g = make_eta_grid(o, 1.0);
    const GcvResult s = select_eta(shifted, g, true);
    CHECK(std::log(s.eta_hat) == doctest::Approx(c).epsilon(1e-4));
  }
  CHECK(select_eta(bowl, grid, false).eta_hat == 3.0);
  const auto never = [](double) { return GcvPoint{1.0, 10.0, 10.0}; };
  CHECK_THROWS(select_eta(never, grid, false));
}

TEST_CASE("regularized kernel column matches its closed form") {
  testing::Gen gen(45);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::Index n = Eigen::Index(gen.index(5, 40));
    const PointMatrix pts = gen.points(n, 1);
    const KernelSpec s = KernelSpec::gaussian(gen.uniform(0.5, 2.0));
    const GramEigen ge = eigendecompose(gram(s, pts));
    const double eta = std::pow(10.0, gen.uniform(-3, 0));
    const std::vector<double> x0 = {gen.normal()};
    const Eigen::VectorXd kx = cross_gram(s, pts, x0);
    const Eigen::MatrixXd res =
        (ge.gram / double(n) + eta * Eigen::MatrixXd::Identity(n, n)).inverse();
    const Eigen::VectorXd want = res * kx;
    const Eigen::VectorXd got = regularized_kernel_column(ge, s, pts, eta, x0);
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-4 * std::max(1.0, want.cwiseAbs().maxCoeff()));
  }
}
