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

// Test-only helpers: seeded generators and brute-force oracles that do not
// share code paths with the library solvers.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "pkrr/kernel.hpp"
#include "pkrr/panel.hpp"

namespace testing {

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  }
  double normal(double sd = 1.0) {
    return std::normal_distribution<double>(0.0, sd)(rng);
  }
  std::size_t index(std::size_t lo, std::size_t hi) {  // inclusive
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  }
  Eigen::VectorXd vector(Eigen::Index n, double sd = 1.0) {
    Eigen::VectorXd v(n);
    for (Eigen::Index k = 0; k < n; ++k) v(k) = normal(sd);
    return v;
  }
  pkrr::PointMatrix points(Eigen::Index n, Eigen::Index d, double sd = 1.0) {
    pkrr::PointMatrix p(n, d);
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < d; ++c) p(r, c) = normal(sd);
    }
    return p;
  }
  /// Panel with N units, T periods, d covariates and q1 observed factors
  /// (intercept first); responses are smooth in x plus factor terms and
  /// noise.
  pkrr::PanelData panel(std::size_t n, std::size_t t, std::size_t d,
                        std::size_t q1, double noise = 0.3) {
    pkrr::PanelData p;
    p.y.resize(Eigen::Index(n), Eigen::Index(t));
    p.x = points(Eigen::Index(n * t), Eigen::Index(d));
    p.f1.resize(Eigen::Index(t), Eigen::Index(q1));
    for (std::size_t s = 0; s < t; ++s) {
      p.f1(Eigen::Index(s), 0) = 1.0;
      for (std::size_t k = 1; k < q1; ++k) p.f1(Eigen::Index(s), Eigen::Index(k)) = normal();
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double load = normal();
      for (std::size_t s = 0; s < t; ++s) {
        const auto r = Eigen::Index(i * t + s);
        double v = std::sin(p.x(r, 0)) + load * p.f1(Eigen::Index(s), Eigen::Index(q1 - 1));
        for (std::size_t k = 1; k < d; ++k) v += 0.3 * p.x(r, Eigen::Index(k));
        p.y(Eigen::Index(i), Eigen::Index(s)) = v + normal(noise);
      }
    }
    p.validate();
    return p;
  }
};

/// Kernels written out from their textbook definitions.
inline double gaussian_k(double b, const double* x, const double* y, int d) {
  double s = 0.0;
  for (int k = 0; k < d; ++k) s += (x[k] - y[k]) * (x[k] - y[k]);
  return std::exp(-s / (b * b));
}

inline double poly_k(int order, const double* x, const double* y, int d) {
  double ip = 1.0;
  for (int k = 0; k < d; ++k) ip += x[k] * y[k];
  double out = 1.0;
  for (int e = 0; e < order - 1; ++e) out *= ip;
  return out;
}

/// Z-annihilator from the normal equations, without QR.
inline Eigen::MatrixXd annihilator(const Eigen::MatrixXd& z) {
  const Eigen::MatrixXd ztz_inv = (z.transpose() * z).inverse();
  return Eigen::MatrixXd::Identity(z.rows(), z.rows()) - z * ztz_inv * z.transpose();
}

/// Cross-section averaged design Z = [F1 | Xbar], recomputed by loops.
inline Eigen::MatrixXd z_of(const pkrr::PanelData& p) {
  const auto n = p.y.rows();
  const auto t = p.y.cols();
  const auto d = p.x.cols();
  Eigen::MatrixXd z(t, p.f1.cols() + d);
  z.leftCols(p.f1.cols()) = p.f1;
  for (Eigen::Index s = 0; s < t; ++s) {
    for (Eigen::Index k = 0; k < d; ++k) {
      double sum = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) sum += p.x(i * t + s, k);
      z(s, p.f1.cols() + k) = sum / double(n);
    }
  }
  return z;
}

struct HeteroSolution {
  Eigen::VectorXd a;
  Eigen::VectorXd beta;
};

/// Objective (1/2T)|y - K a - Z b|^2 + (eta/2) a'K a.
inline double hetero_objective(const Eigen::MatrixXd& k, const Eigen::MatrixXd& z,
                               const Eigen::VectorXd& y, double eta,
                               const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double t = double(y.size());
  const Eigen::VectorXd r = y - k * a - z * b;
  return r.squaredNorm() / (2.0 * t) + 0.5 * eta * a.dot(k * a);
}

/// Minimizes hetero_objective over (a, b) jointly: stationarity of the
/// quadratic, solved as one dense system (minimum-norm if singular).
inline HeteroSolution brute_hetero(const Eigen::MatrixXd& k, const Eigen::MatrixXd& z,
                                   const Eigen::VectorXd& y, double eta) {
  const auto t = k.rows();
  const auto p = z.cols();
  const double tt = double(t);
  Eigen::MatrixXd h(t + p, t + p);
  h.topLeftCorner(t, t) = k * k / tt + eta * k;
  h.topRightCorner(t, p) = k * z / tt;
  h.bottomLeftCorner(p, t) = z.transpose() * k / tt;
  h.bottomRightCorner(p, p) = z.transpose() * z / tt;
  Eigen::VectorXd g(t + p);
  g.head(t) = k * y / tt;
  g.tail(p) = z.transpose() * y / tt;
  const Eigen::VectorXd sol = h.completeOrthogonalDecomposition().solve(g);
  return {sol.head(t), sol.tail(p)};
}

/// Objective (1/2NT) (Y - K a)' P_N (Y - K a) + (eta/2) a'K a.
inline double homo_objective(const Eigen::MatrixXd& k, const Eigen::MatrixXd& pn,
                             const Eigen::VectorXd& y, double eta,
                             const Eigen::VectorXd& a) {
  const double n = double(y.size());
  const Eigen::VectorXd r = y - k * a;
  return r.dot(pn * r) / (2.0 * n) + 0.5 * eta * a.dot(k * a);
}

/// Block-diagonal P_N with N copies of P.
inline Eigen::MatrixXd block_diag(const Eigen::MatrixXd& p, Eigen::Index n) {
  const auto t = p.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n * t, n * t);
  for (Eigen::Index i = 0; i < n; ++i) out.block(i * t, i * t, t, t) = p;
  return out;
}

/// Minimizer of homo_objective over a (minimum-norm stationary point).
inline Eigen::VectorXd brute_homo(const Eigen::MatrixXd& k, const Eigen::MatrixXd& pn,
                                  const Eigen::VectorXd& y, double eta) {
  const double n = double(y.size());
  const Eigen::MatrixXd h = k * pn * k / n + eta * k;
  const Eigen::VectorXd g = k * pn * y / n;
  return h.completeOrthogonalDecomposition().solve(g);
}

}  // namespace testing
