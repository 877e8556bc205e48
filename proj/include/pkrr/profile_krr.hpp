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

#include <memory>

#include "pkrr/gcv.hpp"
#include "pkrr/linalg.hpp"

namespace pkrr {

/// Spectral solver for the profiled kernel ridge system
///
///   (P_N K + n eta I) a = P_N y,      P_N = I_N (x) P,
///
/// shared by the per-unit model (N = 1, n = T) and the pooled model
/// (n = NT). Since P_N commutes with M = P_N K P_N and the solution lies in
/// range(P_N), a = (M + n eta I)^{-1} P_N y. One eigendecomposition of M
/// therefore serves every eta; the smoother matrix, its trace and the GCV
/// residual sum of squares all follow in closed form from the spectrum.
class ProfileKrr {
 public:
  ProfileKrr(Eigen::MatrixXd gram,
             std::shared_ptr<const FactorProjection> projection);

  Eigen::Index size() const { return gram_.rows(); }
  Eigen::Index blocks() const { return blocks_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  const FactorProjection& projection() const { return *projection_; }

  /// Eigenvalues of M (ascending, clamped at zero).
  const Eigen::VectorXd& spectrum() const { return lambda_; }

  /// Coordinates V' P_N y of the projected response in the eigenbasis of M.
  Eigen::VectorXd project(const Eigen::Ref<const Eigen::VectorXd>& y) const;

  /// Representer weights from projected coordinates.
  Eigen::VectorXd weights(const Eigen::Ref<const Eigen::VectorXd>& coords,
                          double eta) const;

  /// Fitted values K a + Z beta, with beta the per-block OLS fit of y - K a.
  Eigen::VectorXd fitted(const Eigen::Ref<const Eigen::VectorXd>& y,
                         const Eigen::Ref<const Eigen::VectorXd>& a) const;

  /// trace(B_eta) = N p + sum lambda / (lambda + n eta).
  double smoother_trace(double eta) const;

  /// ||(I - B_eta) y||^2 = (n eta)^2 ||a||^2.
  double residual_ss(const Eigen::Ref<const Eigen::VectorXd>& coords,
                     double eta) const;

  GcvPoint gcv_point(const Eigen::Ref<const Eigen::VectorXd>& coords,
                     double eta) const;

  /// B_eta = (I - P_N) + V diag(lambda / (lambda + n eta)) V' P_N.
  Eigen::MatrixXd smoother_matrix(double eta) const;

  /// trace(K)/n, the scale of the default GCV grid.
  double grid_scale() const;

 private:
  Eigen::MatrixXd gram_;
  std::shared_ptr<const FactorProjection> projection_;
  Eigen::Index blocks_ = 1;
  Eigen::VectorXd lambda_;
  Eigen::MatrixXd vectors_;
};

}  // namespace pkrr
