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
#include <span>
#include <string>
#include <vector>

#include "pkrr/kernel.hpp"

namespace pkrr {

/// Balanced panel: responses, covariates and observed common factors.
///
/// Covariates are stored unit-major: row i*T + t of `x` is X_it. The first
/// column of `f1` is the intercept (all ones).
struct PanelData {
  Eigen::MatrixXd y;   // N x T
  PointMatrix x;       // NT x d
  Eigen::MatrixXd f1;  // T x q1
  std::vector<std::string> unit_labels;
  std::vector<std::string> time_labels;

  std::size_t units() const { return static_cast<std::size_t>(y.rows()); }
  std::size_t periods() const { return static_cast<std::size_t>(y.cols()); }
  std::size_t dim() const { return static_cast<std::size_t>(x.cols()); }
  std::size_t factors() const { return static_cast<std::size_t>(f1.cols()); }

  std::span<const double> covariate(std::size_t i, std::size_t t) const;

  /// T x d covariates of one unit.
  PointMatrix unit_points(std::size_t i) const;

  /// Responses stacked unit-major (length NT).
  Eigen::VectorXd stacked_y() const;

  /// Throws InputError unless the shapes agree, N >= 1, T >= q1 + d + 1,
  /// all values are finite and the first factor column is all ones. Fills
  /// default labels when they are empty.
  void validate();
};

/// T x (q1 + d) matrix whose row t is (f_1t', Xbar_t') with Xbar_t the
/// cross-section average of the covariates.
Eigen::MatrixXd build_z(const PanelData& panel);

}  // namespace pkrr
