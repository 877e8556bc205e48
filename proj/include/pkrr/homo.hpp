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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pkrr/gcv.hpp"
#include "pkrr/kernel.hpp"
#include "pkrr/linalg.hpp"
#include "pkrr/panel.hpp"
#include "pkrr/profile_krr.hpp"
#include "pkrr/spectral.hpp"

namespace pkrr {

struct HomoOptions {
  /// Largest N*T accepted; the dense NT x NT algebra grows cubically.
  std::size_t nt_cap = 6000;
  /// Attach the eigendecomposition of the NT-point gram (needed for
  /// intervals; costs one extra NT x NT eigensolve).
  bool gram_eigen = true;
};

/// Pooled kernel ridge fit of the common regression function,
/// g(x) = a' k_x over all NT design points (unit-major).
struct HomoFit {
  Eigen::VectorXd a;
  double eta = 0.0;
  Eigen::MatrixXd p;      // T x T annihilator
  Eigen::MatrixXd betas;  // N x (q1 + d)
  double sigma_eps_sq = 0.0;
  Eigen::VectorXd g_at_points;  // tau_i g stacked (length NT)
  Eigen::VectorXd fitted;       // g_at_points + Z beta_i stacked
  std::shared_ptr<const Eigen::MatrixXd> gram;
  std::shared_ptr<const GramEigen> gram_eigen;  // may be null
  KernelSpec spec;
  PointMatrix points;  // NT x d
  std::size_t units = 0;
  std::size_t periods = 0;
  std::size_t columns = 0;  // q1 + d
  std::vector<std::string> warnings;
};

/// P = I - Z (Z'Z)^{-1} Z'.
Eigen::MatrixXd projection_p(const Eigen::MatrixXd& z);

/// Precomputed pooled problem. One eigendecomposition of P_N K P_N serves
/// every eta.
class HomoModel {
 public:
  HomoModel(const PanelData& panel, const KernelSpec& spec,
            const HomoOptions& options = {});

  HomoFit fit(double eta) const;
  GcvResult gcv(const GcvOptions& options) const;
  Eigen::MatrixXd smoother_matrix(double eta) const;
  const ProfileKrr& solver() const { return *solver_; }
  const KernelSpec& spec() const { return spec_; }

 private:
  HomoOptions options_;
  KernelSpec spec_;
  PointMatrix points_;
  Eigen::VectorXd y_;
  Eigen::VectorXd coords_;
  std::size_t units_;
  std::size_t periods_;
  std::unique_ptr<ProfileKrr> solver_;
};

HomoFit fit_homo(const PanelData& panel, const KernelSpec& spec, double eta,
                 const HomoOptions& options = {});

double predict_homo(const HomoFit& fit, std::span<const double> x);

/// NT x NT smoother B_eta with stacked fitted values B_eta Y.
Eigen::MatrixXd smoother_matrix_homo(const PanelData& panel,
                                     const KernelSpec& spec, double eta,
                                     const HomoOptions& options = {});

GcvResult gcv_homo(const PanelData& panel, const KernelSpec& spec,
                   const GcvOptions& options,
                   const HomoOptions& homo_options = {});

/// sum_i (Y_i - tau_i g)' P (Y_i - tau_i g) / (N (T - q1 - d)).
double sigma_eps_homo(const HomoFit& fit, const PanelData& panel);

/// The fit's gram eigendecomposition, computing it when the fit was made
/// without one.
std::shared_ptr<const GramEigen> spectrum_of(const HomoFit& fit);

}  // namespace pkrr
