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
#include <variant>
#include <vector>

#include "pkrr/gcv.hpp"
#include "pkrr/kernel.hpp"
#include "pkrr/linalg.hpp"
#include "pkrr/panel.hpp"
#include "pkrr/profile_krr.hpp"
#include "pkrr/spectral.hpp"

namespace pkrr {

/// Either a fixed regularization parameter or a GCV search.
using EtaChoice = std::variant<double, GcvOptions>;

/// Kernel ridge fit of one unit, g_i(x) = a' k_x with k_x the kernel
/// sections at the unit's T design points.
struct HeteroUnitFit {
  std::size_t unit = 0;
  Eigen::VectorXd a;
  Eigen::VectorXd beta;  // coefficients on Z_t = (f_1t', Xbar_t')'
  double eta = 0.0;
  double h_hat = 0.0;
  double sigma_eps_sq = 0.0;
  Eigen::VectorXd fitted;
  Eigen::VectorXd residuals;
  std::shared_ptr<const GramEigen> gram_eigen;
  KernelSpec spec;     // bandwidths resolved
  PointMatrix points;  // T x d design of this unit
  std::vector<std::string> warnings;
};

/// Resolves unset Gaussian bandwidths on the pooled covariates of the panel,
/// so every unit shares one kernel.
KernelSpec resolve_for_panel(const KernelSpec& spec, const PanelData& panel);

/// Precomputed per-unit problem. Fitting at many eta values (GCV) reuses one
/// eigendecomposition of P K P.
class HeteroUnitModel {
 public:
  HeteroUnitModel(const PanelData& panel, std::size_t unit,
                  const KernelSpec& spec,
                  std::shared_ptr<const FactorProjection> projection = nullptr);

  HeteroUnitFit fit(double eta) const;
  GcvResult gcv(const GcvOptions& options) const;
  Eigen::MatrixXd smoother_matrix(double eta) const;
  const ProfileKrr& solver() const { return *solver_; }
  const KernelSpec& spec() const { return spec_; }

 private:
  std::size_t unit_;
  KernelSpec spec_;
  PointMatrix points_;
  Eigen::VectorXd y_;
  Eigen::VectorXd coords_;
  std::unique_ptr<ProfileKrr> solver_;
};

HeteroUnitFit fit_hetero_unit(const PanelData& panel, std::size_t unit,
                              const KernelSpec& spec, double eta);

double predict_hetero(const HeteroUnitFit& fit, std::span<const double> x);

/// T x T smoother B_eta with fitted values B_eta Y_i.
Eigen::MatrixXd smoother_matrix_hetero(const PanelData& panel,
                                       std::size_t unit,
                                       const KernelSpec& spec, double eta);

GcvResult gcv_hetero(const PanelData& panel, std::size_t unit,
                     const KernelSpec& spec, const GcvOptions& options);

/// Mean squared residual ||Y_i - fitted||^2 / T.
double sigma_eps_hetero(const HeteroUnitFit& fit);

struct HeteroPanelFit {
  std::vector<HeteroUnitFit> units;
  std::vector<GcvResult> gcv;  // empty when eta was fixed
};

/// Fits every unit, in parallel over units when threads > 1. The result
/// does not depend on the thread count.
HeteroPanelFit fit_hetero_panel(const PanelData& panel, const KernelSpec& spec,
                                const EtaChoice& eta, int threads = 1);

}  // namespace pkrr
