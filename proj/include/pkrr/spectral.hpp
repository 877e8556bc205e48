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

#include "pkrr/kernel.hpp"

namespace pkrr {

/// Relative cutoff below which an eigenvalue of gram/n is treated as zero
/// (excluded from Nystrom extension and regularized sums).
inline constexpr double kEigenRelativeCutoff = 1e-10;

/// Gram matrix together with the eigendecomposition of gram/n.
///
/// eigvals are the empirical operator eigenvalues mu_1 >= ... >= mu_n >= 0;
/// the corresponding inverse eigenvalues of the RKHS norm are rho = 1/mu.
/// eigvecs holds orthonormal columns in the same order. `rank` counts the
/// eigenvalues above kEigenRelativeCutoff * mu_1.
struct GramEigen {
  Eigen::MatrixXd gram;
  Eigen::VectorXd eigvals;
  Eigen::MatrixXd eigvecs;
  std::size_t n = 0;
  std::size_t rank = 0;
};

/// Throws InputError when gram is not symmetric to 1e-12 (relative to its
/// largest entry) and NumericError when the eigensolver fails. Eigenvalues
/// below zero (round-off) are clamped to zero.
GramEigen eigendecompose(Eigen::MatrixXd gram);

/// Empirical effective dimension sum_v mu_v / (mu_v + eta) over the
/// retained eigenvalues.
double effective_dim(const GramEigen& ge, double eta);

/// Nystrom extension of the nu-th (0-based) empirical eigenfunction,
/// normalized so that (1/n) sum_t phi(points_t)^2 = 1. Throws NumericError
/// when mu_nu is below the cutoff.
double nystrom_phi(const GramEigen& ge, const KernelSpec& spec,
                   const PointMatrix& points, std::size_t nu,
                   std::span<const double> x);

/// All retained eigenfunctions at x (length ge.rank).
Eigen::VectorXd nystrom_phi_all(const GramEigen& ge, const KernelSpec& spec,
                                const PointMatrix& points,
                                std::span<const double> x);

/// sum_v phi_v(x0)^2 / (1 + eta/mu_v)^2, the plug-in for the squared norm of
/// the regularized kernel section at x0.
double regularized_kernel_value(const GramEigen& ge, const KernelSpec& spec,
                                const PointMatrix& points, double eta,
                                std::span<const double> x0);

/// Regularized kernel K(points_t, x0) = sum_v phi_v(points_t) phi_v(x0) /
/// (1 + eta/mu_v) at every sample point, using phi_v(points_t) =
/// sqrt(n) U_tv.
Eigen::VectorXd regularized_kernel_column(const GramEigen& ge,
                                          const KernelSpec& spec,
                                          const PointMatrix& points,
                                          double eta,
                                          std::span<const double> x0);

}  // namespace pkrr
