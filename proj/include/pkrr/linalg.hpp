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

namespace pkrr {

/// Eigenpairs of a symmetric matrix, eigenvalues ascending.
struct SymmetricEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

/// Dense symmetric eigendecomposition (LAPACK divide and conquer). Only the
/// lower triangle is read. Throws NumericError with size/norm diagnostics
/// when the solver does not converge.
///
/// The LAPACK path is checked once per process on a fixed 160 x 160
/// problem; if the linked BLAS returns non-orthogonal vectors (seen with
/// some OpenBLAS AVX-512 kernels, fixed by OPENBLAS_CORETYPE=Haswell) every
/// call uses Eigen's tridiagonal QR solver instead.
SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& a);

/// "lapack" or "eigen": the backend symmetric_eigen uses in this process.
const char* eigen_backend();

/// Projection onto the orthogonal complement of the column span of a
/// full-column-rank T x p design Z (the observed factors plus cross-section
/// averages):
///
///   P = I - Z (Z'Z)^{-1} Z'.
///
/// Construction rejects rank-deficient designs with an error naming the
/// dependent columns rather than falling back to a pseudo-inverse.
class FactorProjection {
 public:
  explicit FactorProjection(Eigen::MatrixXd z);

  Eigen::Index periods() const { return z_.rows(); }
  Eigen::Index columns() const { return z_.cols(); }
  const Eigen::MatrixXd& design() const { return z_; }

  /// T x T annihilator P.
  const Eigen::MatrixXd& annihilator() const { return p_; }

  /// T x T hat matrix Z (Z'Z)^{-1} Z' = I - P.
  Eigen::MatrixXd hat() const;

  /// Least-squares coefficients (Z'Z)^{-1} Z' r.
  Eigen::VectorXd ols(const Eigen::Ref<const Eigen::VectorXd>& r) const;

  /// Applies P to each consecutive length-T block of a stacked vector.
  Eigen::VectorXd annihilate_blocks(
      const Eigen::Ref<const Eigen::VectorXd>& v) const;

  /// Replaces m by P_N m P_N where P_N = I_N (x) P and m is NT x NT.
  void sandwich_blocks(Eigen::MatrixXd& m) const;

  /// Condition number of Z'Z.
  double gram_condition() const { return condition_; }

 private:
  Eigen::MatrixXd z_;
  Eigen::MatrixXd q_;  // orthonormal basis of span(Z)
  Eigen::MatrixXd p_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
  double condition_ = 1.0;
};

}  // namespace pkrr
