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

#include "pkrr/spectral.hpp"

#include <cmath>
#include <string>

#include "pkrr/error.hpp"
#include "pkrr/linalg.hpp"

namespace pkrr {

namespace {

void check_eta(double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw InputError("regularization parameter eta must be positive");
  }
}

}  // namespace

GramEigen eigendecompose(Eigen::MatrixXd gram) {
  if (gram.rows() != gram.cols() || gram.rows() == 0) {
    throw InputError("eigendecompose needs a nonempty square matrix");
  }
  const double scale = std::max(gram.cwiseAbs().maxCoeff(), 1e-300);
  const double asym = (gram - gram.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    throw InputError("gram matrix is not symmetric (max asymmetry " +
                     std::to_string(asym) + ")");
  }
  gram = 0.5 * (gram + gram.transpose()).eval();

  const Eigen::Index n = gram.rows();
  SymmetricEigen es = symmetric_eigen(gram / static_cast<double>(n));

  GramEigen ge;
  ge.n = static_cast<std::size_t>(n);
  ge.eigvals = es.values.reverse();
  ge.eigvecs = es.vectors.rowwise().reverse();
  ge.eigvals = ge.eigvals.cwiseMax(0.0);
  const double cutoff = kEigenRelativeCutoff * ge.eigvals(0);
  for (Eigen::Index v = 0; v < n; ++v) {
    if (ge.eigvals(v) > cutoff && ge.eigvals(v) > 0.0) ++ge.rank;
  }
  ge.gram = std::move(gram);
  return ge;
}

double effective_dim(const GramEigen& ge, double eta) {
  check_eta(eta);
  double h = 0.0;
  for (std::size_t v = 0; v < ge.rank; ++v) {
    const double mu = ge.eigvals(static_cast<Eigen::Index>(v));
    h += mu / (mu + eta);
  }
  return h;
}

Eigen::VectorXd nystrom_phi_all(const GramEigen& ge, const KernelSpec& spec,
                                const PointMatrix& points,
                                std::span<const double> x) {
  const Eigen::Index r = static_cast<Eigen::Index>(ge.rank);
  const Eigen::VectorXd k = cross_gram(spec, points, x);
  const double sqrt_n = std::sqrt(static_cast<double>(ge.n));
  Eigen::VectorXd phi = ge.eigvecs.leftCols(r).transpose() * k;
  for (Eigen::Index v = 0; v < r; ++v) phi(v) /= sqrt_n * ge.eigvals(v);
  return phi;
}

double nystrom_phi(const GramEigen& ge, const KernelSpec& spec,
                   const PointMatrix& points, std::size_t nu,
                   std::span<const double> x) {
  if (nu >= ge.n) throw InputError("eigenfunction index out of range");
  if (nu >= ge.rank) {
    throw NumericError("eigenvalue " + std::to_string(nu) +
                       " is numerically zero; eigenfunction undefined");
  }
  const Eigen::VectorXd k = cross_gram(spec, points, x);
  const double dot =
      ge.eigvecs.col(static_cast<Eigen::Index>(nu)).dot(k);
  return dot / (std::sqrt(static_cast<double>(ge.n)) *
                ge.eigvals(static_cast<Eigen::Index>(nu)));
}

double regularized_kernel_value(const GramEigen& ge, const KernelSpec& spec,
                                const PointMatrix& points, double eta,
                                std::span<const double> x0) {
  check_eta(eta);
  if (ge.rank == 0) return 0.0;
  const Eigen::VectorXd phi = nystrom_phi_all(ge, spec, points, x0);
  double s = 0.0;
  for (Eigen::Index v = 0; v < phi.size(); ++v) {
    const double w = 1.0 + eta / ge.eigvals(v);
    s += phi(v) * phi(v) / (w * w);
  }
  return s;
}

Eigen::VectorXd regularized_kernel_column(const GramEigen& ge,
                                          const KernelSpec& spec,
                                          const PointMatrix& points,
                                          double eta,
                                          std::span<const double> x0) {
  check_eta(eta);
  const Eigen::Index r = static_cast<Eigen::Index>(ge.rank);
  if (r == 0) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ge.n));
  Eigen::VectorXd phi = nystrom_phi_all(ge, spec, points, x0);
  const double sqrt_n = std::sqrt(static_cast<double>(ge.n));
  for (Eigen::Index v = 0; v < r; ++v) {
    phi(v) *= sqrt_n / (1.0 + eta / ge.eigvals(v));
  }
  return ge.eigvecs.leftCols(r) * phi;
}

}  // namespace pkrr
