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

#include "pkrr/linalg.hpp"

#include <lapacke.h>

#include <mutex>

#include <sstream>
#include <string>

#include "pkrr/error.hpp"

namespace pkrr {

namespace {

SymmetricEigen lapack_eigen(const Eigen::MatrixXd& a) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors = a;
  if (n == 0) return out;
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, out.vectors.data(), n,
                     out.values.data());
  if (info != 0) {
    std::ostringstream msg;
    msg << "symmetric eigensolver failed (info=" << info << ") on " << n
        << "x" << n << " matrix; max |entry| = " << a.cwiseAbs().maxCoeff()
        << ", diagonal range [" << a.diagonal().minCoeff() << ", "
        << a.diagonal().maxCoeff() << "]";
    throw NumericError(msg.str());
  }
  return out;
}

bool lapack_trusted() {
  static bool trusted = true;
  static std::once_flag once;
  std::call_once(once, [] {
    const Eigen::Index n = 160;
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        a(i, j) = std::exp(-0.01 * double((i - j) * (i - j))) +
                  (i == j ? 1e-3 * double(i) : 0.0);
      }
    }
    try {
      const SymmetricEigen e = lapack_eigen(a);
      const double orth =
          (e.vectors.transpose() * e.vectors -
           Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
      const double recon =
          (e.vectors * e.values.asDiagonal() * e.vectors.transpose() - a)
              .cwiseAbs()
              .maxCoeff();
      trusted = orth < 1e-8 && recon < 1e-8;
    } catch (const NumericError&) {
      trusted = false;
    }
  });
  return trusted;
}

}  // namespace

const char* eigen_backend() { return lapack_trusted() ? "lapack" : "eigen"; }

SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) {
    throw InputError("symmetric_eigen needs a square matrix");
  }
  if (lapack_trusted()) return lapack_eigen(a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) {
    throw NumericError("symmetric eigensolver did not converge on " +
                       std::to_string(a.rows()) + "x" +
                       std::to_string(a.rows()) + " matrix");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

FactorProjection::FactorProjection(Eigen::MatrixXd z) : z_(std::move(z)) {
  const Eigen::Index t = z_.rows();
  const Eigen::Index p = z_.cols();
  if (p == 0 || t <= p) {
    throw InputError("factor design needs more periods than columns (T=" +
                     std::to_string(t) + ", columns=" + std::to_string(p) +
                     ")");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(z_);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(p - 1);
  qr_.compute(z_);
  if (!(smax > 0.0) || smin <= 1e-10 * smax) {
    qr_.setThreshold(1e-10);
    std::ostringstream msg;
    msg << "factor design Z is rank deficient (rank " << qr_.rank() << " of "
        << p << "); dependent columns:";
    const auto& perm = qr_.colsPermutation().indices();
    for (Eigen::Index k = qr_.rank(); k < p; ++k) msg << ' ' << perm(k);
    throw InputError(msg.str());
  }
  condition_ = (smax / smin) * (smax / smin);
  q_ = qr_.householderQ() * Eigen::MatrixXd::Identity(t, p);
  p_ = Eigen::MatrixXd::Identity(t, t) - q_ * q_.transpose();
  p_ = 0.5 * (p_ + p_.transpose()).eval();
}

Eigen::MatrixXd FactorProjection::hat() const {
  return Eigen::MatrixXd::Identity(periods(), periods()) - p_;
}

Eigen::VectorXd FactorProjection::ols(
    const Eigen::Ref<const Eigen::VectorXd>& r) const {
  if (r.size() != periods()) {
    throw InputError("ols: response length does not match design rows");
  }
  return qr_.solve(r);
}

Eigen::VectorXd FactorProjection::annihilate_blocks(
    const Eigen::Ref<const Eigen::VectorXd>& v) const {
  const Eigen::Index t = periods();
  if (v.size() % t != 0) {
    throw InputError("stacked vector length is not a multiple of T");
  }
  Eigen::VectorXd out(v.size());
  for (Eigen::Index b = 0; b < v.size() / t; ++b) {
    out.segment(b * t, t).noalias() = p_ * v.segment(b * t, t);
  }
  return out;
}

void FactorProjection::sandwich_blocks(Eigen::MatrixXd& m) const {
  const Eigen::Index t = periods();
  if (m.rows() != m.cols() || m.rows() % t != 0) {
    throw InputError("sandwich_blocks: matrix is not NT x NT");
  }
  const Eigen::Index blocks = m.rows() / t;
  Eigen::MatrixXd tmp;
  for (Eigen::Index b = 0; b < blocks; ++b) {
    tmp.noalias() = p_ * m.middleRows(b * t, t);
    m.middleRows(b * t, t) = tmp;
  }
  for (Eigen::Index b = 0; b < blocks; ++b) {
    tmp.noalias() = m.middleCols(b * t, t) * p_;
    m.middleCols(b * t, t) = tmp;
  }
}

}  // namespace pkrr
