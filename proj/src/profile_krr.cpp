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

#include "pkrr/profile_krr.hpp"

#include "pkrr/error.hpp"

namespace pkrr {

ProfileKrr::ProfileKrr(Eigen::MatrixXd gram,
                       std::shared_ptr<const FactorProjection> projection)
    : gram_(std::move(gram)), projection_(std::move(projection)) {
  const Eigen::Index t = projection_->periods();
  if (gram_.rows() != gram_.cols() || gram_.rows() % t != 0) {
    throw InputError("gram size is not a multiple of the number of periods");
  }
  blocks_ = gram_.rows() / t;
  Eigen::MatrixXd m = gram_;
  projection_->sandwich_blocks(m);
  m = 0.5 * (m + m.transpose()).eval();
  SymmetricEigen es = symmetric_eigen(m);
  lambda_ = es.values.cwiseMax(0.0);
  vectors_ = std::move(es.vectors);
}

Eigen::VectorXd ProfileKrr::project(
    const Eigen::Ref<const Eigen::VectorXd>& y) const {
  if (y.size() != size()) throw InputError("response length mismatch");
  return vectors_.transpose() * projection_->annihilate_blocks(y);
}

Eigen::VectorXd ProfileKrr::weights(
    const Eigen::Ref<const Eigen::VectorXd>& coords, double eta) const {
  const double shift = static_cast<double>(size()) * eta;
  Eigen::VectorXd c = coords.array() / (lambda_.array() + shift);
  return vectors_ * c;
}

Eigen::VectorXd ProfileKrr::fitted(
    const Eigen::Ref<const Eigen::VectorXd>& y,
    const Eigen::Ref<const Eigen::VectorXd>& a) const {
  const Eigen::VectorXd ka = gram_ * a;
  const Eigen::VectorXd resid = y - ka;
  return ka + resid - projection_->annihilate_blocks(resid);
}

double ProfileKrr::smoother_trace(double eta) const {
  const double shift = static_cast<double>(size()) * eta;
  const double fixed =
      static_cast<double>(blocks_ * projection_->columns());
  return fixed + (lambda_.array() / (lambda_.array() + shift)).sum();
}

double ProfileKrr::residual_ss(
    const Eigen::Ref<const Eigen::VectorXd>& coords, double eta) const {
  const double shift = static_cast<double>(size()) * eta;
  return (shift * coords.array() / (lambda_.array() + shift))
      .square()
      .sum();
}

GcvPoint ProfileKrr::gcv_point(
    const Eigen::Ref<const Eigen::VectorXd>& coords, double eta) const {
  return {residual_ss(coords, eta), smoother_trace(eta),
          static_cast<double>(size())};
}

Eigen::MatrixXd ProfileKrr::smoother_matrix(double eta) const {
  const double shift = static_cast<double>(size()) * eta;
  const Eigen::VectorXd w = lambda_.array() / (lambda_.array() + shift);
  // V diag(w) V' P_N; P_N is symmetric so right-multiplying by it is the
  // blockwise projection of the rows of its transpose.
  Eigen::MatrixXd vw = vectors_ * w.asDiagonal();
  Eigen::MatrixXd s = vw * vectors_.transpose();
  const Eigen::Index t = projection_->periods();
  const Eigen::MatrixXd& p = projection_->annihilator();
  Eigen::MatrixXd b(size(), size());
  for (Eigen::Index j = 0; j < blocks_; ++j) {
    b.middleCols(j * t, t).noalias() = s.middleCols(j * t, t) * p;
  }
  const Eigen::MatrixXd h = projection_->hat();
  for (Eigen::Index j = 0; j < blocks_; ++j) {
    b.block(j * t, j * t, t, t) += h;
  }
  return b;
}

double ProfileKrr::grid_scale() const {
  return gram_.trace() / static_cast<double>(size());
}

}  // namespace pkrr
