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

#include "pkrr/panel.hpp"

#include <cmath>
#include <cstdio>

#include "pkrr/error.hpp"

namespace pkrr {

std::span<const double> PanelData::covariate(std::size_t i,
                                             std::size_t t) const {
  const auto r = static_cast<Eigen::Index>(i * periods() + t);
  return {x.data() + r * x.cols(), dim()};
}

PointMatrix PanelData::unit_points(std::size_t i) const {
  const auto t = static_cast<Eigen::Index>(periods());
  return x.middleRows(static_cast<Eigen::Index>(i) * t, t);
}

Eigen::VectorXd PanelData::stacked_y() const {
  Eigen::VectorXd out(y.size());
  const Eigen::Index t = y.cols();
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    out.segment(i * t, t) = y.row(i).transpose();
  }
  return out;
}

namespace {

std::string padded(const char* prefix, std::size_t k, std::size_t count) {
  int width = 1;
  for (std::size_t c = count; c >= 10; c /= 10) ++width;
  std::string digits = std::to_string(k);
  if (digits.size() < std::size_t(width)) {
    digits.insert(0, std::size_t(width) - digits.size(), '0');
  }
  return prefix + digits;
}

}  // namespace

void PanelData::validate() {
  const std::size_t n = units();
  const std::size_t t = periods();
  if (n < 1) throw InputError("panel has no units");
  if (x.rows() != static_cast<Eigen::Index>(n * t)) {
    throw InputError("covariate rows (" + std::to_string(x.rows()) +
                     ") do not equal N*T (" + std::to_string(n * t) + ")");
  }
  if (dim() < 1) throw InputError("panel has no covariates");
  if (f1.rows() != static_cast<Eigen::Index>(t) || f1.cols() < 1) {
    throw InputError("observed factor matrix must be T x q1 with q1 >= 1");
  }
  if (t < factors() + dim() + 1) {
    throw InputError("need T >= q1 + d + 1 (T=" + std::to_string(t) +
                     ", q1=" + std::to_string(factors()) +
                     ", d=" + std::to_string(dim()) + ")");
  }
  if (!y.allFinite() || !x.allFinite() || !f1.allFinite()) {
    throw InputError("panel contains non-finite values");
  }
  if ((f1.col(0).array() != 1.0).any()) {
    throw InputError("first observed factor column must be the intercept");
  }
  if (unit_labels.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      unit_labels.push_back(padded("u", i + 1, n));
    }
  }
  if (time_labels.empty()) {
    for (std::size_t s = 0; s < t; ++s) {
      time_labels.push_back(padded("t", s + 1, t));
    }
  }
  if (unit_labels.size() != n || time_labels.size() != t) {
    throw InputError("label counts do not match panel dimensions");
  }
}

Eigen::MatrixXd build_z(const PanelData& panel) {
  const auto n = static_cast<Eigen::Index>(panel.units());
  const auto t = static_cast<Eigen::Index>(panel.periods());
  const auto q = static_cast<Eigen::Index>(panel.factors());
  const auto d = static_cast<Eigen::Index>(panel.dim());
  Eigen::MatrixXd z(t, q + d);
  z.leftCols(q) = panel.f1;
  z.rightCols(d).setZero();
  for (Eigen::Index i = 0; i < n; ++i) {
    z.rightCols(d) += panel.x.middleRows(i * t, t);
  }
  z.rightCols(d) /= static_cast<double>(n);
  return z;
}

}  // namespace pkrr
