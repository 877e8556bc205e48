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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pkrr {

/// Row-major point cloud: one sample per row, so each row is a contiguous
/// span.
using PointMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// k(x, y) = x'y. Used for the linear block of partially linear designs.
struct LinearKernel {
  friend bool operator==(const LinearKernel&, const LinearKernel&) = default;
};

/// k(x, y) = (1 + x'y)^(order - 1). A polynomial kernel of this order has
/// rank `order` in one dimension: order 1 is the constant kernel, order 2 is
/// affine.
struct PolynomialKernel {
  int order = 2;

  friend bool operator==(const PolynomialKernel&,
                         const PolynomialKernel&) = default;
};

/// k(x, y) = exp(-|x - y|^2 / b^2). An unset bandwidth is filled in from the
/// data by the median pairwise-distance heuristic (see resolve_bandwidths).
struct GaussianKernel {
  std::optional<double> bandwidth;

  friend bool operator==(const GaussianKernel&,
                         const GaussianKernel&) = default;
};

struct AdditiveComponent;

/// Sum of sub-kernels, each acting on a disjoint block of input coordinates.
struct AdditiveKernel {
  std::vector<AdditiveComponent> components;

  friend bool operator==(const AdditiveKernel&, const AdditiveKernel&);
};

class KernelSpec {
 public:
  using Variant =
      std::variant<LinearKernel, PolynomialKernel, GaussianKernel,
                   AdditiveKernel>;

  KernelSpec() : v_(GaussianKernel{1.0}) {}
  KernelSpec(LinearKernel k) : v_(k) {}
  KernelSpec(PolynomialKernel k);
  KernelSpec(GaussianKernel k);
  KernelSpec(AdditiveKernel k);

  static KernelSpec linear() { return LinearKernel{}; }
  static KernelSpec polynomial(int order) { return PolynomialKernel{order}; }
  static KernelSpec gaussian(std::optional<double> b = std::nullopt) {
    return GaussianKernel{b};
  }

  const Variant& variant() const { return v_; }

  bool is_additive() const {
    return std::holds_alternative<AdditiveKernel>(v_);
  }

  /// True when every Gaussian bandwidth (recursively) is set.
  bool resolved() const;

  /// Throws SpecError unless the spec can be evaluated on `dim`-dimensional
  /// inputs: additive index sets must be nonempty, disjoint, in range, and
  /// cover 0..dim-1.
  void validate(std::size_t dim) const;

  friend bool operator==(const KernelSpec&, const KernelSpec&);

 private:
  Variant v_;
};

struct AdditiveComponent {
  std::vector<std::size_t> dims;
  KernelSpec kernel;

  friend bool operator==(const AdditiveComponent&,
                         const AdditiveComponent&) = default;
};

/// Kernel value k(x, y). Throws InputError on dimension mismatch and
/// SpecError for invalid or unresolved specs.
double eval_kernel(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> y);

/// n x n Gram matrix over the rows of `points`.
Eigen::MatrixXd gram(const KernelSpec& spec, const PointMatrix& points);

/// Vector (k(points_1, x), ..., k(points_n, x)).
Eigen::VectorXd cross_gram(const KernelSpec& spec, const PointMatrix& points,
                           std::span<const double> x);

/// Rows x cols matrix of k(rows_s, cols_t).
Eigen::MatrixXd cross_gram(const KernelSpec& spec, const PointMatrix& rows,
                           const PointMatrix& cols);

/// Median pairwise Euclidean distance of the rows. At most `max_points`
/// evenly strided rows are used. Returns 1 when the median is zero.
double median_pairwise_distance(const PointMatrix& points,
                                std::size_t max_points = 1000);

/// Copy of `spec` with every unset Gaussian bandwidth replaced by the median
/// heuristic computed on the coordinates that kernel sees.
KernelSpec resolve_bandwidths(const KernelSpec& spec,
                              const PointMatrix& points);

/// Parses the textual kernel grammar:
///
///   spec      := "linear"
///              | "poly" "(" ["k" "="] INT ")"
///              | "gaussian" [ "(" ["b" "="] REAL ")" ]
///              | "add" "(" component { "," component } ")"
///   component := "[" INT { "," INT } "]" ":" spec
///
/// "polynomial" is accepted for "poly" and "gauss" for "gaussian".
/// Whitespace is ignored. Throws SpecError with the offending position.
KernelSpec parse_kernel_spec(std::string_view text);

/// Canonical text form; parse_kernel_spec(to_string(s)) == s.
std::string to_string(const KernelSpec& spec);

}  // namespace pkrr
