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

#include "pkrr/kernel.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "pkrr/error.hpp"

namespace pkrr {

KernelSpec::KernelSpec(PolynomialKernel k) : v_(k) {
  if (k.order < 1) {
    throw SpecError("polynomial order must be >= 1, got " +
                    std::to_string(k.order));
  }
}

KernelSpec::KernelSpec(GaussianKernel k) : v_(k) {
  if (k.bandwidth && !(*k.bandwidth > 0.0 && std::isfinite(*k.bandwidth))) {
    throw SpecError("gaussian bandwidth must be positive and finite");
  }
}

KernelSpec::KernelSpec(AdditiveKernel k) : v_(std::move(k)) {
  const auto& comps = std::get<AdditiveKernel>(v_).components;
  if (comps.empty()) throw SpecError("additive kernel has no components");
  for (const auto& c : comps) {
    if (c.dims.empty()) {
      throw SpecError("additive component with empty index set");
    }
  }
}

bool operator==(const AdditiveKernel& a, const AdditiveKernel& b) {
  return a.components == b.components;
}

bool operator==(const KernelSpec& a, const KernelSpec& b) {
  return a.v_ == b.v_;
}

bool KernelSpec::resolved() const {
  if (const auto* g = std::get_if<GaussianKernel>(&v_)) {
    return g->bandwidth.has_value();
  }
  if (const auto* add = std::get_if<AdditiveKernel>(&v_)) {
    return std::all_of(add->components.begin(), add->components.end(),
                       [](const auto& c) { return c.kernel.resolved(); });
  }
  return true;
}

void KernelSpec::validate(std::size_t dim) const {
  const auto* add = std::get_if<AdditiveKernel>(&v_);
  if (add == nullptr) return;
  std::vector<int> seen(dim, 0);
  for (const auto& c : add->components) {
    for (std::size_t j : c.dims) {
      if (j >= dim) {
        throw SpecError("additive index " + std::to_string(j) +
                        " out of range for input dimension " +
                        std::to_string(dim));
      }
      if (seen[j]++) {
        throw SpecError("additive index " + std::to_string(j) +
                        " appears in more than one component");
      }
    }
    c.kernel.validate(c.dims.size());
  }
  for (std::size_t j = 0; j < dim; ++j) {
    if (!seen[j]) {
      throw SpecError("additive components do not cover input coordinate " +
                      std::to_string(j));
    }
  }
}

namespace {

constexpr std::size_t kMaxInlineDim = 64;

double eval_unchecked(const KernelSpec& spec, std::span<const double> x,
                      std::span<const double> y);

struct Evaluator {
  std::span<const double> x;
  std::span<const double> y;

  double operator()(const LinearKernel&) const {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += x[j] * y[j];
    return s;
  }

  double operator()(const PolynomialKernel& k) const {
    double s = 1.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += x[j] * y[j];
    double out = 1.0;
    for (int p = 1; p < k.order; ++p) out *= s;
    return out;
  }

  double operator()(const GaussianKernel& k) const {
    if (!k.bandwidth) {
      throw SpecError(
          "gaussian bandwidth unresolved; resolve it against data first");
    }
    double d2 = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double d = x[j] - y[j];
      d2 += d * d;
    }
    const double b = *k.bandwidth;
    return std::exp(-d2 / (b * b));
  }

  double operator()(const AdditiveKernel& k) const {
    double s = 0.0;
    std::array<double, kMaxInlineDim> px{};
    std::array<double, kMaxInlineDim> py{};
    std::vector<double> hx, hy;
    for (const auto& c : k.components) {
      const std::size_t m = c.dims.size();
      double* bx = px.data();
      double* by = py.data();
      if (m > kMaxInlineDim) {
        hx.resize(m);
        hy.resize(m);
        bx = hx.data();
        by = hy.data();
      }
      for (std::size_t j = 0; j < m; ++j) {
        bx[j] = x[c.dims[j]];
        by[j] = y[c.dims[j]];
      }
      s += eval_unchecked(c.kernel, {bx, m}, {by, m});
    }
    return s;
  }
};

double eval_unchecked(const KernelSpec& spec, std::span<const double> x,
                      std::span<const double> y) {
  return std::visit(Evaluator{x, y}, spec.variant());
}

void check_ready(const KernelSpec& spec, std::size_t dim) {
  spec.validate(dim);
  if (!spec.resolved()) {
    throw SpecError(
        "gaussian bandwidth unresolved; resolve it against data first");
  }
}

std::span<const double> row(const PointMatrix& m, Eigen::Index r) {
  return {m.data() + r * m.cols(), static_cast<std::size_t>(m.cols())};
}

}  // namespace

double eval_kernel(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> y) {
  if (x.size() != y.size()) {
    throw InputError("kernel arguments have different dimensions (" +
                     std::to_string(x.size()) + " vs " +
                     std::to_string(y.size()) + ")");
  }
  check_ready(spec, x.size());
  return eval_unchecked(spec, x, y);
}

Eigen::MatrixXd gram(const KernelSpec& spec, const PointMatrix& points) {
  const Eigen::Index n = points.rows();
  if (n < 1) throw InputError("gram matrix needs at least one point");
  check_ready(spec, static_cast<std::size_t>(points.cols()));
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto xt = row(points, t);
    for (Eigen::Index s = t; s < n; ++s) {
      g(s, t) = eval_unchecked(spec, row(points, s), xt);
    }
  }
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return g;
}

Eigen::VectorXd cross_gram(const KernelSpec& spec, const PointMatrix& points,
                           std::span<const double> x) {
  if (static_cast<Eigen::Index>(x.size()) != points.cols()) {
    throw InputError("evaluation point has dimension " +
                     std::to_string(x.size()) + ", model expects " +
                     std::to_string(points.cols()));
  }
  check_ready(spec, x.size());
  Eigen::VectorXd k(points.rows());
  for (Eigen::Index t = 0; t < points.rows(); ++t) {
    k(t) = eval_unchecked(spec, row(points, t), x);
  }
  return k;
}

Eigen::MatrixXd cross_gram(const KernelSpec& spec, const PointMatrix& rows,
                           const PointMatrix& cols) {
  if (rows.cols() != cols.cols()) {
    throw InputError("cross gram between point sets of different dimension");
  }
  check_ready(spec, static_cast<std::size_t>(rows.cols()));
  Eigen::MatrixXd k(rows.rows(), cols.rows());
  for (Eigen::Index t = 0; t < cols.rows(); ++t) {
    const auto xt = row(cols, t);
    for (Eigen::Index s = 0; s < rows.rows(); ++s) {
      k(s, t) = eval_unchecked(spec, row(rows, s), xt);
    }
  }
  return k;
}

double median_pairwise_distance(const PointMatrix& points,
                                std::size_t max_points) {
  const std::size_t n = static_cast<std::size_t>(points.rows());
  if (n < 2) return 1.0;
  const std::size_t m = std::min(n, std::max<std::size_t>(max_points, 2));
  std::vector<Eigen::Index> idx(m);
  for (std::size_t k = 0; k < m; ++k) {
    idx[k] = static_cast<Eigen::Index>(k * n / m);
  }
  std::vector<double> d;
  d.reserve(m * (m - 1) / 2);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      d.push_back((points.row(idx[a]) - points.row(idx[b])).norm());
    }
  }
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  double med = *mid;
  if (d.size() % 2 == 0) {
    med = 0.5 * (med + *std::max_element(d.begin(), mid));
  }
  return med > 0.0 ? med : 1.0;
}

KernelSpec resolve_bandwidths(const KernelSpec& spec,
                              const PointMatrix& points) {
  if (const auto* g = std::get_if<GaussianKernel>(&spec.variant())) {
    if (g->bandwidth) return spec;
    return GaussianKernel{median_pairwise_distance(points)};
  }
  if (const auto* add = std::get_if<AdditiveKernel>(&spec.variant())) {
    spec.validate(static_cast<std::size_t>(points.cols()));
    AdditiveKernel out;
    for (const auto& c : add->components) {
      PointMatrix sub(points.rows(), static_cast<Eigen::Index>(c.dims.size()));
      for (std::size_t j = 0; j < c.dims.size(); ++j) {
        sub.col(static_cast<Eigen::Index>(j)) =
            points.col(static_cast<Eigen::Index>(c.dims[j]));
      }
      out.components.push_back({c.dims, resolve_bandwidths(c.kernel, sub)});
    }
    return out;
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Text grammar

namespace {

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  KernelSpec parse() {
    KernelSpec k = spec();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing characters");
    return k;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw SpecError("kernel spec parse error at position " +
                    std::to_string(pos_) + ": " + what + " in '" +
                    std::string(s_) + "'");
  }

  void skip_ws() {
    while (pos_ < s_.size() &&
           std::isspace(static_cast<unsigned char>(s_[pos_]))) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  std::string ident() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalpha(static_cast<unsigned char>(s_[pos_])) ||
            s_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_) fail("expected kernel name");
    std::string out(s_.substr(start, pos_ - start));
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
  }

  double number() {
    skip_ws();
    double v = 0.0;
    const char* first = s_.data() + pos_;
    const char* last = s_.data() + s_.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr == first) fail("expected a number");
    pos_ += static_cast<std::size_t>(ptr - first);
    return v;
  }

  long integer() {
    const double v = number();
    if (v != std::floor(v)) fail("expected an integer");
    return static_cast<long>(v);
  }

  // Optional "key =" prefix inside an argument list.
  void optional_key(const char* key) {
    skip_ws();
    const std::size_t save = pos_;
    const std::size_t len = std::char_traits<char>::length(key);
    if (s_.substr(pos_, len) == key) {
      pos_ += len;
      if (accept('=')) return;
    }
    pos_ = save;
  }

  KernelSpec spec() {
    const std::string name = ident();
    if (name == "linear") {
      if (accept('(')) expect(')');
      return KernelSpec::linear();
    }
    if (name == "poly" || name == "polynomial") {
      expect('(');
      optional_key("k");
      const long k = integer();
      expect(')');
      if (k < 1) fail("polynomial order must be >= 1");
      return KernelSpec::polynomial(static_cast<int>(k));
    }
    if (name == "gaussian" || name == "gauss") {
      if (!accept('(')) return KernelSpec::gaussian();
      if (accept(')')) return KernelSpec::gaussian();
      optional_key("b");
      const double b = number();
      expect(')');
      if (!(b > 0.0)) fail("gaussian bandwidth must be positive");
      return KernelSpec::gaussian(b);
    }
    if (name == "add" || name == "additive") {
      expect('(');
      AdditiveKernel add;
      do {
        AdditiveComponent c;
        expect('[');
        do {
          const long j = integer();
          if (j < 0) fail("negative coordinate index");
          c.dims.push_back(static_cast<std::size_t>(j));
        } while (accept(','));
        expect(']');
        expect(':');
        c.kernel = spec();
        add.components.push_back(std::move(c));
      } while (accept(','));
      expect(')');
      return add;
    }
    fail("unknown kernel '" + name + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace

KernelSpec parse_kernel_spec(std::string_view text) {
  return Parser(text).parse();
}

std::string to_string(const KernelSpec& spec) {
  struct Printer {
    std::string operator()(const LinearKernel&) const { return "linear"; }
    std::string operator()(const PolynomialKernel& k) const {
      return "poly(k=" + std::to_string(k.order) + ")";
    }
    std::string operator()(const GaussianKernel& k) const {
      if (!k.bandwidth) return "gaussian";
      return "gaussian(b=" + format_double(*k.bandwidth) + ")";
    }
    std::string operator()(const AdditiveKernel& k) const {
      std::string out = "add(";
      for (std::size_t c = 0; c < k.components.size(); ++c) {
        if (c) out += ", ";
        out += '[';
        const auto& dims = k.components[c].dims;
        for (std::size_t j = 0; j < dims.size(); ++j) {
          if (j) out += ',';
          out += std::to_string(dims[j]);
        }
        out += "]:" + to_string(k.components[c].kernel);
      }
      return out + ")";
    }
  };
  return std::visit(Printer{}, spec.variant());
}

}  // namespace pkrr
