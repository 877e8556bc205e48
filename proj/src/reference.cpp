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

#include "pkrr/reference.hpp"

#include <cmath>
#include <limits>

#include "pkrr/error.hpp"
#include "pkrr/hetero.hpp"

namespace pkrr::reference {

namespace {

// I - Z (Z'Z)^{-1} Z' through the normal equations.
Eigen::MatrixXd annihilator(const Eigen::MatrixXd& z) {
  const Eigen::MatrixXd ztz = z.transpose() * z;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(ztz);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-14) {
    throw InputError("Z'Z is singular");
  }
  const Eigen::Index t = z.rows();
  return Eigen::MatrixXd::Identity(t, t) - z * ldlt.solve(z.transpose());
}

Eigen::MatrixXd kron_identity(const Eigen::MatrixXd& block, Eigen::Index n) {
  const Eigen::Index t = block.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n * t, n * t);
  for (Eigen::Index i = 0; i < n; ++i) out.block(i * t, i * t, t, t) = block;
  return out;
}

// LU of the system matrix with the jitter fallback.
Eigen::PartialPivLU<Eigen::MatrixXd> factorize(Eigen::MatrixXd system,
                                               double jitter,
                                               std::vector<std::string>& warnings) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  if (lu.rcond() > 1e-15) return lu;
  system.diagonal().array() += jitter;
  lu.compute(system);
  if (lu.rcond() > 1e-15) {
    warnings.push_back("system matrix near-singular; added ridge jitter " +
                       std::to_string(jitter));
    return lu;
  }
  throw NumericError(
      "kernel ridge system is numerically singular; try a larger eta");
}

}  // namespace

DirectHetero fit_hetero(const PanelData& panel, std::size_t unit,
                        const KernelSpec& spec, double eta) {
  const KernelSpec k = resolve_for_panel(spec, panel);
  const Eigen::MatrixXd z = build_z(panel);
  const Eigen::MatrixXd m = annihilator(z);
  const Eigen::MatrixXd g = gram(k, panel.unit_points(unit));
  const Eigen::Index t = g.rows();
  const Eigen::VectorXd y = panel.y.row(static_cast<Eigen::Index>(unit)).transpose();
  DirectHetero out;
  Eigen::MatrixXd system = m * g;
  system.diagonal().array() += static_cast<double>(t) * eta;
  auto lu = factorize(system, 1e-10 * g.trace() / static_cast<double>(t),
                      out.warnings);
  out.a = lu.solve(m * y);
  out.beta = (z.transpose() * z).ldlt().solve(z.transpose() * (y - g * out.a));
  return out;
}

Eigen::MatrixXd smoother_hetero(const PanelData& panel, std::size_t unit,
                                const KernelSpec& spec, double eta) {
  const KernelSpec k = resolve_for_panel(spec, panel);
  const Eigen::MatrixXd z = build_z(panel);
  const Eigen::MatrixXd m = annihilator(z);
  const Eigen::MatrixXd g = gram(k, panel.unit_points(unit));
  const Eigen::Index t = g.rows();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(t, t);
  std::vector<std::string> warnings;
  Eigen::MatrixXd system = m * g + static_cast<double>(t) * eta * id;
  auto lu = factorize(system, 1e-10 * g.trace() / static_cast<double>(t),
                      warnings);
  const Eigen::MatrixXd ks = g * lu.solve(m);
  return ks + (id - m) * (id - ks);
}

DirectHomo fit_homo(const PanelData& panel, const KernelSpec& spec,
                    double eta) {
  const KernelSpec k = resolve_for_panel(spec, panel);
  const Eigen::MatrixXd z = build_z(panel);
  const Eigen::MatrixXd p = annihilator(z);
  const auto n = static_cast<Eigen::Index>(panel.units());
  const Eigen::MatrixXd pn = kron_identity(p, n);
  const Eigen::MatrixXd g = gram(k, panel.x);
  const Eigen::Index nt = g.rows();
  const Eigen::VectorXd y = panel.stacked_y();
  DirectHomo out;
  Eigen::MatrixXd system = pn * g;
  system.diagonal().array() += static_cast<double>(nt) * eta;
  auto lu = factorize(system, 1e-10 * g.trace() / static_cast<double>(nt),
                      out.warnings);
  out.a = lu.solve(pn * y);
  const Eigen::VectorXd r = y - g * out.a;
  const Eigen::Index t = z.rows();
  out.betas.resize(n, z.cols());
  const Eigen::MatrixXd ztz = z.transpose() * z;
  for (Eigen::Index i = 0; i < n; ++i) {
    out.betas.row(i) =
        ztz.ldlt().solve(z.transpose() * r.segment(i * t, t)).transpose();
  }
  return out;
}

Eigen::MatrixXd smoother_homo(const PanelData& panel, const KernelSpec& spec,
                              double eta) {
  const KernelSpec k = resolve_for_panel(spec, panel);
  const Eigen::MatrixXd z = build_z(panel);
  const Eigen::MatrixXd p = annihilator(z);
  const auto n = static_cast<Eigen::Index>(panel.units());
  const Eigen::MatrixXd pn = kron_identity(p, n);
  const Eigen::MatrixXd g = gram(k, panel.x);
  const Eigen::Index nt = g.rows();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(nt, nt);
  std::vector<std::string> warnings;
  Eigen::MatrixXd system = pn * g + static_cast<double>(nt) * eta * id;
  auto lu = factorize(system, 1e-10 * g.trace() / static_cast<double>(nt),
                      warnings);
  const Eigen::MatrixXd ks = g * lu.solve(pn);
  const Eigen::MatrixXd q = id - pn;
  return ks + q * (id - ks);
}

GcvPoint gcv_point(const Eigen::MatrixXd& smoother, const Eigen::VectorXd& y) {
  const Eigen::VectorXd resid = y - smoother * y;
  return {resid.squaredNorm(), smoother.trace(),
          static_cast<double>(y.size())};
}

GcvResult gcv_hetero(const PanelData& panel, std::size_t unit,
                     const KernelSpec& spec, const std::vector<double>& grid) {
  const Eigen::VectorXd y = panel.y.row(static_cast<Eigen::Index>(unit)).transpose();
  return select_eta(
      [&](double eta) {
        return gcv_point(smoother_hetero(panel, unit, spec, eta), y);
      },
      grid, false);
}

GcvResult gcv_homo(const PanelData& panel, const KernelSpec& spec,
                   const std::vector<double>& grid) {
  const Eigen::VectorXd y = panel.stacked_y();
  return select_eta(
      [&](double eta) { return gcv_point(smoother_homo(panel, spec, eta), y); },
      grid, false);
}

}  // namespace pkrr::reference
