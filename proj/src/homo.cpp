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

#include "pkrr/homo.hpp"

#include <cmath>

#include "pkrr/error.hpp"
#include "pkrr/hetero.hpp"

namespace pkrr {

Eigen::MatrixXd projection_p(const Eigen::MatrixXd& z) {
  return FactorProjection(z).annihilator();
}

HomoModel::HomoModel(const PanelData& panel, const KernelSpec& spec,
                     const HomoOptions& options)
    : options_(options),
      spec_(resolve_for_panel(spec, panel)),
      units_(panel.units()),
      periods_(panel.periods()) {
  const std::size_t nt = units_ * periods_;
  if (nt > options.nt_cap) {
    throw ResourceError("pooled fit needs a dense " + std::to_string(nt) +
                        "x" + std::to_string(nt) +
                        " system, above the cap of " +
                        std::to_string(options.nt_cap) +
                        "; subsample units or periods, or raise the cap");
  }
  auto projection = std::make_shared<const FactorProjection>(build_z(panel));
  points_ = panel.x;
  y_ = panel.stacked_y();
  solver_ = std::make_unique<ProfileKrr>(gram(spec_, points_),
                                         std::move(projection));
  coords_ = solver_->project(y_);
}

HomoFit HomoModel::fit(double eta) const {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw InputError("eta must be positive");
  }
  const auto& proj = solver_->projection();
  const auto t = static_cast<Eigen::Index>(periods_);
  HomoFit f;
  f.eta = eta;
  f.spec = spec_;
  f.points = points_;
  f.units = units_;
  f.periods = periods_;
  f.columns = static_cast<std::size_t>(proj.columns());
  f.p = proj.annihilator();
  f.a = solver_->weights(coords_, eta);
  f.g_at_points = solver_->gram() * f.a;
  f.betas.resize(static_cast<Eigen::Index>(units_), proj.columns());
  f.fitted.resize(y_.size());
  double quad = 0.0;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(units_); ++i) {
    const Eigen::VectorXd r = y_.segment(i * t, t) - f.g_at_points.segment(i * t, t);
    const Eigen::VectorXd b = proj.ols(r);
    f.betas.row(i) = b.transpose();
    f.fitted.segment(i * t, t) = f.g_at_points.segment(i * t, t) + proj.design() * b;
    quad += r.dot(f.p * r);
  }
  f.sigma_eps_sq = std::max(0.0, quad) /
                   (static_cast<double>(units_) *
                    static_cast<double>(periods_ - f.columns));
  f.gram = std::make_shared<const Eigen::MatrixXd>(solver_->gram());
  if (options_.gram_eigen) {
    f.gram_eigen = std::make_shared<const GramEigen>(eigendecompose(solver_->gram()));
  }
  return f;
}

GcvResult HomoModel::gcv(const GcvOptions& options) const {
  const auto grid = make_eta_grid(options, solver_->grid_scale());
  return select_eta(
      [this](double eta) { return solver_->gcv_point(coords_, eta); }, grid,
      options.refine);
}

Eigen::MatrixXd HomoModel::smoother_matrix(double eta) const {
  if (!(eta > 0.0)) throw InputError("eta must be positive");
  return solver_->smoother_matrix(eta);
}

HomoFit fit_homo(const PanelData& panel, const KernelSpec& spec, double eta,
                 const HomoOptions& options) {
  return HomoModel(panel, spec, options).fit(eta);
}

double predict_homo(const HomoFit& fit, std::span<const double> x) {
  return fit.a.dot(cross_gram(fit.spec, fit.points, x));
}

Eigen::MatrixXd smoother_matrix_homo(const PanelData& panel,
                                     const KernelSpec& spec, double eta,
                                     const HomoOptions& options) {
  return HomoModel(panel, spec, options).smoother_matrix(eta);
}

GcvResult gcv_homo(const PanelData& panel, const KernelSpec& spec,
                   const GcvOptions& options,
                   const HomoOptions& homo_options) {
  return HomoModel(panel, spec, homo_options).gcv(options);
}

double sigma_eps_homo(const HomoFit& fit, const PanelData& panel) {
  const auto t = static_cast<Eigen::Index>(fit.periods);
  if (panel.units() != fit.units || panel.periods() != fit.periods) {
    throw InputError("panel does not match the fit");
  }
  const Eigen::VectorXd y = panel.stacked_y();
  double quad = 0.0;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(fit.units); ++i) {
    const Eigen::VectorXd r =
        y.segment(i * t, t) - fit.g_at_points.segment(i * t, t);
    quad += r.dot(fit.p * r);
  }
  return std::max(0.0, quad) / (static_cast<double>(fit.units) *
                                static_cast<double>(fit.periods - fit.columns));
}

std::shared_ptr<const GramEigen> spectrum_of(const HomoFit& fit) {
  if (fit.gram_eigen) return fit.gram_eigen;
  if (!fit.gram) throw InputError("fit carries no gram matrix");
  return std::make_shared<const GramEigen>(eigendecompose(*fit.gram));
}

}  // namespace pkrr
