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

#include "pkrr/hetero.hpp"

#include <cmath>

#include "pkrr/error.hpp"

namespace pkrr {

KernelSpec resolve_for_panel(const KernelSpec& spec, const PanelData& panel) {
  spec.validate(panel.dim());
  return spec.resolved() ? spec : resolve_bandwidths(spec, panel.x);
}

HeteroUnitModel::HeteroUnitModel(
    const PanelData& panel, std::size_t unit, const KernelSpec& spec,
    std::shared_ptr<const FactorProjection> projection)
    : unit_(unit), spec_(resolve_for_panel(spec, panel)) {
  if (unit >= panel.units()) {
    throw InputError("unit index " + std::to_string(unit) + " out of range");
  }
  if (!projection) {
    projection = std::make_shared<const FactorProjection>(build_z(panel));
  }
  points_ = panel.unit_points(unit);
  y_ = panel.y.row(static_cast<Eigen::Index>(unit)).transpose();
  solver_ = std::make_unique<ProfileKrr>(gram(spec_, points_),
                                         std::move(projection));
  coords_ = solver_->project(y_);
}

HeteroUnitFit HeteroUnitModel::fit(double eta) const {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw InputError("eta must be positive");
  }
  HeteroUnitFit f;
  f.unit = unit_;
  f.eta = eta;
  f.spec = spec_;
  f.points = points_;
  f.a = solver_->weights(coords_, eta);
  const Eigen::VectorXd ka = solver_->gram() * f.a;
  f.beta = solver_->projection().ols(y_ - ka);
  f.fitted = ka + solver_->projection().design() * f.beta;
  f.residuals = y_ - f.fitted;
  f.sigma_eps_sq = f.residuals.squaredNorm() / static_cast<double>(y_.size());
  f.gram_eigen = std::make_shared<const GramEigen>(eigendecompose(solver_->gram()));
  f.h_hat = effective_dim(*f.gram_eigen, eta);
  return f;
}

GcvResult HeteroUnitModel::gcv(const GcvOptions& options) const {
  const auto grid = make_eta_grid(options, solver_->grid_scale());
  return select_eta(
      [this](double eta) { return solver_->gcv_point(coords_, eta); }, grid,
      options.refine);
}

Eigen::MatrixXd HeteroUnitModel::smoother_matrix(double eta) const {
  if (!(eta > 0.0)) throw InputError("eta must be positive");
  return solver_->smoother_matrix(eta);
}

HeteroUnitFit fit_hetero_unit(const PanelData& panel, std::size_t unit,
                              const KernelSpec& spec, double eta) {
  return HeteroUnitModel(panel, unit, spec).fit(eta);
}

double predict_hetero(const HeteroUnitFit& fit, std::span<const double> x) {
  return fit.a.dot(cross_gram(fit.spec, fit.points, x));
}

Eigen::MatrixXd smoother_matrix_hetero(const PanelData& panel,
                                       std::size_t unit,
                                       const KernelSpec& spec, double eta) {
  return HeteroUnitModel(panel, unit, spec).smoother_matrix(eta);
}

GcvResult gcv_hetero(const PanelData& panel, std::size_t unit,
                     const KernelSpec& spec, const GcvOptions& options) {
  return HeteroUnitModel(panel, unit, spec).gcv(options);
}

double sigma_eps_hetero(const HeteroUnitFit& fit) {
  return fit.residuals.squaredNorm() /
         static_cast<double>(fit.residuals.size());
}

HeteroPanelFit fit_hetero_panel(const PanelData& panel, const KernelSpec& spec,
                                const EtaChoice& eta, int threads) {
  const KernelSpec resolved = resolve_for_panel(spec, panel);
  auto projection = std::make_shared<const FactorProjection>(build_z(panel));
  const auto n = static_cast<std::ptrdiff_t>(panel.units());
  const bool search = std::holds_alternative<GcvOptions>(eta);

  HeteroPanelFit out;
  out.units.resize(static_cast<std::size_t>(n));
  if (search) out.gcv.resize(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));

#pragma omp parallel for schedule(dynamic) num_threads(threads > 0 ? threads : 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    try {
      HeteroUnitModel model(panel, u, resolved, projection);
      double e = 0.0;
      if (search) {
        out.gcv[u] = model.gcv(std::get<GcvOptions>(eta));
        e = out.gcv[u].eta_hat;
      } else {
        e = std::get<double>(eta);
      }
      out.units[u] = model.fit(e);
      if (search) {
        for (const auto& w : out.gcv[u].warnings) {
          out.units[u].warnings.push_back(w);
        }
      }
    } catch (...) {
      errors[u] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace pkrr
