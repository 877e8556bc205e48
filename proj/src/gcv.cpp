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

#include "pkrr/gcv.hpp"

#include <cmath>
#include <limits>

#include "pkrr/error.hpp"

namespace pkrr {

std::vector<double> make_eta_grid(const GcvOptions& options, double scale) {
  if (!options.grid.empty()) {
    for (std::size_t k = 0; k < options.grid.size(); ++k) {
      if (!(options.grid[k] > 0.0) || !std::isfinite(options.grid[k])) {
        throw InputError("eta grid must be strictly positive");
      }
      if (k > 0 && !(options.grid[k] > options.grid[k - 1])) {
        throw InputError("eta grid must be sorted strictly ascending");
      }
    }
    return options.grid;
  }
  if (options.points < 1 || !(options.lo > 0.0) ||
      !(options.hi >= options.lo)) {
    throw InputError("invalid eta grid bounds");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) scale = 1.0;
  std::vector<double> grid(static_cast<std::size_t>(options.points));
  const double a = std::log(options.lo * scale);
  const double b = std::log(options.hi * scale);
  for (int k = 0; k < options.points; ++k) {
    const double f = options.points == 1 ? 0.0 : double(k) / (options.points - 1);
    grid[static_cast<std::size_t>(k)] = std::exp(a + f * (b - a));
  }
  return grid;
}

double gcv_score(const GcvPoint& p) {
  const double denom = 1.0 - p.trace / p.n;
  if (!(denom > 1e-9) || !std::isfinite(p.rss)) {
    return std::numeric_limits<double>::infinity();
  }
  return p.rss / (p.n * denom * denom);
}

GcvResult select_eta(const std::function<GcvPoint(double)>& evaluate,
                     const std::vector<double>& grid, bool refine) {
  if (grid.empty()) throw InputError("empty eta grid");
  GcvResult r;
  r.eta = grid;
  r.score.resize(grid.size());
  r.trace.resize(grid.size());
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const GcvPoint p = evaluate(grid[k]);
    const double s = gcv_score(p);
    r.trace[k] = p.trace;
    if (!std::isfinite(s)) {
      r.score[k] = std::numeric_limits<double>::quiet_NaN();
      ++r.skipped;
      continue;
    }
    r.score[k] = s;
    if (s < best) {
      best = s;
      r.grid_argmin = k;
      found = true;
    }
  }
  if (!found) {
    throw SelectionError(
        "GCV: every grid point has trace(B) >= n; widen the eta grid");
  }
  if (r.skipped > 0) {
    r.warnings.push_back(std::to_string(r.skipped) +
                         " GCV grid point(s) skipped (trace(B) >= n)");
  }
  r.eta_grid = grid[r.grid_argmin];
  r.eta_hat = r.eta_grid;
  r.score_hat = best;

  if (!refine || grid.size() < 2) return r;

  const std::size_t k = r.grid_argmin;
  double lo = std::log(grid[k == 0 ? 0 : k - 1]);
  double hi = std::log(grid[k + 1 < grid.size() ? k + 1 : k]);
  auto f = [&](double log_eta) { return gcv_score(evaluate(std::exp(log_eta))); };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 80 && hi - lo > 1e-7; ++it) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  const double x = fc <= fd ? c : d;
  const double fx = std::min(fc, fd);
  if (fx < r.score_hat) {
    r.eta_hat = std::exp(x);
    r.score_hat = fx;
    r.refined = true;
  }
  return r;
}

}  // namespace pkrr
