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

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace pkrr {

/// Search settings for generalized cross validation.
///
/// Unless `grid` is given explicitly, candidates are `points` log-spaced
/// values spanning [lo, hi] * scale, where the caller supplies scale =
/// trace(gram)/n. With `refine`, a golden-section search in log(eta) runs
/// inside the grid cells adjacent to the grid minimizer.
struct GcvOptions {
  double lo = 1e-6;
  double hi = 1e2;
  int points = 40;
  bool refine = true;
  std::vector<double> grid;
};

/// Ingredients of GCV(eta) = rss / (n (1 - trace/n)^2).
struct GcvPoint {
  double rss = 0.0;
  double trace = 0.0;
  double n = 0.0;
};

struct GcvResult {
  std::vector<double> eta;
  std::vector<double> score;  // NaN where the point was skipped
  std::vector<double> trace;
  std::size_t skipped = 0;
  std::size_t grid_argmin = 0;
  double eta_grid = 0.0;
  double eta_hat = 0.0;
  double score_hat = 0.0;
  bool refined = false;
  std::vector<std::string> warnings;
};

/// Candidate grid for the given options and scale. Throws InputError for a
/// non-positive or unsorted explicit grid.
std::vector<double> make_eta_grid(const GcvOptions& options, double scale);

/// GCV score; +infinity when trace >= n (inadmissible).
double gcv_score(const GcvPoint& p);

/// Minimizes GCV over the grid (ties go to the smallest eta), then
/// optionally refines. Throws SelectionError when every grid point is
/// inadmissible.
GcvResult select_eta(const std::function<GcvPoint(double)>& evaluate,
                     const std::vector<double>& grid, bool refine);

}  // namespace pkrr
