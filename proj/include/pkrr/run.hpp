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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pkrr/dgp.hpp"
#include "pkrr/gcv.hpp"
#include "pkrr/montecarlo.hpp"

namespace pkrr {

enum class Mode {
  FitHetero,
  FitHomo,
  Interval,
  SimulateMse,
  SimulateCoverage,
  Generate,  // writes one simulated panel as CSV
};

const char* to_string(Mode m);
Mode parse_mode(const std::string& s);

/// Everything one CLI invocation needs. Field names map to kebab-case keys
/// (see run_option_keys) accepted both as --flags and in a --config file.
struct RunConfig {
  Mode mode = Mode::FitHomo;
  std::string data;  // panel CSV for fit and interval modes
  std::string kernel = "gaussian";
  std::optional<double> eta;  // empty: GCV
  GcvOptions gcv;
  double level = 0.95;
  double eta_deflation = 1.0;  // intervals use eta * eta_deflation
  std::uint64_t seed = 1;
  std::size_t reps = 100;
  std::size_t nt_cap = 6000;
  int threads = 0;  // 0: all logical cores

  // fit modes: prediction grid
  std::string grid_file;  // CSV with header x1..xd
  double grid_lo = 0.0;
  double grid_hi = 1.0;
  std::size_t grid_points = 100;

  // interval mode
  std::string interval = "g";  // mean | prediction | g | beta
  std::string unit;            // label, hetero intervals
  std::vector<double> x;
  std::vector<double> f0;     // F1 row at the new period (default: last)
  std::vector<double> xbar0;  // cross-section mean at the new period
  std::string noise = "gaussian";
  std::size_t coordinate = 0;

  // simulate modes
  std::string design = "homo_beta";
  std::size_t n = 50;
  std::size_t t = 25;
  double noise_sd = 1.0;
  bool common_g = false;
  bool sqrt_innovation_scale = false;
  std::string model = "homo";
  bool center_mse = false;
  std::vector<double> x_grid;  // coverage grid; default 100 points in [0,1]

  std::string out_dir = ".";

  /// Canonical echo embedded in every artifact (sorted keys). `threads` and
  /// `out-dir` are execution metadata, reported under "meta", so payloads do
  /// not depend on them.
  nlohmann::json to_json() const;
};

struct OptionKey {
  const char* key;
  const char* help;
};

/// Every settable key, in help order.
const std::vector<OptionKey>& run_option_keys();

/// Sets one field from its textual value. Throws SpecError for an unknown
/// key and InputError for a malformed value.
void set_option(RunConfig& cfg, const std::string& key, const std::string& value);

/// Applies a flat config file: one `key = value` per line, `#` starts a
/// comment, blank lines ignored, keys as in run_option_keys (a leading `--`
/// is allowed). Later lines override earlier ones.
void apply_config_file(RunConfig& cfg, const std::string& path);

/// Consistency checks that need no data. Throws SpecError.
void validate(const RunConfig& cfg);

/// Output files a run writes, in the order they are written.
std::vector<std::string> output_paths(const RunConfig& cfg);

struct RunResult {
  int exit_code = 0;
  std::vector<std::string> written;
  nlohmann::json error;  // null on success
};

/// Runs one mode. Output files are checked for writability before any
/// computation, written to temporaries and renamed into place; on any error
/// nothing is left behind and `error` holds {"error": {kind, message,
/// exit_code, mode}}.
RunResult run(const RunConfig& cfg);

}  // namespace pkrr
