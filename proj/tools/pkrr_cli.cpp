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

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "pkrr/error.hpp"
#include "pkrr/run.hpp"
#include "pkrr/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Kernel ridge regression for panels with interactive fixed effects"};
  app.set_version_flag("--version", std::string(pkrr::kVersion));
  std::string mode;
  std::string config_file;
  app.add_option("mode", mode,
                 "fit-hetero | fit-homo | interval | simulate-mse | simulate-coverage | generate")
      ->required();
  app.add_option("--config", config_file,
                 "flat 'key = value' file; its entries override flags");
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option*>> opts;
  for (const auto& k : pkrr::run_option_keys()) {
    opts.emplace_back(k.key, app.add_option(std::string("--") + k.key,
                                            values[k.key], k.help));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : pkrr::exit_code(pkrr::ErrorKind::Spec);
  }

  pkrr::RunConfig cfg;
  try {
    pkrr::set_option(cfg, "mode", mode);
    for (const auto& [key, opt] : opts) {
      if (opt->count() > 0) pkrr::set_option(cfg, key, values[key]);
    }
    if (!config_file.empty()) pkrr::apply_config_file(cfg, config_file);
  } catch (const pkrr::Error& e) {
    const nlohmann::json err = {{"error",
                                 {{"kind", pkrr::to_string(e.kind())},
                                  {"message", e.what()},
                                  {"exit_code", pkrr::exit_code(e.kind())},
                                  {"mode", mode},
                                  {"version", pkrr::kVersion}}}};
    std::cerr << err.dump(2) << '\n';
    return pkrr::exit_code(e.kind());
  }

  const pkrr::RunResult r = pkrr::run(cfg);
  if (r.exit_code != 0) {
    std::cerr << r.error.dump(2) << '\n';
    return r.exit_code;
  }
  for (const auto& p : r.written) std::cout << p << '\n';
  return 0;
}
