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

#include <iosfwd>
#include <string>
#include <vector>

#include "pkrr/panel.hpp"

namespace pkrr {

/// Long-format panel file.
///
///   unit,time,y,x1,...,xd[,f1,...,fq]
///
/// One row per (unit, time) cell, comma separated, no quoting; surrounding
/// blanks in a field are ignored. Units and times are labels, sorted
/// lexicographically as strings (zero-pad numeric labels). Factor values
/// must agree across units at each time.
///
/// Intercept rule: without f-columns F1 is the intercept. With f-columns,
/// the first column that is constant (all values equal and nonzero) becomes
/// the intercept: it is moved to the front and divided by its value. If no
/// column is constant, an all-ones column is prepended.
struct ParsedPanel {
  PanelData panel;
  std::vector<std::string> x_names;
  std::vector<std::string> f_names;  // after the intercept rule
  bool intercept_added = false;
};

ParsedPanel parse_panel_csv(std::istream& in, const std::string& source = "<stream>");
ParsedPanel parse_panel_csv(const std::string& path);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);

/// Writes every F1 column (the intercept included) in shortest
/// round-trip form, so that parse_panel_csv(write_panel_csv(p)) == p bit for bit.
void write_panel_csv(const PanelData& panel, std::ostream& out);
void write_panel_csv(const PanelData& panel, const std::string& path);

}  // namespace pkrr
