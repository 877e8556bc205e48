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

#include "pkrr/panel_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "pkrr/error.hpp"

namespace pkrr {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(const std::string& field, const std::string& column,
                    std::size_t line, const std::string& source) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw InputError(source + ":" + std::to_string(line) + ": column '" +
                     column + "': cannot parse '" + field +
                     "' as a finite number");
  }
  return v;
}

struct Row {
  std::vector<double> values;  // y, x..., f...
  std::size_t line = 0;
};

}  // namespace

ParsedPanel parse_panel_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!trim(line).empty()) {
      header = split(line);
      break;
    }
  }
  if (header.empty()) throw InputError(source + ": empty file");
  if (header.size() < 4 || header[0] != "unit" || header[1] != "time" ||
      header[2] != "y") {
    throw InputError(source + ":" + std::to_string(lineno) +
                     ": header must start with unit,time,y,x1");
  }
  std::size_t d = 0;
  std::size_t q = 0;
  for (std::size_t c = 3; c < header.size(); ++c) {
    const std::string& h = header[c];
    const bool is_x = h.size() > 1 && h[0] == 'x';
    const std::string expect =
        (q == 0 && is_x ? "x" + std::to_string(d + 1) : "f" + std::to_string(q + 1));
    if (h != expect) {
      throw InputError(source + ":" + std::to_string(lineno) +
                       ": unexpected header column '" + h + "' (expected '" +
                       expect + "')");
    }
    (is_x && q == 0 ? d : q) += 1;
  }
  if (d == 0) throw InputError(source + ": header has no x1 column");

  std::map<std::string, std::map<std::string, Row>> cells;
  std::size_t duplicates = 0;
  std::ostringstream dup_msg;
  std::map<std::string, bool> times;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      throw InputError(source + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    if (fields[0].empty() || fields[1].empty()) {
      throw InputError(source + ":" + std::to_string(lineno) +
                       ": empty unit or time label");
    }
    Row row;
    row.line = lineno;
    for (std::size_t c = 2; c < fields.size(); ++c) {
      row.values.push_back(parse_number(fields[c], header[c], lineno, source));
    }
    auto& unit = cells[fields[0]];
    times[fields[1]] = true;
    if (unit.count(fields[1])) {
      if (duplicates++ < 10) {
        dup_msg << " (" << fields[0] << ", " << fields[1] << ") at lines "
                << unit[fields[1]].line << " and " << lineno << ";";
      }
      continue;
    }
    unit.emplace(fields[1], std::move(row));
  }
  if (duplicates > 0) {
    throw InputError(source + ": " + std::to_string(duplicates) +
                     " duplicate (unit, time) cell(s):" + dup_msg.str());
  }
  if (cells.empty()) throw InputError(source + ": no data rows");

  std::vector<std::string> time_labels;
  for (const auto& [t, unused] : times) time_labels.push_back(t);
  std::size_t missing = 0;
  std::ostringstream miss_msg;
  for (const auto& [u, row] : cells) {
    for (const auto& t : time_labels) {
      if (!row.count(t) && missing++ < 10) {
        miss_msg << " (" << u << ", " << t << ")";
      }
    }
  }
  if (missing > 0) {
    throw InputError(source + ": unbalanced panel, " + std::to_string(missing) +
                     " missing (unit, time) cell(s):" + miss_msg.str() +
                     (missing > 10 ? " ..." : ""));
  }

  const std::size_t n = cells.size();
  const std::size_t t = time_labels.size();
  ParsedPanel out;
  PanelData& p = out.panel;
  p.y.resize(Eigen::Index(n), Eigen::Index(t));
  p.x.resize(Eigen::Index(n * t), Eigen::Index(d));
  Eigen::MatrixXd f(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(q));
  for (std::size_t k = 0; k < d; ++k) out.x_names.push_back(header[3 + k]);
  std::size_t i = 0;
  for (const auto& [u, row] : cells) {
    p.unit_labels.push_back(u);
    for (std::size_t s = 0; s < t; ++s) {
      const Row& r = row.at(time_labels[s]);
      p.y(Eigen::Index(i), Eigen::Index(s)) = r.values[0];
      for (std::size_t k = 0; k < d; ++k) {
        p.x(Eigen::Index(i * t + s), Eigen::Index(k)) = r.values[1 + k];
      }
      for (std::size_t k = 0; k < q; ++k) {
        const double v = r.values[1 + d + k];
        if (i == 0) {
          f(Eigen::Index(s), Eigen::Index(k)) = v;
        } else if (f(Eigen::Index(s), Eigen::Index(k)) != v) {
          throw InputError(source + ":" + std::to_string(r.line) +
                           ": factor column '" + header[3 + d + k] +
                           "' differs across units at time '" +
                           time_labels[s] + "'");
        }
      }
    }
    ++i;
  }
  p.time_labels = time_labels;

  std::ptrdiff_t constant = -1;
  for (std::size_t k = 0; k < q && constant < 0; ++k) {
    const auto col = f.col(Eigen::Index(k));
    if (col(0) != 0.0 && (col.array() == col(0)).all()) {
      constant = std::ptrdiff_t(k);
    }
  }
  if (constant < 0) {
    p.f1.resize(Eigen::Index(t), Eigen::Index(q + 1));
    p.f1.col(0).setOnes();
    p.f1.rightCols(Eigen::Index(q)) = f;
    out.intercept_added = true;
    out.f_names.push_back("intercept");
    for (std::size_t k = 0; k < q; ++k) out.f_names.push_back(header[3 + d + k]);
  } else {
    p.f1.resize(Eigen::Index(t), Eigen::Index(q));
    p.f1.col(0).setOnes();
    out.f_names.push_back(header[3 + d + std::size_t(constant)]);
    Eigen::Index c = 1;
    for (std::size_t k = 0; k < q; ++k) {
      if (std::ptrdiff_t(k) == constant) continue;
      p.f1.col(c++) = f.col(Eigen::Index(k));
      out.f_names.push_back(header[3 + d + k]);
    }
  }
  p.validate();
  return out;
}

ParsedPanel parse_panel_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open panel file '" + path + "'");
  return parse_panel_csv(in, path);
}

std::string format_number(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_panel_csv(const PanelData& panel, std::ostream& out) {
  PanelData p = panel;
  p.validate();
  out << "unit,time,y";
  for (std::size_t k = 0; k < p.dim(); ++k) out << ",x" << k + 1;
  for (std::size_t k = 0; k < p.factors(); ++k) out << ",f" << k + 1;
  out << '\n';
  auto put = [&](double v) { out << ',' << format_number(v); };
  for (std::size_t i = 0; i < p.units(); ++i) {
    for (std::size_t s = 0; s < p.periods(); ++s) {
      out << p.unit_labels[i] << ',' << p.time_labels[s];
      put(p.y(Eigen::Index(i), Eigen::Index(s)));
      for (std::size_t k = 0; k < p.dim(); ++k) {
        put(p.x(Eigen::Index(i * p.periods() + s), Eigen::Index(k)));
      }
      for (std::size_t k = 0; k < p.factors(); ++k) {
        put(p.f1(Eigen::Index(s), Eigen::Index(k)));
      }
      out << '\n';
    }
  }
}

void write_panel_csv(const PanelData& panel, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write panel file '" + path + "'");
  write_panel_csv(panel, out);
  if (!out) throw InputError("write failed for '" + path + "'");
}

}  // namespace pkrr
