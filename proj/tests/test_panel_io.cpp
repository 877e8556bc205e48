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

#include <doctest.h>

#include <sstream>
#include <string>

#include "pkrr/error.hpp"
#include "pkrr/panel_io.hpp"
#include "support.hpp"

using namespace pkrr;

namespace {

ParsedPanel parse(const std::string& text) {
  std::istringstream in(text);
  return parse_panel_csv(in, "mem.csv");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

const char* kMinimal =
    "unit,time,y,x1\n"
    "a,1,0.5,1.0\n"
    "a,2,0.7,2.0\n"
    "a,3,0.1,3.0\n"
    "b,1,1.5,-1.0\n"
    "b,2,1.7,-2.0\n"
    "b,3,1.1,-3.0\n";

}  // namespace

TEST_CASE("minimal file") {
  const ParsedPanel p = parse(kMinimal);
  CHECK(p.panel.units() == 2);
  CHECK(p.panel.periods() == 3);
  CHECK(p.panel.dim() == 1);
  CHECK(p.panel.factors() == 1);
  CHECK(p.intercept_added);
  CHECK(p.x_names == std::vector<std::string>{"x1"});
  CHECK(p.panel.unit_labels == std::vector<std::string>{"a", "b"});
  CHECK(p.panel.time_labels == std::vector<std::string>{"1", "2", "3"});
  CHECK(p.panel.y(1, 2) == 1.1);
  CHECK(p.panel.x(4, 0) == -2.0);
}

TEST_CASE("row order does not matter") {
  const ParsedPanel p = parse(
      "unit,time,y,x1\n"
      "b,3,1.1,-3.0\n"
      "a,2,0.7,2.0\n"
      " a , 1 , 0.5 , 1.0 \n"
      "b,1,1.5,-1.0\n"
      "\n"
      "a,3,0.1,3.0\n"
      "b,2,1.7,-2.0\n");
  const ParsedPanel q = parse(kMinimal);
  CHECK(p.panel.y == q.panel.y);
  CHECK(p.panel.x == q.panel.x);
}

TEST_CASE("missing cell is named") {
  const std::string e = error_of(
      "unit,time,y,x1\n"
      "a,1,0.5,1.0\n"
      "a,2,0.7,2.0\n"
      "a,3,0.1,3.0\n"
      "b,1,1.5,-1.0\n"
      "b,3,1.1,-3.0\n");
  INFO(e);
  CHECK(contains(e, "(b, 2)"));
}

TEST_CASE("duplicate cell") {
  const std::string e = error_of(std::string(kMinimal) + "a,2,9.0,9.0\n");
  INFO(e);
  CHECK(contains(e, "duplicate"));
  CHECK(contains(e, "lines 3 and 8"));
}

TEST_CASE("parse error names the row and column") {
  const std::string e = error_of(
      "unit,time,y,x1\n"
      "a,1,0.5,1.0\n"
      "a,2,oops,2.0\n");
  INFO(e);
  CHECK(contains(e, "mem.csv:3"));
  CHECK(contains(e, "'y'"));
}

TEST_CASE("header and shape errors") {
  CHECK(contains(error_of(""), "empty"));
  CHECK(!error_of("unit,y,time,x1\na,1,1,1\n").empty());
  CHECK(!error_of("unit,time,y\na,1,1\n").empty());
  CHECK(!error_of("unit,time,y,x1\na,1,1\n").empty());
  CHECK(!error_of("unit,time,y,x1\na,1,nan,1\n").empty());
}

TEST_CASE("factor columns") {
  SUBCASE("constant column becomes the intercept") {
    const ParsedPanel p = parse(
        "unit,time,y,x1,f1,f2\n"
        "a,1,0.5,1.0,0.3,2\n"
        "a,2,0.7,2.0,0.9,2\n"
        "a,3,0.1,3.0,0.4,2\n"
        "a,4,0.1,3.5,0.1,2\n"
        "b,1,1.5,-1.0,0.3,2\n"
        "b,2,1.7,-2.0,0.9,2\n"
        "b,3,1.1,-3.0,0.4,2\n"
        "b,4,1.1,-3.5,0.1,2\n");
    CHECK_FALSE(p.intercept_added);
    CHECK(p.f_names == std::vector<std::string>{"f2", "f1"});
    CHECK(p.panel.f1(2, 0) == 1.0);
    CHECK(p.panel.f1(1, 1) == 0.9);
  }
  SUBCASE("no constant column gets an intercept prepended") {
    const ParsedPanel p = parse(
        "unit,time,y,x1,f1\n"
        "a,1,0.5,1.0,0.3\n"
        "a,2,0.7,2.0,0.9\n"
        "a,3,0.1,3.0,0.4\n"
        "a,4,0.1,3.5,0.1\n"
        "b,1,1.5,-1.0,0.3\n"
        "b,2,1.7,-2.0,0.9\n"
        "b,3,1.1,-3.0,0.4\n"
        "b,4,1.1,-3.5,0.1\n");
    CHECK(p.intercept_added);
    CHECK(p.f_names == std::vector<std::string>{"intercept", "f1"});
    CHECK(p.panel.f1.col(0).isOnes());
  }
  SUBCASE("factors must agree across units") {
    const std::string e = error_of(
        "unit,time,y,x1,f1\n"
        "a,1,0.5,1.0,0.3\n"
        "a,2,0.7,2.0,0.9\n"
        "a,3,0.1,3.0,0.4\n"
        "a,4,0.1,3.5,0.1\n"
        "b,1,1.5,-1.0,0.3\n"
        "b,2,1.7,-2.0,0.8\n"
        "b,3,1.1,-3.0,0.4\n"
        "b,4,1.1,-3.5,0.1\n");
    INFO(e);
    CHECK(!e.empty());
  }
}

TEST_CASE("write then parse is bit exact") {
  testing::Gen gen(31);
  for (int rep = 0; rep < 5; ++rep) {
    PanelData p = gen.panel(gen.index(1, 12), gen.index(6, 15), gen.index(1, 3), gen.index(1, 2));
    p.y *= 1e-7 * gen.uniform(1, 1e9);
    std::stringstream s;
    write_panel_csv(p, s);
    const ParsedPanel q = parse_panel_csv(s, "round");
    CHECK(q.panel.y == p.y);
    CHECK(q.panel.x == p.x);
    CHECK(q.panel.f1 == p.f1);
    CHECK(q.panel.unit_labels == p.unit_labels);
    CHECK(q.panel.time_labels == p.time_labels);
  }
}

TEST_CASE("missing file") {
  CHECK_THROWS_AS(parse_panel_csv(std::string("/nonexistent/panel.csv")), InputError);
}
