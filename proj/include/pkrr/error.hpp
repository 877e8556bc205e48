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

#include <stdexcept>
#include <string>

namespace pkrr {

/// Error categories. Each maps onto a CLI exit code.
enum class ErrorKind {
  Input,      // malformed data, bad arguments, dimension mismatch
  Spec,       // invalid kernel specification
  Numeric,    // singular systems, eigensolver failure, degenerate designs
  Selection,  // no admissible point on a GCV grid
  Resource,   // problem size over a configured cap
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct InputError : Error {
  explicit InputError(const std::string& w) : Error(ErrorKind::Input, w) {}
};
struct SpecError : Error {
  explicit SpecError(const std::string& w) : Error(ErrorKind::Spec, w) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& w) : Error(ErrorKind::Numeric, w) {}
};
struct SelectionError : Error {
  explicit SelectionError(const std::string& w)
      : Error(ErrorKind::Selection, w) {}
};
struct ResourceError : Error {
  explicit ResourceError(const std::string& w)
      : Error(ErrorKind::Resource, w) {}
};

/// 0 ok, 2 input error, 3 numeric error, 4 resource cap.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Input:
    case ErrorKind::Spec:
      return 2;
    case ErrorKind::Numeric:
    case ErrorKind::Selection:
      return 3;
    case ErrorKind::Resource:
      return 4;
  }
  return 3;
}

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Input: return "input";
    case ErrorKind::Spec: return "spec";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Selection: return "selection";
    case ErrorKind::Resource: return "resource";
  }
  return "unknown";
}

}  // namespace pkrr
