// Copyright 2026 The zlap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ZLAP_ERROR_HPP
#define ZLAP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace zlap {

enum class ErrorKind {
  format,      // bad magic or version
  size,        // truncated or oversized payload
  data,        // non-finite or otherwise invalid values
  degenerate,  // zero rows, zero ranges, cancelling means
  shape,       // dimension or length mismatch
  empty_input,
  capacity,    // problem too large for the requested method
  numerical,   // NaN or breakdown inside a solver
  validation,  // bad configuration
  io,          // file could not be opened, read or written
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::format: return "format error";
    case ErrorKind::size: return "size error";
    case ErrorKind::data: return "data error";
    case ErrorKind::degenerate: return "degenerate input";
    case ErrorKind::shape: return "shape error";
    case ErrorKind::empty_input: return "empty input";
    case ErrorKind::capacity: return "capacity error";
    case ErrorKind::numerical: return "numerical error";
    case ErrorKind::validation: return "validation error";
    case ErrorKind::io: return "I/O error";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace zlap

#endif  // ZLAP_ERROR_HPP
