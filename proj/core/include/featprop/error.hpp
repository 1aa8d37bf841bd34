// Copyright 2026 The FeatProp Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace featprop {

/// Coarse failure categories, stable across releases. The CLI maps each
/// category to a fixed exit code and a single-line `error[<category>]: ...`
/// message on stderr.
enum class ErrorCategory {
  Parameter,  // a scalar argument is out of its documented domain
  Shape,      // dimensions of two inputs disagree
  State,      // inputs are structurally valid but the operation is undefined
  Io,         // the filesystem failed us
  Parse,      // a file exists but its contents are malformed
  Internal,   // a bug: an invariant the library promised was violated
};

constexpr const char* to_string(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::Parameter: return "param";
    case ErrorCategory::Shape: return "shape";
    case ErrorCategory::State: return "state";
    case ErrorCategory::Io: return "io";
    case ErrorCategory::Parse: return "parse";
    case ErrorCategory::Internal: return "internal";
  }
  return "internal";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }
  const char* category_name() const noexcept { return to_string(category_); }

 private:
  ErrorCategory category_;
};

}  // namespace featprop
