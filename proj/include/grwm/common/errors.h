// Copyright 2026 The GRWM Authors
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

#ifndef GRWM_COMMON_ERRORS_H_
#define GRWM_COMMON_ERRORS_H_

#include <stdexcept>
#include <string>

namespace grwm {

// Raised when a caller breaks an operation's precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Raised when a non-finite value appears; `op()` names the primitive that
// produced it.
class NumericFailure : public std::runtime_error {
 public:
  NumericFailure(std::string op, const std::string& what)
      : std::runtime_error(what), op_(std::move(op)) {}
  const std::string& op() const { return op_; }

 private:
  std::string op_;
};

enum class FormatErrorKind {
  kIo,
  kBadMagic,
  kBadVersion,
  kTruncated,
  kConfigMismatch,
  kMalformed,
};

const char* FormatErrorKindName(FormatErrorKind kind);

// Raised by binary readers (datasets, checkpoints) and config validation.
class FormatError : public std::runtime_error {
 public:
  FormatError(FormatErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(FormatErrorKindName(kind)) + ": " +
                           what),
        kind_(kind) {}
  FormatErrorKind kind() const { return kind_; }

 private:
  FormatErrorKind kind_;
};

inline const char* FormatErrorKindName(FormatErrorKind kind) {
  switch (kind) {
    case FormatErrorKind::kIo:
      return "io error";
    case FormatErrorKind::kBadMagic:
      return "bad magic";
    case FormatErrorKind::kBadVersion:
      return "unsupported version";
    case FormatErrorKind::kTruncated:
      return "truncated file";
    case FormatErrorKind::kConfigMismatch:
      return "config mismatch";
    case FormatErrorKind::kMalformed:
      return "malformed data";
  }
  return "format error";
}

#define GRWM_REQUIRE(cond, msg)                                       \
  do {                                                                \
    if (!(cond)) {                                                    \
      throw ::grwm::ContractViolation(std::string(__func__) + ": " + \
                                      (msg));                         \
    }                                                                 \
  } while (0)

}  // namespace grwm

#endif  // GRWM_COMMON_ERRORS_H_
