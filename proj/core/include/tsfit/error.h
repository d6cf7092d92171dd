/*
 * Copyright 2026 The tsfit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef TSFIT_ERROR_H_
#define TSFIT_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace tsfit {

enum class ErrorKind {
  kNotPositiveDefinite,
  kInvalidArgument,
  kArityMismatch,
  kIo,
  kFormat,
  kDiverged,
  kEmptyPrefix,
  kInvalidTime,
  kEmptyReservoir,
  kDegenerateRange,
  kDegenerateLabels,
  kZeroVariance,
  kSingularFit,
  kInvalidConfig,
};

std::string_view ErrorKindName(ErrorKind kind);

// Every failure the library reports is a tsfit::Error tagged with a kind so
// callers (the CLI in particular) can map it onto an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kArityMismatch: return "ArityMismatch";
    case ErrorKind::kIo: return "IoError";
    case ErrorKind::kFormat: return "FormatError";
    case ErrorKind::kDiverged: return "Diverged";
    case ErrorKind::kEmptyPrefix: return "EmptyPrefix";
    case ErrorKind::kInvalidTime: return "InvalidTime";
    case ErrorKind::kEmptyReservoir: return "EmptyReservoir";
    case ErrorKind::kDegenerateRange: return "DegenerateRange";
    case ErrorKind::kDegenerateLabels: return "DegenerateLabels";
    case ErrorKind::kZeroVariance: return "ZeroVariance";
    case ErrorKind::kSingularFit: return "SingularFit";
    case ErrorKind::kInvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace tsfit

#endif  // TSFIT_ERROR_H_
