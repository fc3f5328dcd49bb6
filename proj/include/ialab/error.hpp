// SPDX-License-Identifier: Apache-2.0
//
// Copyright (C) 2026 The ialab authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ialab {

enum class ErrorCode {
  DimensionMismatch,
  NotHermitian,
  NotPositiveDefinite,
  ConvergenceFailure,
  RankDeficient,
  NotProjector,
  BadConfig,
  NonPositiveAlpha,
  UnknownScenario,
  EmptyTrace,
  IoFailure,
  FormatViolation,
  DegenerateChannel,
  SingularCrossChannel,
  InfeasibleConfig,
  ShapeMismatch,
  NotScalarLoss,
  InsufficientData,
  WindowLengthMismatch,
  ZeroReference,
  BufferTooSmall,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NotProjector: return "NotProjector";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::NonPositiveAlpha: return "NonPositiveAlpha";
    case ErrorCode::UnknownScenario: return "UnknownScenario";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::FormatViolation: return "FormatViolation";
    case ErrorCode::DegenerateChannel: return "DegenerateChannel";
    case ErrorCode::SingularCrossChannel: return "SingularCrossChannel";
    case ErrorCode::InfeasibleConfig: return "InfeasibleConfig";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NotScalarLoss: return "NotScalarLoss";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::WindowLengthMismatch: return "WindowLengthMismatch";
    case ErrorCode::ZeroReference: return "ZeroReference";
    case ErrorCode::BufferTooSmall: return "BufferTooSmall";
  }
  return "Unknown";
}

/// Every failure surfaced by the library carries one of the codes above so
/// callers (and the CLI error record) can branch on the kind without parsing
/// the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace ialab
