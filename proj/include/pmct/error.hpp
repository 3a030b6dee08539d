// pmct/error.hpp

// Copyright 2026  The pmct Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pmct {

enum class ErrorCode {
  FileNotFound,
  UnsupportedFormat,
  SampleRateMismatch,
  IoError,
  MalformedHeader,
  NonFinite,
  EmptyImpulse,
  EmptyInput,
  SilentNoise,
  TooShort,
  ParseError,
  DuplicateId,
  EmptyPool,
  EigenFailure,
  DegenerateVector,
  InconsistentShape,
  InvalidArgument,
  MismatchFound,
  ConfigError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::SampleRateMismatch: return "SampleRateMismatch";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::EmptyImpulse: return "EmptyImpulse";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::SilentNoise: return "SilentNoise";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::EigenFailure: return "EigenFailure";
    case ErrorCode::DegenerateVector: return "DegenerateVector";
    case ErrorCode::InconsistentShape: return "InconsistentShape";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MismatchFound: return "MismatchFound";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// All errors raised by the library carry a machine-readable code; the
/// message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace pmct
