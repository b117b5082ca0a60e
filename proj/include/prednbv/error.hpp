// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PREDNBV_ERROR_HPP_
#define PREDNBV_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace prednbv {

// Numeric values are mirrored by prednbv_status in prednbv.h.
enum class ErrorCode : int {
  kParameter = 1,
  kEmptyInput = 2,
  kCardinality = 3,
  kDegenerateViewpoint = 4,
  kInvalidPose = 5,
  kBounds = 6,
  kInvalidEndpoint = 7,
  kNoPath = 8,
  kZeroGain = 9,
  kPredictorUnavailable = 10,
  kStartVisibility = 11,
  kExplorationComplete = 12,
  kIo = 13,
  kParse = 14,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace prednbv

#endif  // PREDNBV_ERROR_HPP_
