// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0

#include "prednbv/error.hpp"

namespace prednbv {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kParameter: return "parameter";
    case ErrorCode::kEmptyInput: return "empty-input";
    case ErrorCode::kCardinality: return "cardinality";
    case ErrorCode::kDegenerateViewpoint: return "degenerate-viewpoint";
    case ErrorCode::kInvalidPose: return "invalid-pose";
    case ErrorCode::kBounds: return "bounds";
    case ErrorCode::kInvalidEndpoint: return "invalid-endpoint";
    case ErrorCode::kNoPath: return "no-path";
    case ErrorCode::kZeroGain: return "zero-gain";
    case ErrorCode::kPredictorUnavailable: return "predictor-unavailable";
    case ErrorCode::kStartVisibility: return "start-visibility";
    case ErrorCode::kExplorationComplete: return "exploration-complete";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kParse: return "parse";
  }
  return "unknown";
}

}  // namespace prednbv
