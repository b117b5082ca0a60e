// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0
//
// External predictor protocol. Every frame is a 4-byte little-endian unsigned
// payload length followed by a UTF-8 JSON payload.
//   request:  {"op":"predict","points":[[x,y,z],...]}
//   response: {"points":[[x,y,z],...]} or {"error": "..."}

#ifndef PREDNBV_WIRE_HPP_
#define PREDNBV_WIRE_HPP_

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "prednbv/geometry.hpp"

namespace prednbv::wire {

inline constexpr std::uint32_t kMaxFrameBytes = 256u << 20;

std::string encode_frame(std::string_view payload);
// Returns the payload when `buffer` holds at least one complete frame and
// removes it from the buffer. Throws kPredictorUnavailable on oversize frames.
std::optional<std::string> take_frame(std::string& buffer);

std::string predict_request(const PointCloud& cloud);
// Throws kPredictorUnavailable on {"error": ...} or a malformed payload.
PointCloud parse_predict_response(std::string_view payload);

/// Byte stream with deadline-bounded reads. One request in flight at a time.
class Connection {
 public:
  virtual ~Connection() = default;
  virtual void write_all(std::string_view bytes) = 0;
  // Reads whatever is available (at least one byte) before `deadline`.
  virtual std::string read_some(std::chrono::steady_clock::time_point deadline) = 0;
};

// "tcp://host:port" connects a socket; "exec:<cmd>" spawns `/bin/sh -c cmd`
// and talks over its stdin/stdout.
std::unique_ptr<Connection> connect(const std::string& endpoint,
                                    std::chrono::milliseconds timeout);

// Sends a request frame and waits for exactly one response frame.
std::string round_trip(Connection& conn, std::string_view payload,
                       std::chrono::milliseconds timeout);

}  // namespace prednbv::wire

#endif  // PREDNBV_WIRE_HPP_
