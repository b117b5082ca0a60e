// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PREDNBV_RRT_HPP_
#define PREDNBV_RRT_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "prednbv/geometry.hpp"
#include "prednbv/occupancy.hpp"

namespace prednbv {

struct Path {
  std::vector<Point3> waypoints;
  double length = 0.0;
};

struct RrtParams {
  double step = 1.0;        // meters per extension
  int max_iters = 10000;
  double goal_tol = 1e-6;   // start/goal closer than this are the same point
  std::uint64_t seed = 0;
};

double path_length(std::span<const Point3> waypoints);
double path_length(const Path& path);

// Unknown cells are traversable; occupied cells and leaving the grid are not.
// Checks samples spaced at most resolution / 4 apart, endpoints included.
bool segment_free(const OccupancyGrid& grid, const Point3& a, const Point3& b);

// Bidirectional RRT-Connect followed by greedy shortcutting. Throws
// kInvalidEndpoint for occupied or out-of-grid endpoints and kNoPath when the
// trees do not meet within max_iters.
Path rrt_connect(const Point3& start, const Point3& goal, const OccupancyGrid& grid,
                 const RrtParams& params);

// Keeps the first waypoint, then repeatedly jumps to the farthest waypoint
// visible in a straight collision-free segment.
std::vector<Point3> shortcut(const OccupancyGrid& grid, const std::vector<Point3>& waypoints);

}  // namespace prednbv

#endif  // PREDNBV_RRT_HPP_
