// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0

#include "prednbv/rrt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "prednbv/error.hpp"

namespace prednbv {

double path_length(std::span<const Point3> waypoints) {
  if (waypoints.empty()) fail(ErrorCode::kEmptyInput, "path has no waypoints");
  double sum = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i) sum += (waypoints[i] - waypoints[i - 1]).norm();
  return sum;
}

double path_length(const Path& path) { return path_length(path.waypoints); }

bool segment_free(const OccupancyGrid& grid, const Point3& a, const Point3& b) {
  const double len = (b - a).norm();
  const double spacing = grid.resolution() / 4.0;
  const auto samples = static_cast<std::size_t>(std::ceil(len / spacing));
  for (std::size_t i = 0; i <= samples; ++i) {
    const double t = samples == 0 ? 0.0 : static_cast<double>(i) / static_cast<double>(samples);
    const auto s = grid.state_at(a + t * (b - a));
    if (!s || *s == CellState::kOccupied) return false;
  }
  return true;
}

namespace {

struct Tree {
  std::vector<Point3> nodes;
  std::vector<std::size_t> parent;

  std::size_t add(const Point3& p, std::size_t par) {
    nodes.push_back(p);
    parent.push_back(par);
    return nodes.size() - 1;
  }
  std::size_t nearest(const Point3& q) const {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double d = (nodes[i] - q).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  }
  std::vector<Point3> branch(std::size_t leaf) const {
    std::vector<Point3> out;
    for (std::size_t i = leaf;; i = parent[i]) {
      out.push_back(nodes[i]);
      if (i == 0) break;
    }
    return out;  // leaf first, root last
  }
};

enum class Extend { kTrapped, kAdvanced, kReached };

Extend extend(Tree& tree, const Point3& target, const OccupancyGrid& grid, double step,
              std::size_t& new_node) {
  const std::size_t near = tree.nearest(target);
  const Point3 from = tree.nodes[near];
  const Point3 delta = target - from;
  const double dist = delta.norm();
  const bool reaches = dist <= step;
  const Point3 to = reaches ? target : Point3(from + delta * (step / dist));
  if (!segment_free(grid, from, to)) return Extend::kTrapped;
  new_node = tree.add(to, near);
  return reaches ? Extend::kReached : Extend::kAdvanced;
}

}  // namespace

std::vector<Point3> shortcut(const OccupancyGrid& grid, const std::vector<Point3>& waypoints) {
  if (waypoints.size() <= 2) return waypoints;
  std::vector<Point3> out = {waypoints.front()};
  std::size_t i = 0;
  while (i + 1 < waypoints.size()) {
    std::size_t j = waypoints.size() - 1;
    while (j > i + 1 && !segment_free(grid, waypoints[i], waypoints[j])) --j;
    out.push_back(waypoints[j]);
    i = j;
  }
  return out;
}

Path rrt_connect(const Point3& start, const Point3& goal, const OccupancyGrid& grid,
                 const RrtParams& params) {
  if (!(params.step > 0.0) || params.max_iters < 0) {
    fail(ErrorCode::kParameter, "rrt step must be positive and max_iters non-negative");
  }
  for (const Point3* p : {&start, &goal}) {
    const auto s = grid.state_at(*p);
    if (!s) fail(ErrorCode::kInvalidEndpoint, "rrt endpoint outside the grid");
    if (*s == CellState::kOccupied) fail(ErrorCode::kInvalidEndpoint, "rrt endpoint is occupied");
  }
  Path path;
  if ((goal - start).norm() <= params.goal_tol) {
    path.waypoints = {start};
    return path;
  }
  if (segment_free(grid, start, goal)) {
    path.waypoints = {start, goal};
    path.length = path_length(path.waypoints);
    return path;
  }

  std::mt19937_64 rng(params.seed);
  const Point3 lo = grid.origin();
  const Point3 hi = grid.upper();
  std::uniform_real_distribution<double> ux(lo.x(), hi.x()), uy(lo.y(), hi.y()),
      uz(lo.z(), hi.z());

  Tree a, b;
  a.add(start, 0);
  b.add(goal, 0);
  bool a_is_start = true;
  for (int it = 0; it < params.max_iters; ++it) {
    const Point3 sample(ux(rng), uy(rng), uz(rng));
    std::size_t node_a = 0;
    if (extend(a, sample, grid, params.step, node_a) != Extend::kTrapped) {
      // Greedy connect of the other tree toward the new node.
      const Point3 target = a.nodes[node_a];
      std::size_t node_b = 0;
      Extend r;
      do {
        r = extend(b, target, grid, params.step, node_b);
      } while (r == Extend::kAdvanced);
      if (r == Extend::kReached) {
        std::vector<Point3> from_a = a.branch(node_a);  // meeting point .. root of a
        std::vector<Point3> from_b = b.branch(node_b);  // meeting point .. root of b
        std::reverse(from_a.begin(), from_a.end());
        // Both branches contain the meeting point; drop the duplicate.
        from_a.insert(from_a.end(), from_b.begin() + 1, from_b.end());
        if (!a_is_start) std::reverse(from_a.begin(), from_a.end());
        path.waypoints = shortcut(grid, from_a);
        path.length = path_length(path.waypoints);
        return path;
      }
    }
    std::swap(a, b);
    a_is_start = !a_is_start;
  }
  fail(ErrorCode::kNoPath, "rrt_connect: no path within the iteration budget");
}

}  // namespace prednbv
