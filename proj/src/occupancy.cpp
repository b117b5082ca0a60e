// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0

#include "prednbv/occupancy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "prednbv/error.hpp"

namespace prednbv {

OccupancyGrid::OccupancyGrid(const Point3& origin, double resolution, const CellIndex& dims)
    : origin_(origin), resolution_(resolution), dims_(dims) {
  if (!(resolution > 0.0) || !origin.allFinite()) {
    fail(ErrorCode::kParameter, "grid resolution must be positive");
  }
  if (dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0) {
    fail(ErrorCode::kParameter, "grid dimensions must be positive");
  }
  const double total = static_cast<double>(dims[0]) * dims[1] * dims[2];
  if (total > 2e8) fail(ErrorCode::kParameter, "grid too large");
  cells_.assign(static_cast<std::size_t>(total), static_cast<std::uint8_t>(CellState::kUnknown));
}

OccupancyGrid OccupancyGrid::centered(const Point3& center, double half_extent,
                                      double resolution) {
  if (!(half_extent > 0.0)) fail(ErrorCode::kParameter, "grid half extent must be positive");
  const int n = std::max(1, static_cast<int>(std::ceil(2.0 * half_extent / resolution)));
  const Point3 origin = center - Point3::Constant(0.5 * n * resolution);
  return OccupancyGrid(origin, resolution, {n, n, n});
}

Point3 OccupancyGrid::upper() const {
  return origin_ + resolution_ * Point3(dims_[0], dims_[1], dims_[2]);
}

std::optional<CellIndex> OccupancyGrid::cell_of(const Point3& p) const {
  CellIndex c;
  for (int k = 0; k < 3; ++k) {
    const double f = std::floor((p[k] - origin_[k]) / resolution_);
    if (!(f >= 0.0) || f >= dims_[k]) return std::nullopt;
    c[k] = static_cast<int>(f);
  }
  return c;
}

CellIndex OccupancyGrid::unlinear(std::size_t i) const {
  const auto nx = static_cast<std::size_t>(dims_[0]);
  const auto ny = static_cast<std::size_t>(dims_[1]);
  return {static_cast<int>(i % nx), static_cast<int>((i / nx) % ny),
          static_cast<int>(i / (nx * ny))};
}

Point3 OccupancyGrid::center(const CellIndex& c) const {
  return origin_ + resolution_ * Point3(c[0] + 0.5, c[1] + 0.5, c[2] + 0.5);
}

std::optional<CellState> OccupancyGrid::state_at(const Point3& p) const {
  const auto c = cell_of(p);
  if (!c) return std::nullopt;
  return at(*c);
}

OccupancyGrid::Counts OccupancyGrid::counts() const {
  Counts out;
  for (std::uint8_t v : cells_) {
    switch (static_cast<CellState>(v)) {
      case CellState::kUnknown: ++out.unknown; break;
      case CellState::kFree: ++out.free; break;
      case CellState::kOccupied: ++out.occupied; break;
    }
  }
  return out;
}

std::vector<CellIndex> traverse(const OccupancyGrid& grid, const Point3& a, const Point3& b) {
  std::vector<CellIndex> out;
  const auto start = grid.cell_of(a);
  if (!start) return out;
  const auto end = grid.cell_of(b);
  const double res = grid.resolution();
  const Point3 d = b - a;

  CellIndex cur = *start;
  std::array<int, 3> step{};
  std::array<double, 3> t_max{}, t_delta{};
  const double inf = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    if (d[k] > 0.0) {
      step[k] = 1;
      t_max[k] = (grid.origin()[k] + (cur[k] + 1) * res - a[k]) / d[k];
      t_delta[k] = res / d[k];
    } else if (d[k] < 0.0) {
      step[k] = -1;
      t_max[k] = (grid.origin()[k] + cur[k] * res - a[k]) / d[k];
      t_delta[k] = -res / d[k];
    } else {
      step[k] = 0;
      t_max[k] = inf;
      t_delta[k] = inf;
    }
  }
  out.push_back(cur);
  // The walk is bounded by the number of cell boundaries the segment can cross.
  const std::size_t limit = static_cast<std::size_t>(grid.dims()[0] + grid.dims()[1] +
                                                     grid.dims()[2]) + 3;
  while (out.size() <= limit) {
    if (end && cur == *end) break;
    int axis = 0;
    if (t_max[1] < t_max[axis]) axis = 1;
    if (t_max[2] < t_max[axis]) axis = 2;
    if (t_max[axis] > 1.0) break;
    cur[axis] += step[axis];
    t_max[axis] += t_delta[axis];
    if (!grid.valid(cur)) break;
    out.push_back(cur);
  }
  return out;
}

namespace {

void carve(OccupancyGrid& grid, const Point3& origin, const PointCloud& endpoints) {
  for (const auto& p : endpoints) {
    const auto end = grid.cell_of(p);
    for (const auto& c : traverse(grid, origin, p)) {
      if (end && c == *end) break;
      if (grid.at(c) == CellState::kUnknown) grid.set(c, CellState::kFree);
    }
  }
}

void mark(OccupancyGrid& grid, const PointCloud& endpoints) {
  for (const auto& p : endpoints) {
    if (const auto c = grid.cell_of(p)) grid.set(*c, CellState::kOccupied);
  }
}

}  // namespace

void integrate_in_place(OccupancyGrid& grid, const Observation& obs) {
  const Point3& origin = obs.pose.position();
  if (!grid.contains(origin)) fail(ErrorCode::kBounds, "observation pose is outside the grid");
  carve(grid, origin, obs.cloud);
  carve(grid, origin, obs.obstacle_hits);
  mark(grid, obs.cloud);
  mark(grid, obs.obstacle_hits);
}

OccupancyGrid integrate(const OccupancyGrid& grid, const Observation& obs) {
  OccupancyGrid out = grid;
  integrate_in_place(out, obs);
  return out;
}

std::vector<FrontierCluster> frontier_clusters(const OccupancyGrid& grid) {
  const std::size_t n = grid.cell_count();
  const auto raw = grid.raw();
  std::vector<char> is_frontier(n, 0);
  static constexpr int kFace[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0},
                                      {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  for (std::size_t i = 0; i < n; ++i) {
    if (raw[i] != static_cast<std::uint8_t>(CellState::kFree)) continue;
    const CellIndex c = grid.unlinear(i);
    for (const auto& f : kFace) {
      const CellIndex nb = {c[0] + f[0], c[1] + f[1], c[2] + f[2]};
      if (grid.valid(nb) && grid.at(nb) == CellState::kUnknown) {
        is_frontier[i] = 1;
        break;
      }
    }
  }

  std::vector<FrontierCluster> clusters;
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> queue;
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_frontier[i] || seen[i]) continue;
    FrontierCluster cl;
    queue.assign(1, i);
    seen[i] = 1;
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const CellIndex c = grid.unlinear(queue[q]);
      for (int dz = -1; dz <= 1; ++dz) {
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const CellIndex nb = {c[0] + dx, c[1] + dy, c[2] + dz};
            if (!grid.valid(nb)) continue;
            const std::size_t j = grid.linear(nb);
            if (is_frontier[j] && !seen[j]) {
              seen[j] = 1;
              queue.push_back(j);
            }
          }
        }
      }
    }
    std::sort(queue.begin(), queue.end());
    Point3 sum = Point3::Zero();
    for (std::size_t j : queue) sum += grid.center(grid.unlinear(j));
    cl.size = queue.size();
    cl.centroid = sum / static_cast<double>(cl.size);
    cl.cells = queue;
    clusters.push_back(std::move(cl));
  }
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const FrontierCluster& a, const FrontierCluster& b) {
                     return a.size > b.size;
                   });
  return clusters;
}

std::vector<Point3> frontiers(const OccupancyGrid& grid) {
  std::vector<Point3> out;
  for (const auto& c : frontier_clusters(grid)) out.push_back(c.centroid);
  return out;
}

nlohmann::json grid_summary(const OccupancyGrid& grid) {
  const auto c = grid.counts();
  const auto& d = grid.dims();
  const auto& o = grid.origin();
  return {{"dims", {d[0], d[1], d[2]}},
          {"resolution", grid.resolution()},
          {"origin", {o.x(), o.y(), o.z()}},
          {"counts", {{"unknown", c.unknown}, {"free", c.free}, {"occupied", c.occupied}}}};
}

std::string grid_dump(const OccupancyGrid& grid) {
  const auto raw = grid.raw();
  return std::string(reinterpret_cast<const char*>(raw.data()), raw.size());
}

}  // namespace prednbv
