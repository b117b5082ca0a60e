// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0
//
// Ternary voxel map carved by sensing rays, plus frontier extraction.

#ifndef PREDNBV_OCCUPANCY_HPP_
#define PREDNBV_OCCUPANCY_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prednbv/geometry.hpp"
#include "prednbv/sensor.hpp"

namespace prednbv {

enum class CellState : std::uint8_t { kUnknown = 0, kFree = 1, kOccupied = 2 };

using CellIndex = std::array<int, 3>;

class OccupancyGrid {
 public:
  OccupancyGrid(const Point3& origin, double resolution, const CellIndex& dims);

  // Cube of side 2 * half_extent centred on `center`.
  static OccupancyGrid centered(const Point3& center, double half_extent, double resolution);

  const Point3& origin() const noexcept { return origin_; }
  double resolution() const noexcept { return resolution_; }
  const CellIndex& dims() const noexcept { return dims_; }
  std::size_t cell_count() const noexcept { return cells_.size(); }
  Point3 upper() const;

  bool contains(const Point3& p) const { return cell_of(p).has_value(); }
  std::optional<CellIndex> cell_of(const Point3& p) const;
  bool valid(const CellIndex& c) const {
    return c[0] >= 0 && c[1] >= 0 && c[2] >= 0 && c[0] < dims_[0] && c[1] < dims_[1] &&
           c[2] < dims_[2];
  }
  // x-fastest linear index.
  std::size_t linear(const CellIndex& c) const {
    return static_cast<std::size_t>(c[0]) +
           static_cast<std::size_t>(dims_[0]) *
               (static_cast<std::size_t>(c[1]) +
                static_cast<std::size_t>(dims_[1]) * static_cast<std::size_t>(c[2]));
  }
  CellIndex unlinear(std::size_t i) const;
  Point3 center(const CellIndex& c) const;

  CellState at(const CellIndex& c) const { return static_cast<CellState>(cells_[linear(c)]); }
  // Out-of-bounds positions report nullopt.
  std::optional<CellState> state_at(const Point3& p) const;
  void set(const CellIndex& c, CellState s) { cells_[linear(c)] = static_cast<std::uint8_t>(s); }

  std::span<const std::uint8_t> raw() const noexcept { return cells_; }

  struct Counts {
    std::size_t unknown = 0, free = 0, occupied = 0;
  };
  Counts counts() const;

  bool operator==(const OccupancyGrid&) const = default;

 private:
  Point3 origin_;
  double resolution_;
  CellIndex dims_;
  std::vector<std::uint8_t> cells_;
};

// Cells crossed by the segment a -> b (Amanatides-Woo), in traversal order,
// starting at the cell of `a` and clipped to the grid. When `b` is inside the
// grid the last element is the cell of `b`.
std::vector<CellIndex> traverse(const OccupancyGrid& grid, const Point3& a, const Point3& b);

// Ray carving: every endpoint cell becomes occupied; cells along each ray
// become free unless occupied. Obstacle returns are carved the same way.
// Throws kBounds if the sensing pose is outside the grid.
void integrate_in_place(OccupancyGrid& grid, const Observation& obs);
OccupancyGrid integrate(const OccupancyGrid& grid, const Observation& obs);

struct FrontierCluster {
  Point3 centroid;
  std::size_t size = 0;
  std::vector<std::size_t> cells;  // linear indices, ascending
};

// Free cells with an unknown 6-neighbour, grouped by 26-connectivity,
// largest cluster first (ties: smallest first cell).
std::vector<FrontierCluster> frontier_clusters(const OccupancyGrid& grid);
std::vector<Point3> frontiers(const OccupancyGrid& grid);

// {"dims", "resolution", "origin", "counts": {"unknown", "free", "occupied"}}.
nlohmann::json grid_summary(const OccupancyGrid& grid);
// One byte per cell (0 unknown, 1 free, 2 occupied), x fastest.
std::string grid_dump(const OccupancyGrid& grid);

}  // namespace prednbv

#endif  // PREDNBV_OCCUPANCY_HPP_
