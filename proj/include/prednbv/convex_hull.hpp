// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PREDNBV_CONVEX_HULL_HPP_
#define PREDNBV_CONVEX_HULL_HPP_

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "prednbv/geometry.hpp"

namespace prednbv {

struct ConvexHull {
  // Affine dimension of the input (0..3). Faces are only filled for 3.
  int dimension = 0;
  // Outward oriented (counter-clockwise seen from outside) triangles.
  std::vector<std::array<std::size_t, 3>> faces;
  // Per input point: hull vertex, or within the tolerance of a supporting face.
  std::vector<char> on_boundary;
  double tolerance = 0.0;
};

// Quickhull. `relative_tolerance` is scaled by the largest absolute
// coordinate to obtain the plane-distance tolerance. Inputs of lower affine
// dimension are handled in their own subspace (2D hull in the best-fit plane,
// segment end points, or a single location).
ConvexHull convex_hull(std::span<const Point3> points, double relative_tolerance = 1e-7);

}  // namespace prednbv

#endif  // PREDNBV_CONVEX_HULL_HPP_
