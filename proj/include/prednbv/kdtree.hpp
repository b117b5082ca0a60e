// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PREDNBV_KDTREE_HPP_
#define PREDNBV_KDTREE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "prednbv/geometry.hpp"

namespace prednbv {

enum class Norm { kL1, kL2Squared };

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;  // in the metric of the query
};

/// Static kd-tree over a borrowed point array; answers are exact. The point
/// storage must outlive the tree.
class KdTree {
 public:
  explicit KdTree(std::span<const Point3> points);

  std::size_t size() const noexcept { return points_.size(); }

  // Precondition: tree not empty.
  Neighbor nearest(const Point3& q, Norm norm = Norm::kL2Squared) const;

  // True iff some point lies within Euclidean `radius` (inclusive).
  bool any_within(const Point3& q, double radius) const;

 private:
  struct Node {
    std::uint32_t begin, end;    // range in order_
    std::int32_t left = -1, right = -1;
    int axis = -1;               // -1 for leaves
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  template <class Dist>
  void search(std::int32_t node, const Point3& q, Dist dist, Neighbor& best) const;

  std::span<const Point3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace prednbv

#endif  // PREDNBV_KDTREE_HPP_
