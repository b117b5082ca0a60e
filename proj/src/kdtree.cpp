// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0

#include "prednbv/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "prednbv/error.hpp"

namespace prednbv {

namespace {
constexpr std::uint32_t kLeafSize = 8;
}

KdTree::KdTree(std::span<const Point3> points) : points_(points), order_(points.size()) {
  if (points.size() >= std::numeric_limits<std::uint32_t>::max()) {
    fail(ErrorCode::kParameter, "kd-tree input too large");
  }
  std::iota(order_.begin(), order_.end(), 0u);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 1);
    build(0, static_cast<std::uint32_t>(points_.size()));
  }
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return id;

  Point3 lo = points_[order_[begin]];
  Point3 hi = lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all coincident

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return points_[a][axis] < points_[b][axis];
                   });
  const double split = points_[order_[mid]][axis];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  Node& n = nodes_[id];
  n.axis = axis;
  n.split = split;
  n.left = left;
  n.right = right;
  return id;
}

template <class Dist>
void KdTree::search(std::int32_t node_id, const Point3& q, Dist dist, Neighbor& best) const {
  const Node& n = nodes_[node_id];
  if (n.axis < 0) {
    for (std::uint32_t i = n.begin; i < n.end; ++i) {
      const double d = dist.full(q, points_[order_[i]]);
      if (d < best.distance || (d == best.distance && order_[i] < best.index)) {
        best.distance = d;
        best.index = order_[i];
      }
    }
    return;
  }
  const double diff = q[n.axis] - n.split;
  const std::int32_t first = diff < 0 ? n.left : n.right;
  const std::int32_t second = diff < 0 ? n.right : n.left;
  search(first, q, dist, best);
  // Points equal to the split value may sit on either side.
  if (dist.axis(diff) <= best.distance) search(second, q, dist, best);
}

namespace {

struct L2Sq {
  double full(const Point3& a, const Point3& b) const { return (a - b).squaredNorm(); }
  double axis(double d) const { return d * d; }
};

struct L1 {
  double full(const Point3& a, const Point3& b) const { return (a - b).cwiseAbs().sum(); }
  double axis(double d) const { return std::abs(d); }
};

}  // namespace

Neighbor KdTree::nearest(const Point3& q, Norm norm) const {
  if (points_.empty()) fail(ErrorCode::kEmptyInput, "nearest-neighbour query on an empty tree");
  Neighbor best{0, std::numeric_limits<double>::infinity()};
  if (norm == Norm::kL1) {
    search(0, q, L1{}, best);
  } else {
    search(0, q, L2Sq{}, best);
  }
  return best;
}

bool KdTree::any_within(const Point3& q, double radius) const {
  if (points_.empty()) return false;
  return nearest(q).distance <= radius * radius;
}

}  // namespace prednbv
