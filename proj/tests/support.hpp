// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared fixtures and independent oracles for the test suites. Nothing in
// here calls into the code paths it is used to check.

#ifndef PREDNBV_TESTS_SUPPORT_HPP_
#define PREDNBV_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <set>
#include <vector>

#include "prednbv/geometry.hpp"

namespace prednbv::testing {

inline PointCloud random_cloud(std::size_t n, std::uint64_t seed, double lo = 0.0,
                               double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Point3> pts;
  for (std::size_t i = 0; i < n; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
  return PointCloud(std::move(pts));
}

inline PointCloud random_sphere(std::size_t n, double radius, const Point3& center,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Point3> pts;
  while (pts.size() < n) {
    Point3 d(g(rng), g(rng), g(rng));
    if (d.norm() < 1e-9) continue;
    pts.push_back(center + radius * d.normalized());
  }
  return PointCloud(std::move(pts));
}

// Near-uniform deterministic sphere sampling (golden-angle spiral).
inline PointCloud fibonacci_sphere(std::size_t n, double radius, const Point3& center) {
  std::vector<Point3> pts;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    const double r = std::sqrt(1.0 - z * z);
    const double a = golden * static_cast<double>(i);
    pts.push_back(center + radius * Point3(r * std::cos(a), r * std::sin(a), z));
  }
  return PointCloud(std::move(pts));
}

// Surface lattice of a cube with `k` samples per edge: 6k^2 - 12k + 8 points.
inline PointCloud cube_lattice(int k, double side, const Point3& min_corner) {
  std::vector<Point3> pts;
  const double step = side / (k - 1);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      for (int l = 0; l < k; ++l) {
        const bool surface = i == 0 || j == 0 || l == 0 || i == k - 1 || j == k - 1 || l == k - 1;
        if (surface) pts.push_back(min_corner + Point3(i * step, j * step, l * step));
      }
    }
  }
  return PointCloud(std::move(pts));
}

// Sphere ray-cast: the straight segment viewpoint -> p stays outside the open
// ball iff the outward normal at p faces the viewer.
inline bool sphere_point_visible(const Point3& p, const Point3& center, const Point3& viewpoint) {
  return (p - center).dot(viewpoint - p) >= 0.0;
}

// Slab test: does the open segment (a, b) cross the box interior shrunk by
// `shrink`?
inline bool segment_hits_box_interior(const Point3& a, const Point3& b, const Point3& lo,
                                      const Point3& hi, double shrink) {
  double t0 = 0.0, t1 = 1.0;
  const Point3 d = b - a;
  for (int k = 0; k < 3; ++k) {
    const double l = lo[k] + shrink, h = hi[k] - shrink;
    if (std::abs(d[k]) < 1e-15) {
      if (a[k] <= l || a[k] >= h) return false;
      continue;
    }
    double ta = (l - a[k]) / d[k], tb = (h - a[k]) / d[k];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 >= t1) return false;
  }
  return true;
}

inline double jaccard(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  const std::set<std::size_t> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::size_t inter = 0;
  for (auto x : sa) inter += sb.count(x);
  const std::size_t uni = sa.size() + sb.size() - inter;
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace prednbv::testing

#endif  // PREDNBV_TESTS_SUPPORT_HPP_
