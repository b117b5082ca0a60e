// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0
//
// Point visibility from a viewpoint: hidden point removal by spherical
// flipping, camera frustum culling, and the prediction-driven view gain.

#ifndef PREDNBV_VISIBILITY_HPP_
#define PREDNBV_VISIBILITY_HPP_

#include <cstddef>
#include <memory>
#include <vector>

#include "prednbv/geometry.hpp"

namespace prednbv {

struct CameraIntrinsics {
  double horizontal_fov = 90.0;  // degrees
  double vertical_fov = 60.0;    // degrees
  double max_range = 100.0;      // meters
  double min_range = 0.5;        // meters

  // Throws kParameter when the invariants do not hold.
  void validate() const;
};

struct VisibilityResult {
  std::vector<std::size_t> visible_indices;  // ascending
  std::size_t count() const noexcept { return visible_indices.size(); }
};

inline constexpr double kDefaultRadiusScale = 100.0;

// Katz-style operator: flip the viewpoint-centred cloud about a sphere of
// radius radius_scale * max|p| and keep the points whose images lie on the
// convex hull of the flipped set plus the viewpoint.
VisibilityResult hidden_point_removal(const PointCloud& cloud, const Point3& viewpoint,
                                      double radius_scale = kDefaultRadiusScale);

// Points inside both half angles and the [min_range, max_range] shell.
// Boundary values are kept; points with no forward component are dropped.
VisibilityResult frustum_cull(const PointCloud& cloud, const Pose& pose,
                              const CameraIntrinsics& intrinsics);

// frustum_cull followed by hidden_point_removal on the surviving points;
// indices refer to `cloud`.
VisibilityResult visible_from(const PointCloud& cloud, const Pose& pose,
                              const CameraIntrinsics& intrinsics,
                              double radius_scale = kDefaultRadiusScale);

// Which points stand in as occluders when counting novel visible points.
enum class GainOcclusion {
  kPredictedCloud,  // novel points may be hidden by any predicted point
  kNovelOnly,       // visibility evaluated on the novel points alone
};

/// Counts predicted points that are not yet observed and would be seen from a
/// candidate pose. Construct once per planning step and query per candidate.
class GainEvaluator {
 public:
  GainEvaluator(const PointCloud& predicted, const PointCloud& observed, double distinct_tol,
                GainOcclusion occlusion = GainOcclusion::kPredictedCloud,
                double radius_scale = kDefaultRadiusScale);

  std::size_t novel_count() const noexcept { return novel_.size(); }
  const PointCloud& novel() const noexcept { return novel_; }

  std::size_t gain(const Pose& candidate, const CameraIntrinsics& intrinsics) const;

 private:
  PointCloud predicted_;
  PointCloud novel_;
  std::vector<char> is_novel_;
  GainOcclusion occlusion_;
  double radius_scale_;
};

std::size_t info_gain(const PointCloud& predicted, const PointCloud& observed,
                      const Pose& candidate, const CameraIntrinsics& intrinsics,
                      double distinct_tol,
                      GainOcclusion occlusion = GainOcclusion::kPredictedCloud);

}  // namespace prednbv

#endif  // PREDNBV_VISIBILITY_HPP_
