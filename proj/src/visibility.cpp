// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0

#include "prednbv/visibility.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "prednbv/convex_hull.hpp"
#include "prednbv/error.hpp"
#include "prednbv/kdtree.hpp"

namespace prednbv {

namespace {

constexpr double kHullTolerance = 1e-7;

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

}  // namespace

void CameraIntrinsics::validate() const {
  if (!(horizontal_fov > 0.0 && horizontal_fov < 180.0) ||
      !(vertical_fov > 0.0 && vertical_fov < 180.0)) {
    fail(ErrorCode::kParameter, "field of view must lie in (0, 180) degrees");
  }
  if (!(min_range >= 0.0 && min_range < max_range)) {
    fail(ErrorCode::kParameter, "camera range must satisfy 0 <= min < max");
  }
}

VisibilityResult hidden_point_removal(const PointCloud& cloud, const Point3& viewpoint,
                                      double radius_scale) {
  if (cloud.empty()) fail(ErrorCode::kEmptyInput, "hidden_point_removal: empty cloud");
  if (!(radius_scale > 1.0)) fail(ErrorCode::kParameter, "radius_scale must exceed 1");
  const std::size_t n = cloud.size();

  std::vector<Point3> flipped(n + 1);
  std::vector<double> norms(n);
  double max_norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    flipped[i] = cloud[i] - viewpoint;
    norms[i] = flipped[i].norm();
    if (norms[i] <= 1e-9) {
      fail(ErrorCode::kDegenerateViewpoint, "viewpoint coincides with a cloud point");
    }
    max_norm = std::max(max_norm, norms[i]);
  }
  const double radius = radius_scale * max_norm;
  for (std::size_t i = 0; i < n; ++i) {
    flipped[i] += (2.0 * (radius - norms[i]) / norms[i]) * flipped[i];
  }
  flipped[n] = Point3::Zero();

  const ConvexHull hull = convex_hull(flipped, kHullTolerance);
  VisibilityResult r;
  for (std::size_t i = 0; i < n; ++i) {
    if (hull.on_boundary[i]) r.visible_indices.push_back(i);
  }
  return r;
}

VisibilityResult frustum_cull(const PointCloud& cloud, const Pose& pose,
                              const CameraIntrinsics& intrinsics) {
  intrinsics.validate();
  const double half_h = deg2rad(intrinsics.horizontal_fov) / 2.0;
  const double half_v = deg2rad(intrinsics.vertical_fov) / 2.0;
  const Eigen::Matrix3d rt = pose.rotation().transpose();
  VisibilityResult r;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3 q = rt * (cloud[i] - pose.position());
    if (q.x() <= 0.0) continue;
    const double range = q.norm();
    if (range < intrinsics.min_range || range > intrinsics.max_range) continue;
    if (std::abs(std::atan2(q.y(), q.x())) > half_h) continue;
    if (std::abs(std::atan2(q.z(), q.x())) > half_v) continue;
    r.visible_indices.push_back(i);
  }
  return r;
}

VisibilityResult visible_from(const PointCloud& cloud, const Pose& pose,
                              const CameraIntrinsics& intrinsics, double radius_scale) {
  const VisibilityResult in_view = frustum_cull(cloud, pose, intrinsics);
  VisibilityResult r;
  if (in_view.visible_indices.empty()) return r;
  const PointCloud sub = cloud.select(in_view.visible_indices);
  const VisibilityResult hpr = hidden_point_removal(sub, pose.position(), radius_scale);
  r.visible_indices.reserve(hpr.count());
  for (std::size_t k : hpr.visible_indices) r.visible_indices.push_back(in_view.visible_indices[k]);
  return r;
}

GainEvaluator::GainEvaluator(const PointCloud& predicted, const PointCloud& observed,
                             double distinct_tol, GainOcclusion occlusion, double radius_scale)
    : predicted_(predicted), occlusion_(occlusion), radius_scale_(radius_scale) {
  if (predicted.empty()) fail(ErrorCode::kEmptyInput, "info_gain: empty prediction");
  if (!(distinct_tol > 0.0)) fail(ErrorCode::kParameter, "distinct_tol must be positive");
  is_novel_.assign(predicted.size(), 1);
  std::vector<std::size_t> novel_idx;
  if (!observed.empty()) {
    const KdTree tree(observed.points());
    for (std::size_t i = 0; i < predicted.size(); ++i) {
      is_novel_[i] = tree.any_within(predicted[i], distinct_tol) ? 0 : 1;
    }
  }
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (is_novel_[i]) novel_idx.push_back(i);
  }
  novel_ = predicted.select(novel_idx);
}

std::size_t GainEvaluator::gain(const Pose& candidate, const CameraIntrinsics& intrinsics) const {
  if (novel_.empty()) return 0;
  if (occlusion_ == GainOcclusion::kNovelOnly) {
    return visible_from(novel_, candidate, intrinsics, radius_scale_).count();
  }
  const VisibilityResult in_view = frustum_cull(predicted_, candidate, intrinsics);
  // Nothing novel in view: the hull is not needed.
  if (std::none_of(in_view.visible_indices.begin(), in_view.visible_indices.end(),
                   [&](std::size_t i) { return is_novel_[i] != 0; })) {
    return 0;
  }
  const PointCloud sub = predicted_.select(in_view.visible_indices);
  const VisibilityResult hpr = hidden_point_removal(sub, candidate.position(), radius_scale_);
  std::size_t count = 0;
  for (std::size_t k : hpr.visible_indices) count += is_novel_[in_view.visible_indices[k]] ? 1 : 0;
  return count;
}

std::size_t info_gain(const PointCloud& predicted, const PointCloud& observed,
                      const Pose& candidate, const CameraIntrinsics& intrinsics,
                      double distinct_tol, GainOcclusion occlusion) {
  return GainEvaluator(predicted, observed, distinct_tol, occlusion).gain(candidate, intrinsics);
}

}  // namespace prednbv
