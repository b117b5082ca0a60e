// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0

#include "prednbv/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "prednbv/error.hpp"
#include "voxel_key.hpp"

namespace prednbv {

namespace {

bool finite(const Point3& p) { return p.allFinite(); }

}  // namespace

PointCloud::PointCloud(std::vector<Point3> points, Frame frame)
    : points_(std::move(points)), frame_(frame) {
  for (const auto& p : points_) {
    if (!finite(p)) fail(ErrorCode::kParameter, "point cloud contains a non-finite coordinate");
  }
}

void PointCloud::append(const PointCloud& other) {
  if (!other.empty() && !empty() && other.frame_ != frame_) {
    fail(ErrorCode::kParameter, "cannot append clouds in different frames");
  }
  if (empty()) frame_ = other.frame_;
  points_.insert(points_.end(), other.points_.begin(), other.points_.end());
}

void PointCloud::push_back(const Point3& p) {
  if (!finite(p)) fail(ErrorCode::kParameter, "non-finite point");
  points_.push_back(p);
}

PointCloud PointCloud::select(std::span<const std::size_t> indices) const {
  std::vector<Point3> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(points_.at(i));
  PointCloud result;
  result.points_ = std::move(out);
  result.frame_ = frame_;
  return result;
}

Pose::Pose(const Point3& position, const Eigen::Quaterniond& orientation)
    : position_(position), orientation_(orientation) {
  if (!position.allFinite() || !orientation.coeffs().allFinite()) {
    fail(ErrorCode::kParameter, "pose has non-finite components");
  }
  const double n = orientation_.norm();
  if (std::abs(n - 1.0) > 1e-6) {
    fail(ErrorCode::kParameter, "pose orientation is not a unit quaternion");
  }
  orientation_.normalize();
}

Pose Pose::from_yaw_pitch(const Point3& position, double yaw, double pitch) {
  Eigen::Quaterniond q = Eigen::AngleAxisd(yaw, Point3::UnitZ()) *
                         Eigen::AngleAxisd(pitch, Point3::UnitY());
  return Pose(position, q);
}

Pose Pose::look_at(const Point3& position, const Point3& target) {
  const Point3 d = target - position;
  if (d.norm() <= 0.0) fail(ErrorCode::kParameter, "look_at target coincides with position");
  const double yaw = std::atan2(d.y(), d.x());
  const double pitch = std::atan2(-d.z(), std::hypot(d.x(), d.y()));
  return from_yaw_pitch(position, yaw, pitch);
}

double Pose::yaw() const {
  const Point3 f = forward();
  return std::atan2(f.y(), f.x());
}

double Pose::pitch() const {
  const Point3 f = forward();
  return std::atan2(-f.z(), std::hypot(f.x(), f.y()));
}

Pose Pose::inverse() const {
  const Eigen::Quaterniond qi = orientation_.conjugate();
  return Pose(-(qi * position_), qi);
}

Pose Pose::compose(const Pose& other) const {
  return Pose(orientation_ * other.position_ + position_,
              (orientation_ * other.orientation_).normalized());
}

PointCloud voxel_filter(const PointCloud& cloud, double leaf) {
  if (!(leaf > 0.0) || !std::isfinite(leaf)) {
    fail(ErrorCode::kParameter, "voxel leaf must be positive");
  }
  struct Acc {
    Point3 sum = Point3::Zero();
    std::size_t count = 0;
  };
  std::unordered_map<VoxelKey, std::size_t, VoxelKeyHash> slot;
  std::vector<Acc> acc;
  slot.reserve(cloud.size());
  for (const auto& p : cloud) {
    const VoxelKey key = voxel_key(p, leaf);
    auto [it, inserted] = slot.try_emplace(key, acc.size());
    if (inserted) acc.emplace_back();
    Acc& a = acc[it->second];
    a.sum += p;
    ++a.count;
  }
  std::vector<Point3> out;
  out.reserve(acc.size());
  for (const auto& a : acc) out.push_back(a.sum / static_cast<double>(a.count));
  return PointCloud(std::move(out), cloud.frame());
}

PointCloud transform(const PointCloud& cloud, const Pose& pose) {
  const Eigen::Matrix3d r = pose.rotation();
  std::vector<Point3> out;
  out.reserve(cloud.size());
  for (const auto& p : cloud) out.push_back(r * p + pose.position());
  return PointCloud(std::move(out), cloud.frame());
}

Point3 centroid(std::span<const Point3> points) {
  if (points.empty()) fail(ErrorCode::kEmptyInput, "centroid of an empty point set");
  Point3 sum = Point3::Zero();
  for (const auto& p : points) sum += p;
  return sum / static_cast<double>(points.size());
}

CloudStats cloud_stats(const PointCloud& cloud) {
  if (cloud.empty()) fail(ErrorCode::kEmptyInput, "cloud_stats of an empty cloud");
  CloudStats s;
  s.centroid = centroid(cloud.points());
  double zmin = cloud[0].z();
  double zmax = zmin;
  for (const auto& p : cloud) {
    s.d_max = std::max(s.d_max, (p - s.centroid).norm());
    zmin = std::min(zmin, p.z());
    zmax = std::max(zmax, p.z());
  }
  s.z_range = zmax - zmin;
  return s;
}

}  // namespace prednbv
