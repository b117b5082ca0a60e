// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0
//
// Point clouds, rigid poses and the cloud statistics consumed by the planner.

#ifndef PREDNBV_GEOMETRY_HPP_
#define PREDNBV_GEOMETRY_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace prednbv {

using Point3 = Eigen::Vector3d;

enum class Frame { kWorld, kSensor };

/// Unordered collection of finite 3D points tagged with the frame they live in.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::vector<Point3> points, Frame frame = Frame::kWorld);

  std::span<const Point3> points() const noexcept { return points_; }
  const Point3& operator[](std::size_t i) const noexcept { return points_[i]; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  Frame frame() const noexcept { return frame_; }

  auto begin() const noexcept { return points_.begin(); }
  auto end() const noexcept { return points_.end(); }

  // Appends the points of `other`; frames must match.
  void append(const PointCloud& other);
  void push_back(const Point3& p);

  // Subset in the order given by `indices`.
  PointCloud select(std::span<const std::size_t> indices) const;

  // Points as an owned vector.
  const std::vector<Point3>& data() const noexcept { return points_; }

 private:
  std::vector<Point3> points_;
  Frame frame_ = Frame::kWorld;
};

/// Sensor placement: position plus unit quaternion orientation. The sensor
/// frame looks along +x with +z up.
class Pose {
 public:
  Pose() = default;
  Pose(const Point3& position, const Eigen::Quaterniond& orientation);

  static Pose identity() { return Pose{}; }
  static Pose translation(const Point3& t) {
    return Pose(t, Eigen::Quaterniond::Identity());
  }
  // Orientation from yaw (about world z) then pitch (about the rotated y,
  // positive pitch looks down), both in radians.
  static Pose from_yaw_pitch(const Point3& position, double yaw, double pitch);
  // Forward axis pointed at `target`, roll zero. `target` must differ from
  // `position`.
  static Pose look_at(const Point3& position, const Point3& target);

  const Point3& position() const noexcept { return position_; }
  const Eigen::Quaterniond& orientation() const noexcept { return orientation_; }

  Eigen::Matrix3d rotation() const { return orientation_.toRotationMatrix(); }
  Point3 forward() const { return orientation_ * Point3::UnitX(); }
  double yaw() const;
  double pitch() const;

  Point3 apply(const Point3& p) const { return orientation_ * p + position_; }
  Point3 apply_inverse(const Point3& p) const {
    return orientation_.conjugate() * (p - position_);
  }
  Pose inverse() const;
  // (*this) * other: apply `other` first.
  Pose compose(const Pose& other) const;

 private:
  Point3 position_ = Point3::Zero();
  Eigen::Quaterniond orientation_ = Eigen::Quaterniond::Identity();
};

struct CloudStats {
  Point3 centroid = Point3::Zero();
  double d_max = 0.0;
  double z_range = 0.0;
};

// Centroid-of-voxel downsampling on a grid anchored at the world origin.
// Output order follows the first appearance of each voxel in the input.
PointCloud voxel_filter(const PointCloud& cloud, double leaf);

PointCloud transform(const PointCloud& cloud, const Pose& pose);

CloudStats cloud_stats(const PointCloud& cloud);

Point3 centroid(std::span<const Point3> points);

}  // namespace prednbv

#endif  // PREDNBV_GEOMETRY_HPP_
