// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PREDNBV_SENSOR_HPP_
#define PREDNBV_SENSOR_HPP_

#include <cstdint>

#include "prednbv/geometry.hpp"
#include "prednbv/scene.hpp"
#include "prednbv/visibility.hpp"

namespace prednbv {

struct SensorConfig {
  CameraIntrinsics intrinsics;
  double noise_sigma = 0.0;  // meters, isotropic per coordinate
  double leaf = 0.1;         // voxel leaf of the returned observation
  double radius_scale = kDefaultRadiusScale;
  // Rays cast against obstacles, per image axis.
  int obstacle_rays_h = 48;
  int obstacle_rays_v = 32;
};

struct Observation {
  PointCloud cloud;           // segmented object points, world frame
  PointCloud obstacle_hits;   // obstacle surface returns, world frame; never in `cloud`
  Pose pose;
  int step = 0;
};

// A pose is rejected when it lies inside an obstacle or within min_range of
// an object point.
bool is_valid_sensing_pose(const SceneModel& scene, const Point3& position,
                           const CameraIntrinsics& intrinsics);

Observation sense(const SceneModel& scene, const Pose& pose, const SensorConfig& config,
                  std::uint64_t seed, int step = 0);

}  // namespace prednbv

#endif  // PREDNBV_SENSOR_HPP_
