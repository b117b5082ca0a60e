// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0

#include "prednbv/sensor.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "prednbv/error.hpp"

namespace prednbv {

bool is_valid_sensing_pose(const SceneModel& scene, const Point3& position,
                           const CameraIntrinsics& intrinsics) {
  for (const auto& box : scene.obstacles) {
    if (box.contains(position)) return false;
  }
  const double r2 = intrinsics.min_range * intrinsics.min_range;
  for (const auto& p : scene.object) {
    if ((p - position).squaredNorm() < r2) return false;
  }
  return true;
}

namespace {

PointCloud obstacle_returns(const SceneModel& scene, const Pose& pose, const SensorConfig& cfg) {
  std::vector<Point3> hits;
  if (scene.obstacles.empty()) return PointCloud(std::move(hits));
  const auto& in = cfg.intrinsics;
  const double half_h = in.horizontal_fov * std::numbers::pi / 360.0;
  const double half_v = in.vertical_fov * std::numbers::pi / 360.0;
  const Eigen::Matrix3d rot = pose.rotation();
  for (int iv = 0; iv < cfg.obstacle_rays_v; ++iv) {
    const double ev = -half_v + (2.0 * half_v) * (iv + 0.5) / cfg.obstacle_rays_v;
    for (int ih = 0; ih < cfg.obstacle_rays_h; ++ih) {
      const double az = -half_h + (2.0 * half_h) * (ih + 0.5) / cfg.obstacle_rays_h;
      const Point3 dir = rot * Point3(1.0, std::tan(az), std::tan(ev)).normalized();
      double best = std::numeric_limits<double>::infinity();
      for (const auto& box : scene.obstacles) {
        if (auto t = box.ray_hit(pose.position(), dir, in.min_range, in.max_range)) {
          best = std::min(best, *t);
        }
      }
      if (std::isfinite(best)) hits.push_back(pose.position() + best * dir);
    }
  }
  return PointCloud(std::move(hits));
}

}  // namespace

Observation sense(const SceneModel& scene, const Pose& pose, const SensorConfig& config,
                  std::uint64_t seed, int step) {
  config.intrinsics.validate();
  if (!(config.noise_sigma >= 0.0)) fail(ErrorCode::kParameter, "noise_sigma must be >= 0");
  if (!is_valid_sensing_pose(scene, pose.position(), config.intrinsics)) {
    fail(ErrorCode::kInvalidPose, "sensing pose lies inside the object or an obstacle");
  }
  Observation obs;
  obs.pose = pose;
  obs.step = step;

  const VisibilityResult vis =
      visible_from(scene.object, pose, config.intrinsics, config.radius_scale);
  PointCloud seen = scene.object.select(vis.visible_indices);
  if (config.noise_sigma > 0.0 && !seen.empty()) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> jitter(0.0, config.noise_sigma);
    std::vector<Point3> noisy;
    noisy.reserve(seen.size());
    for (const auto& p : seen) {
      const double dx = jitter(rng), dy = jitter(rng), dz = jitter(rng);
      noisy.push_back(p + Point3(dx, dy, dz));
    }
    seen = PointCloud(std::move(noisy));
  }
  obs.cloud = voxel_filter(seen, config.leaf);
  obs.obstacle_hits = obstacle_returns(scene, pose, config);
  return obs;
}

}  // namespace prednbv
