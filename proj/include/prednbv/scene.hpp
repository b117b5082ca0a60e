// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PREDNBV_SCENE_HPP_
#define PREDNBV_SCENE_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "prednbv/geometry.hpp"

namespace prednbv {

struct Box {
  Point3 min = Point3::Zero();
  Point3 max = Point3::Zero();

  bool contains(const Point3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  // Smallest t in [t_min, t_max] where origin + t * dir enters the box.
  std::optional<double> ray_hit(const Point3& origin, const Point3& dir, double t_min,
                                double t_max) const;
};

/// Ground-truth world: dense object surface plus non-target box obstacles.
struct SceneModel {
  std::string name;
  PointCloud object;
  std::vector<Box> obstacles;

  // Throws kParameter if the object is empty or touches an obstacle interior.
  void validate() const;
};

// Manifest: {"name", "object_ply_path", "obstacles": [{"min": [..], "max": [..]}]}.
// The PLY path is resolved relative to the manifest's directory.
SceneModel load_scene(const std::filesystem::path& manifest);
void save_scene(const std::filesystem::path& manifest, const SceneModel& scene,
                const std::string& ply_file_name);

inline constexpr std::size_t kSuitePoints = 12000;
inline constexpr double kSuiteDmax = 10.0;

// The ten synthetic benchmark objects, centred at the origin and scaled so
// that d_max = kSuiteDmax. Deterministic in `seed`.
std::vector<SceneModel> generate_suite(std::uint64_t seed);

// Writes <name>.ply, <name>.json for every suite scene and an
// experiment.json running both methods over seeds {0, 1, 2}. Returns the
// manifest paths.
std::vector<std::filesystem::path> write_suite(const std::filesystem::path& dir,
                                               std::uint64_t seed);

}  // namespace prednbv

#endif  // PREDNBV_SCENE_HPP_
