// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0
//
// Shape completion seam: observed partial cloud in, completed cloud out.

#ifndef PREDNBV_PREDICTOR_HPP_
#define PREDNBV_PREDICTOR_HPP_

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prednbv/geometry.hpp"
#include "prednbv/scene.hpp"

namespace prednbv {

enum class TranslationUnit { kFractionOfDmax, kMeters };

struct PerturbationLevel {
  double max_rotation = 0.0;     // degrees, [0, 360]
  double max_translation = 0.0;  // see unit
  TranslationUnit unit = TranslationUnit::kFractionOfDmax;

  bool operator==(const PerturbationLevel&) const = default;
};

struct CurriculumSchedule {
  std::vector<PerturbationLevel> levels;

  // Each level must not regress in rotation or translation.
  void validate() const;
};

// The eight rotation/translation pairs used for curriculum fine-tuning.
CurriculumSchedule default_schedule();

struct AppliedPerturbation {
  Point3 rotation_axis = Point3::UnitZ();
  double angle = 0.0;  // radians
  Point3 translation = Point3::Zero();
  Point3 pivot = Point3::Zero();  // centroid of the input

  Point3 apply(const Point3& p) const;
  Point3 invert(const Point3& p) const;
};

struct PerturbResult {
  PointCloud cloud;
  AppliedPerturbation applied;
};

// Rotation by a uniform angle in [0, max_rotation] about a uniform random axis
// through the centroid, then a translation of uniform direction and norm in
// [0, max_translation] (times d_max for fractional levels).
PerturbResult perturb(const PointCloud& cloud, const PerturbationLevel& level,
                      std::uint64_t seed);

/// Completion model interface. predict() never returns an empty cloud.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual PointCloud predict(const PointCloud& observed) = 0;
  virtual std::string name() const = 0;
};

enum class MirrorPlane { kAuto, kX, kY, kZ };

struct PredictorKind {
  enum class Variant { kOracle, kNoisyOracle, kMirror, kExternal };
  Variant variant = Variant::kOracle;
  double dropout = 0.0;   // noisy oracle, [0, 1)
  double jitter = 0.0;    // noisy oracle, meters
  std::uint64_t seed = 0; // noisy oracle
  MirrorPlane plane = MirrorPlane::kAuto;
  std::string endpoint;   // external: "tcp://host:port" or "exec:<shell command>"
  std::chrono::milliseconds timeout{30000};

  void validate() const;
  std::string label() const;
};

PredictorKind predictor_kind_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PredictorKind& kind);

// Oracle variants need the scene ground truth; `leaf` voxel-filters it.
std::unique_ptr<Predictor> make_predictor(const PredictorKind& kind, const SceneModel& scene,
                                          double leaf);

// Observed cloud plus its reflection through the chosen plane. The auto plane
// is perpendicular to a principal axis and placed at the end of the cloud
// whose boundary cross-section is widest (the likely cut of a partial view).
PointCloud mirror_complete(const PointCloud& observed, MirrorPlane plane);

}  // namespace prednbv

#endif  // PREDNBV_PREDICTOR_HPP_
