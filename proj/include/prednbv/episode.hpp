// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0
//
// Closed-loop reconstruction episodes for the prediction-driven planner and
// the frontier baseline.

#ifndef PREDNBV_EPISODE_HPP_
#define PREDNBV_EPISODE_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prednbv/occupancy.hpp"
#include "prednbv/planner.hpp"
#include "prednbv/predictor.hpp"
#include "prednbv/scene.hpp"

namespace prednbv {

struct Trajectory {
  std::vector<Pose> poses;
  double cumulative_length = 0.0;
  std::vector<std::size_t> per_step_observed_counts;  // cumulative union sizes
};

struct StepRecord {
  int step = 0;
  Pose pose;
  std::size_t info_gain = 0;   // predicted gain of the chosen view (0 for the start)
  std::size_t max_gain = 0;
  std::size_t candidate = 0;   // index into the candidate set (or frontier cluster)
  std::size_t candidates = 0;  // admissible candidates this step
  double path_length = 0.0;
  std::vector<Point3> path;
  std::size_t observed = 0;
  double coverage = 0.0;
  bool euclidean_fallback = false;
  bool predictor_fallback = false;
};

enum class Termination { kMaxSteps, kConverged, kZeroGain, kNoCandidates, kExplorationComplete };
const char* to_string(Termination t);

struct EpisodeReport {
  std::string scene;
  std::string method;
  std::uint64_t seed = 0;
  Trajectory trajectory;
  PointCloud final_observed;
  double coverage = 0.0;
  double total_distance = 0.0;
  int steps = 0;
  std::vector<StepRecord> per_step;  // entry 0 is the start view
  Termination termination = Termination::kMaxSteps;
};

nlohmann::json to_json(const EpisodeReport& report);

// Deterministic start: random azimuth at 1.5 d_max from the object centroid,
// at the centroid height, looking at it. Rotates in 10 degree steps past
// invalid poses.
Pose start_pose(const SceneModel& scene, const PlannerConfig& cfg, std::uint64_t seed);

// Adds the points of `incoming` whose voxel holds no point of `observed` yet.
// Existing points never move, so coverage cannot drop.
PointCloud merge_observation(const PointCloud& observed, const PointCloud& incoming, double leaf);

// Grid used by both methods: centred on the first observation, half extent
// max(4 d_max, 2 |start - centroid|) of that observation.
OccupancyGrid episode_grid(const PointCloud& first, const Pose& start, double resolution);

EpisodeReport run_episode(const SceneModel& scene, const Pose& start, const PredictorKind& kind,
                          const PlannerConfig& cfg, std::uint64_t seed = 0);

struct BaselineChoice {
  Pose pose;
  Path path;
  std::size_t cluster = 0;  // index into frontier_clusters(grid)
  double score = 0.0;
};

// score = cluster size / (1 + |cluster centroid - observed centroid|).
double frontier_score(const FrontierCluster& cluster, const Point3& observed_centroid);

// Best-scoring reachable frontier, viewed from 1.5 d_max(observed) out along
// the centroid -> frontier direction, snapped to the nearest free cell and
// facing the observed centroid. `admissible` can veto view positions.
// Throws kExplorationComplete when no frontier yields a reachable view.
BaselineChoice baseline_select(const OccupancyGrid& grid, const PointCloud& observed,
                               const Pose& current, const PlannerConfig& cfg,
                               const std::function<bool(const Point3&)>& admissible = {});

EpisodeReport run_baseline_episode(const SceneModel& scene, const Pose& start,
                                   const PlannerConfig& cfg, std::uint64_t seed = 0);

}  // namespace prednbv

#endif  // PREDNBV_EPISODE_HPP_
