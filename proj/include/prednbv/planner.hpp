// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0
//
// Candidate views, the tau-constrained minimum-effort selection rule and the
// stopping rule.

#ifndef PREDNBV_PLANNER_HPP_
#define PREDNBV_PLANNER_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "prednbv/geometry.hpp"
#include "prednbv/occupancy.hpp"
#include "prednbv/rrt.hpp"
#include "prednbv/sensor.hpp"
#include "prednbv/visibility.hpp"

namespace prednbv {

enum class DistanceMode { kRrt, kEuclidean };

struct PlannerConfig {
  double tau = 0.95;
  double stop_ratio = 0.95;
  double angle_step = 30.0;  // degrees, divides 360
  int max_steps = 20;
  double distinct_tol = 0.1;  // predicted points closer than this to an observation are known
  DistanceMode distance_mode = DistanceMode::kRrt;
  GainOcclusion occlusion = GainOcclusion::kPredictedCloud;
  SensorConfig sensor;
  double grid_resolution = 1.0;
  RrtParams rrt;

  // Coverage of the ground truth counts points within this distance.
  double coverage_tol() const { return 2.0 * sensor.leaf; }
  void validate() const;
};

PlannerConfig planner_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PlannerConfig& cfg);

struct CandidateSet {
  std::vector<Pose> poses;
  CloudStats source_stats;
};

// Middle ring: radius 1.5 d_max at the centroid height. Upper and lower rings:
// radius 1.2 d_max at centroid z +- 0.25 z_range. Ring order middle, upper,
// lower; azimuths k * angle_step from +x. A flat prediction (z_range = 0)
// yields the middle ring and one 1.2 d_max ring.
CandidateSet generate_candidates(const PointCloud& predicted, const PlannerConfig& cfg);

// gain >= tau * max_gain, decided exactly.
bool meets_threshold(std::size_t gain, std::size_t max_gain, double tau);

// Candidate distance, or nullopt when unreachable.
using DistanceFn = std::function<std::optional<double>(std::size_t)>;

struct RuleResult {
  std::size_t index = 0;
  double distance = 0.0;
  std::size_t evaluated = 0;  // distance() calls made
};

// Among candidates with meets_threshold(gain, max gain, tau), the one with the
// least distance; ties go to the higher gain, then the lower index.
// lower_bounds[i] must not exceed distance(i); feasible candidates are visited
// in ascending bound order and the scan stops once no remaining candidate can
// win. Returns nullopt when every feasible candidate is unreachable.
// Throws kEmptyInput on no candidates and kZeroGain when every gain is zero.
std::optional<RuleResult> select_by_rule(std::span<const std::size_t> gains,
                                         std::span<const double> lower_bounds, double tau,
                                         const DistanceFn& distance);

struct NbvChoice {
  std::size_t index = 0;
  Pose pose;
  Path path;  // executed route from the current position
  std::size_t gain = 0;
  std::size_t max_gain = 0;
  std::vector<std::size_t> gains;  // per candidate
  bool euclidean_fallback = false;  // no candidate was reachable by RRT
  std::size_t planned = 0;          // candidates whose distance was computed
};

NbvChoice select_nbv(const CandidateSet& candidates, const Pose& current,
                     const PointCloud& predicted, const PointCloud& observed,
                     const OccupancyGrid& grid, const PlannerConfig& cfg);

// prev_count is nullopt on the first step.
bool should_stop(std::optional<std::size_t> prev_count, std::size_t curr_count,
                 const PlannerConfig& cfg);

}  // namespace prednbv

#endif  // PREDNBV_PLANNER_HPP_
