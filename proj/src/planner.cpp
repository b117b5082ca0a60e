// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0

#include "prednbv/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "prednbv/error.hpp"

namespace prednbv {

void PlannerConfig::validate() const {
  if (!(tau > 0.0 && tau <= 1.0)) fail(ErrorCode::kParameter, "tau must lie in (0, 1]");
  if (!(stop_ratio > 0.0 && stop_ratio <= 1.0)) {
    fail(ErrorCode::kParameter, "stop_ratio must lie in (0, 1]");
  }
  if (!(angle_step > 0.0 && angle_step <= 360.0) || std::fmod(360.0, angle_step) != 0.0) {
    fail(ErrorCode::kParameter, fmt::format("angle_step {} does not divide 360", angle_step));
  }
  if (max_steps < 0) fail(ErrorCode::kParameter, "max_steps must be non-negative");
  if (!(distinct_tol > 0.0)) fail(ErrorCode::kParameter, "distinct_tol must be positive");
  if (!(sensor.leaf > 0.0)) fail(ErrorCode::kParameter, "leaf must be positive");
  if (!(sensor.noise_sigma >= 0.0)) fail(ErrorCode::kParameter, "noise_sigma must be >= 0");
  if (!(sensor.radius_scale > 1.0)) fail(ErrorCode::kParameter, "radius_scale must exceed 1");
  if (!(grid_resolution > 0.0)) fail(ErrorCode::kParameter, "grid_resolution must be positive");
  if (!(rrt.step > 0.0) || rrt.max_iters <= 0) fail(ErrorCode::kParameter, "bad rrt parameters");
  sensor.intrinsics.validate();
}

PlannerConfig planner_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorCode::kParse, "planner config must be an object");
  PlannerConfig c;
  try {
    c.tau = j.value("tau", c.tau);
    c.stop_ratio = j.value("stop_ratio", c.stop_ratio);
    c.angle_step = j.value("angle_step", c.angle_step);
    c.max_steps = j.value("max_steps", c.max_steps);
    c.distinct_tol = j.value("distinct_tol", c.distinct_tol);
    const auto mode = j.value("distance_mode", std::string("rrt"));
    if (mode == "rrt") c.distance_mode = DistanceMode::kRrt;
    else if (mode == "euclidean") c.distance_mode = DistanceMode::kEuclidean;
    else fail(ErrorCode::kParse, fmt::format("unknown distance_mode '{}'", mode));
    const auto occ = j.value("occlusion", std::string("predicted"));
    if (occ == "predicted") c.occlusion = GainOcclusion::kPredictedCloud;
    else if (occ == "novel") c.occlusion = GainOcclusion::kNovelOnly;
    else fail(ErrorCode::kParse, fmt::format("unknown occlusion '{}'", occ));
    c.sensor.leaf = j.value("leaf", c.sensor.leaf);
    c.sensor.noise_sigma = j.value("noise_sigma", c.sensor.noise_sigma);
    c.sensor.radius_scale = j.value("radius_scale", c.sensor.radius_scale);
    c.sensor.intrinsics.horizontal_fov = j.value("horizontal_fov", c.sensor.intrinsics.horizontal_fov);
    c.sensor.intrinsics.vertical_fov = j.value("vertical_fov", c.sensor.intrinsics.vertical_fov);
    c.sensor.intrinsics.min_range = j.value("min_range", c.sensor.intrinsics.min_range);
    c.sensor.intrinsics.max_range = j.value("max_range", c.sensor.intrinsics.max_range);
    c.grid_resolution = j.value("grid_resolution", c.grid_resolution);
    c.rrt.step = j.value("rrt_step", c.rrt.step);
    c.rrt.max_iters = j.value("rrt_max_iters", c.rrt.max_iters);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, fmt::format("planner config: {}", e.what()));
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const PlannerConfig& c) {
  return {{"tau", c.tau},
          {"stop_ratio", c.stop_ratio},
          {"angle_step", c.angle_step},
          {"max_steps", c.max_steps},
          {"distinct_tol", c.distinct_tol},
          {"distance_mode", c.distance_mode == DistanceMode::kRrt ? "rrt" : "euclidean"},
          {"occlusion", c.occlusion == GainOcclusion::kPredictedCloud ? "predicted" : "novel"},
          {"leaf", c.sensor.leaf},
          {"noise_sigma", c.sensor.noise_sigma},
          {"radius_scale", c.sensor.radius_scale},
          {"horizontal_fov", c.sensor.intrinsics.horizontal_fov},
          {"vertical_fov", c.sensor.intrinsics.vertical_fov},
          {"min_range", c.sensor.intrinsics.min_range},
          {"max_range", c.sensor.intrinsics.max_range},
          {"grid_resolution", c.grid_resolution},
          {"rrt_step", c.rrt.step},
          {"rrt_max_iters", c.rrt.max_iters}};
}

CandidateSet generate_candidates(const PointCloud& predicted, const PlannerConfig& cfg) {
  if (predicted.empty()) fail(ErrorCode::kEmptyInput, "no predicted points to plan around");
  cfg.validate();
  CandidateSet set;
  set.source_stats = cloud_stats(predicted);
  const CloudStats& s = set.source_stats;
  if (!(s.d_max > 0.0)) {
    fail(ErrorCode::kDegenerateViewpoint, "prediction has zero extent; rings are degenerate");
  }
  struct Ring {
    double radius, z;
  };
  std::vector<Ring> rings{{1.5 * s.d_max, s.centroid.z()}};
  if (s.z_range > 0.0) {
    rings.push_back({1.2 * s.d_max, s.centroid.z() + 0.25 * s.z_range});
    rings.push_back({1.2 * s.d_max, s.centroid.z() - 0.25 * s.z_range});
  } else {
    rings.push_back({1.2 * s.d_max, s.centroid.z()});
  }
  const int per_ring = static_cast<int>(std::lround(360.0 / cfg.angle_step));
  for (const Ring& r : rings) {
    for (int k = 0; k < per_ring; ++k) {
      const double a = k * cfg.angle_step * std::numbers::pi / 180.0;
      const Point3 pos(s.centroid.x() + r.radius * std::cos(a),
                       s.centroid.y() + r.radius * std::sin(a), r.z);
      set.poses.push_back(Pose::look_at(pos, s.centroid));
    }
  }
  return set;
}

bool meets_threshold(std::size_t gain, std::size_t max_gain, double tau) {
  // fma rounds once, so the sign of gain - tau * max_gain is exact.
  return std::fma(-tau, static_cast<double>(max_gain), static_cast<double>(gain)) >= 0.0;
}

std::optional<RuleResult> select_by_rule(std::span<const std::size_t> gains,
                                         std::span<const double> lower_bounds, double tau,
                                         const DistanceFn& distance) {
  if (gains.empty()) fail(ErrorCode::kEmptyInput, "no candidates to select from");
  if (lower_bounds.size() != gains.size()) {
    fail(ErrorCode::kCardinality, "gains and bounds differ in length");
  }
  const std::size_t gmax = *std::max_element(gains.begin(), gains.end());
  if (gmax == 0) fail(ErrorCode::kZeroGain, "no candidate observes anything new");

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < gains.size(); ++i) {
    if (meets_threshold(gains[i], gmax, tau)) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return lower_bounds[a] < lower_bounds[b];
  });

  std::optional<RuleResult> best;
  std::size_t evaluated = 0;
  for (std::size_t i : order) {
    if (best && lower_bounds[i] > best->distance) break;
    ++evaluated;
    const std::optional<double> d = distance(i);
    if (!d) continue;
    const bool better = !best || *d < best->distance ||
                        (*d == best->distance &&
                         (gains[i] > gains[best->index] ||
                          (gains[i] == gains[best->index] && i < best->index)));
    if (better) best = RuleResult{i, *d, 0};
  }
  if (best) best->evaluated = evaluated;
  return best;
}

NbvChoice select_nbv(const CandidateSet& candidates, const Pose& current,
                     const PointCloud& predicted, const PointCloud& observed,
                     const OccupancyGrid& grid, const PlannerConfig& cfg) {
  if (candidates.poses.empty()) fail(ErrorCode::kEmptyInput, "candidate set is empty");
  const std::size_t n = candidates.poses.size();
  const GainEvaluator evaluator(predicted, observed, cfg.distinct_tol, cfg.occlusion,
                                cfg.sensor.radius_scale);
  NbvChoice choice;
  choice.gains.resize(n);
  std::vector<double> euclid(n);
  const Point3 from = current.position();
  for (std::size_t i = 0; i < n; ++i) {
    choice.gains[i] = evaluator.gain(candidates.poses[i], cfg.sensor.intrinsics);
    euclid[i] = (candidates.poses[i].position() - from).norm();
  }
  choice.max_gain = *std::max_element(choice.gains.begin(), choice.gains.end());

  std::vector<std::optional<Path>> paths(n);
  const DistanceFn euclidean = [&](std::size_t i) -> std::optional<double> {
    paths[i] = Path{{from, candidates.poses[i].position()}, euclid[i]};
    return euclid[i];
  };
  const DistanceFn planned = [&](std::size_t i) -> std::optional<double> {
    RrtParams p = cfg.rrt;
    p.seed = cfg.rrt.seed * 0x9E3779B97F4A7C15ull + i + 1;
    try {
      paths[i] = rrt_connect(from, candidates.poses[i].position(), grid, p);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kNoPath || e.code() == ErrorCode::kInvalidEndpoint) {
        return std::nullopt;
      }
      throw;
    }
    // A path is never shorter than the straight line; clamp the rounding.
    return std::max(paths[i]->length, euclid[i]);
  };

  std::optional<RuleResult> r;
  if (cfg.distance_mode == DistanceMode::kRrt) {
    r = select_by_rule(choice.gains, euclid, cfg.tau, planned);
  }
  if (!r) {
    choice.euclidean_fallback = cfg.distance_mode == DistanceMode::kRrt;
    r = select_by_rule(choice.gains, euclid, cfg.tau, euclidean);
  }
  choice.index = r->index;
  choice.pose = candidates.poses[r->index];
  choice.path = *paths[r->index];
  choice.gain = choice.gains[r->index];
  choice.planned = r->evaluated;
  return choice;
}

bool should_stop(std::optional<std::size_t> prev_count, std::size_t curr_count,
                 const PlannerConfig& cfg) {
  if (!prev_count || curr_count == 0) return false;
  if (*prev_count > curr_count) fail(ErrorCode::kParameter, "observation count decreased");
  return meets_threshold(*prev_count, curr_count, cfg.stop_ratio);
}

}  // namespace prednbv
