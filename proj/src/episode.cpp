// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0

#include "prednbv/episode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <unordered_set>

#include <fmt/format.h>

#include "prednbv/error.hpp"
#include "prednbv/metrics.hpp"
#include "prednbv/sensor.hpp"
#include "voxel_key.hpp"

namespace prednbv {

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t step) {
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ull + step + 0x632BE59BD9B4E019ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

nlohmann::json point_json(const Point3& p) { return {p.x(), p.y(), p.z()}; }

nlohmann::json pose_json(const Pose& pose) {
  const auto& q = pose.orientation();
  return {{"position", point_json(pose.position())}, {"orientation", {q.w(), q.x(), q.y(), q.z()}}};
}

// Shared episode state: sensing, mapping and bookkeeping for both methods.
class EpisodeState {
 public:
  EpisodeState(const SceneModel& scene, const Pose& start, const PlannerConfig& cfg,
               std::uint64_t seed, std::string method)
      : scene_(scene), cfg_(cfg), seed_(seed), grid_(Point3::Zero(), 1.0, {1, 1, 1}) {
    cfg.validate();
    scene.validate();
    if (!is_valid_sensing_pose(scene, start.position(), cfg.sensor.intrinsics)) {
      fail(ErrorCode::kInvalidPose, "start pose is not a valid sensing pose");
    }
    const Observation first = sense(scene, start, cfg.sensor, mix(seed, 0), 0);
    if (first.cloud.empty()) {
      fail(ErrorCode::kStartVisibility, "the object is not visible from the start pose");
    }
    grid_ = episode_grid(first.cloud, start, cfg.grid_resolution);
    integrate_in_place(grid_, first);
    observed_ = first.cloud;
    report_.scene = scene.name;
    report_.method = std::move(method);
    report_.seed = seed;
    StepRecord rec;
    rec.pose = start;
    record(rec);
  }

  const OccupancyGrid& grid() const { return grid_; }
  const PointCloud& observed() const { return observed_; }
  const Pose& current() const { return report_.trajectory.poses.back(); }
  std::size_t count() const { return observed_.size(); }

  // Moves along `path` to `pose`, senses and records. Returns true when the
  // stopping rule fires.
  bool advance(const Pose& pose, const Path& path, StepRecord rec) {
    const std::size_t prev = count();
    const int step = static_cast<int>(report_.per_step.size());
    const Observation obs = sense(scene_, pose, cfg_.sensor, mix(seed_, step), step);
    integrate_in_place(grid_, obs);
    observed_ = merge_observation(observed_, obs.cloud, cfg_.sensor.leaf);
    rec.step = step;
    rec.pose = pose;
    rec.path_length = path.length;
    rec.path = path.waypoints;
    report_.total_distance += path.length;
    record(rec);
    return should_stop(prev, count(), cfg_);
  }

  bool visited(const Point3& p) const {
    for (const auto& pose : report_.trajectory.poses) {
      if ((pose.position() - p).norm() < cfg_.grid_resolution) return true;
    }
    return false;
  }

  bool admissible(const Point3& p) const {
    if (!grid_.contains(p)) return false;
    if (grid_.state_at(p) == CellState::kOccupied) return false;
    return is_valid_sensing_pose(scene_, p, cfg_.sensor.intrinsics);
  }

  RrtParams rrt_params() const {
    RrtParams p = cfg_.rrt;
    p.seed = mix(seed_ ^ cfg_.rrt.seed, 1000 + report_.per_step.size());
    return p;
  }

  EpisodeReport finish(Termination why) {
    report_.termination = why;
    report_.final_observed = observed_;
    report_.coverage = report_.per_step.back().coverage;
    report_.steps = static_cast<int>(report_.per_step.size()) - 1;
    report_.trajectory.cumulative_length = report_.total_distance;
    return std::move(report_);
  }

 private:
  void record(StepRecord& rec) {
    rec.observed = count();
    rec.coverage = coverage(observed_, scene_.object, cfg_.coverage_tol());
    report_.trajectory.poses.push_back(rec.pose);
    report_.trajectory.per_step_observed_counts.push_back(rec.observed);
    report_.per_step.push_back(std::move(rec));
  }

  const SceneModel& scene_;
  const PlannerConfig& cfg_;
  std::uint64_t seed_;
  OccupancyGrid grid_;
  PointCloud observed_;
  EpisodeReport report_;
};

}  // namespace

const char* to_string(Termination t) {
  switch (t) {
    case Termination::kMaxSteps: return "max_steps";
    case Termination::kConverged: return "converged";
    case Termination::kZeroGain: return "zero_gain";
    case Termination::kNoCandidates: return "no_candidates";
    case Termination::kExplorationComplete: return "exploration_complete";
  }
  return "unknown";
}

nlohmann::json to_json(const EpisodeReport& r) {
  nlohmann::json poses = nlohmann::json::array();
  for (const auto& p : r.trajectory.poses) poses.push_back(pose_json(p));
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : r.per_step) {
    nlohmann::json path = nlohmann::json::array();
    for (const auto& w : s.path) path.push_back(point_json(w));
    steps.push_back({{"step", s.step},
                     {"pose", pose_json(s.pose)},
                     {"info_gain", s.info_gain},
                     {"max_gain", s.max_gain},
                     {"candidate", s.candidate},
                     {"candidates", s.candidates},
                     {"path_length", s.path_length},
                     {"path", path},
                     {"observed", s.observed},
                     {"coverage", s.coverage},
                     {"euclidean_fallback", s.euclidean_fallback},
                     {"predictor_fallback", s.predictor_fallback}});
  }
  nlohmann::json cloud = nlohmann::json::array();
  for (const auto& p : r.final_observed) cloud.push_back(point_json(p));
  return {{"scene", r.scene},
          {"method", r.method},
          {"seed", r.seed},
          {"termination", to_string(r.termination)},
          {"steps", r.steps},
          {"coverage", r.coverage},
          {"total_distance", r.total_distance},
          {"points_seen", r.final_observed.size()},
          {"trajectory",
           {{"poses", poses},
            {"cumulative_length", r.trajectory.cumulative_length},
            {"per_step_observed_counts", r.trajectory.per_step_observed_counts}}},
          {"per_step", steps},
          {"final_observed", cloud}};
}

Pose start_pose(const SceneModel& scene, const PlannerConfig& cfg, std::uint64_t seed) {
  const CloudStats s = cloud_stats(scene.object);
  std::mt19937_64 rng(mix(seed, 0xA11CE));
  const double az0 = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
  for (int k = 0; k < 36; ++k) {
    const double az = az0 + k * std::numbers::pi / 18.0;
    const Point3 pos = s.centroid + 1.5 * s.d_max * Point3(std::cos(az), std::sin(az), 0.0);
    if (is_valid_sensing_pose(scene, pos, cfg.sensor.intrinsics)) {
      return Pose::look_at(pos, s.centroid);
    }
  }
  fail(ErrorCode::kInvalidPose, "no valid start pose around the object");
}

PointCloud merge_observation(const PointCloud& observed, const PointCloud& incoming,
                             double leaf) {
  if (!(leaf > 0.0)) fail(ErrorCode::kParameter, "leaf must be positive");
  std::unordered_set<VoxelKey, VoxelKeyHash> seen;
  seen.reserve(observed.size() + incoming.size());
  std::vector<Point3> out;
  out.reserve(observed.size() + incoming.size());
  for (const auto& p : observed) {
    if (seen.insert(voxel_key(p, leaf)).second) out.push_back(p);
  }
  for (const auto& p : incoming) {
    if (seen.insert(voxel_key(p, leaf)).second) out.push_back(p);
  }
  return PointCloud(std::move(out), observed.empty() ? incoming.frame() : observed.frame());
}

OccupancyGrid episode_grid(const PointCloud& first, const Pose& start, double resolution) {
  const CloudStats s = cloud_stats(first);
  const double half =
      std::max(4.0 * s.d_max, 2.0 * (start.position() - s.centroid).norm());
  return OccupancyGrid::centered(s.centroid, std::max(half, 2.0 * resolution), resolution);
}

EpisodeReport run_episode(const SceneModel& scene, const Pose& start, const PredictorKind& kind,
                          const PlannerConfig& cfg, std::uint64_t seed) {
  EpisodeState state(scene, start, cfg, seed, "prednbv-" + kind.label());
  const auto predictor = make_predictor(kind, scene, cfg.sensor.leaf);
  for (int step = 1; step <= cfg.max_steps; ++step) {
    StepRecord rec;
    PointCloud predicted;
    try {
      predicted = predictor->predict(state.observed());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kPredictorUnavailable) throw;
      predicted = mirror_complete(state.observed(), MirrorPlane::kAuto);
      rec.predictor_fallback = true;
    }
    CandidateSet all = generate_candidates(predicted, cfg);
    CandidateSet usable{{}, all.source_stats};
    for (const auto& p : all.poses) {
      if (state.admissible(p.position())) usable.poses.push_back(p);
    }
    if (usable.poses.empty()) return state.finish(Termination::kNoCandidates);
    rec.candidates = usable.poses.size();

    PlannerConfig step_cfg = cfg;
    step_cfg.rrt = state.rrt_params();
    NbvChoice choice;
    try {
      choice = select_nbv(usable, state.current(), predicted, state.observed(), state.grid(),
                          step_cfg);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kZeroGain) return state.finish(Termination::kZeroGain);
      throw;
    }
    rec.info_gain = choice.gain;
    rec.max_gain = choice.max_gain;
    rec.candidate = choice.index;
    rec.euclidean_fallback = choice.euclidean_fallback;
    if (state.advance(choice.pose, choice.path, std::move(rec))) {
      return state.finish(Termination::kConverged);
    }
  }
  return state.finish(Termination::kMaxSteps);
}

double frontier_score(const FrontierCluster& cluster, const Point3& observed_centroid) {
  return static_cast<double>(cluster.size) /
         (1.0 + (cluster.centroid - observed_centroid).norm());
}

namespace {

std::optional<Point3> nearest_free_cell(const OccupancyGrid& grid, const Point3& target,
                                        const std::function<bool(const Point3&)>& admissible) {
  std::optional<Point3> best;
  double best_d = std::numeric_limits<double>::infinity();
  const auto raw = grid.raw();
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] != static_cast<std::uint8_t>(CellState::kFree)) continue;
    const Point3 c = grid.center(grid.unlinear(i));
    const double d = (c - target).squaredNorm();
    if (d < best_d && (!admissible || admissible(c))) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace

BaselineChoice baseline_select(const OccupancyGrid& grid, const PointCloud& observed,
                               const Pose& current, const PlannerConfig& cfg,
                               const std::function<bool(const Point3&)>& admissible) {
  if (observed.empty()) fail(ErrorCode::kEmptyInput, "baseline needs observed points");
  const std::vector<FrontierCluster> clusters = frontier_clusters(grid);
  if (clusters.empty()) fail(ErrorCode::kExplorationComplete, "no frontiers remain");
  const CloudStats s = cloud_stats(observed);
  const double standoff = 1.5 * s.d_max;

  std::vector<std::size_t> order(clusters.size());
  std::vector<double> score(clusters.size());
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    order[i] = i;
    score[i] = frontier_score(clusters[i], s.centroid);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });

  for (std::size_t i : order) {
    const Point3 dir = clusters[i].centroid - s.centroid;
    if (!(dir.norm() > 0.0)) continue;
    const std::optional<Point3> pos =
        nearest_free_cell(grid, s.centroid + standoff * dir.normalized(), admissible);
    if (!pos || (*pos - s.centroid).norm() == 0.0) continue;
    Path path;
    try {
      path = rrt_connect(current.position(), *pos, grid, cfg.rrt);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kNoPath || e.code() == ErrorCode::kInvalidEndpoint) continue;
      throw;
    }
    return {Pose::look_at(*pos, s.centroid), std::move(path), i, score[i]};
  }
  fail(ErrorCode::kExplorationComplete, "no frontier offers a reachable view");
}

EpisodeReport run_baseline_episode(const SceneModel& scene, const Pose& start,
                                   const PlannerConfig& cfg, std::uint64_t seed) {
  EpisodeState state(scene, start, cfg, seed, "baseline");
  const auto admissible = [&](const Point3& p) { return state.admissible(p) && !state.visited(p); };
  for (int step = 1; step <= cfg.max_steps; ++step) {
    PlannerConfig step_cfg = cfg;
    step_cfg.rrt = state.rrt_params();
    BaselineChoice choice;
    try {
      choice = baseline_select(state.grid(), state.observed(), state.current(), step_cfg,
                               admissible);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kExplorationComplete) {
        return state.finish(Termination::kExplorationComplete);
      }
      throw;
    }
    StepRecord rec;
    rec.candidate = choice.cluster;
    if (state.advance(choice.pose, choice.path, std::move(rec))) {
      return state.finish(Termination::kConverged);
    }
  }
  return state.finish(Termination::kMaxSteps);
}

}  // namespace prednbv
