// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0

#include "prednbv/predictor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "prednbv/error.hpp"
#include "prednbv/wire.hpp"

namespace prednbv {

void CurriculumSchedule::validate() const {
  if (levels.empty()) fail(ErrorCode::kParameter, "curriculum schedule is empty");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto& l = levels[i];
    if (!(l.max_rotation >= 0.0 && l.max_rotation <= 360.0)) {
      fail(ErrorCode::kParameter, fmt::format("level {}: rotation outside [0, 360]", i));
    }
    if (!(l.max_translation >= 0.0) || !std::isfinite(l.max_translation)) {
      fail(ErrorCode::kParameter, fmt::format("level {}: negative translation", i));
    }
    if (i > 0 && (l.max_rotation < levels[i - 1].max_rotation ||
                  l.max_translation < levels[i - 1].max_translation)) {
      fail(ErrorCode::kParameter, fmt::format("level {} is easier than level {}", i, i - 1));
    }
  }
}

CurriculumSchedule default_schedule() {
  return CurriculumSchedule{{{25, 0.0}, {25, 0.1}, {45, 0.1}, {45, 0.25},
                             {45, 0.5}, {90, 0.5}, {180, 0.5}, {360, 0.5}}};
}

Point3 AppliedPerturbation::apply(const Point3& p) const {
  const Eigen::AngleAxisd r(angle, rotation_axis);
  return r * (p - pivot) + pivot + translation;
}

Point3 AppliedPerturbation::invert(const Point3& p) const {
  const Eigen::AngleAxisd r(-angle, rotation_axis);
  return r * (p - pivot - translation) + pivot;
}

namespace {

Point3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  while (true) {
    const Point3 v(n(rng), n(rng), n(rng));
    const double len = v.norm();
    if (len > 1e-12) return v / len;
  }
}

}  // namespace

PerturbResult perturb(const PointCloud& cloud, const PerturbationLevel& level,
                      std::uint64_t seed) {
  if (cloud.empty()) fail(ErrorCode::kEmptyInput, "cannot perturb an empty cloud");
  CurriculumSchedule{{level}}.validate();
  const CloudStats stats = cloud_stats(cloud);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  AppliedPerturbation a;
  a.pivot = stats.centroid;
  a.rotation_axis = random_unit(rng);
  a.angle = unit(rng) * level.max_rotation * std::numbers::pi / 180.0;
  const double scale =
      level.unit == TranslationUnit::kFractionOfDmax ? stats.d_max : 1.0;
  const Point3 dir = random_unit(rng);
  a.translation = dir * (unit(rng) * level.max_translation * scale);

  if (a.angle == 0.0 && a.translation.isZero(0.0)) return {cloud, a};

  std::vector<Point3> out;
  out.reserve(cloud.size());
  if (a.angle == 0.0) {
    for (const auto& p : cloud) out.push_back(p + a.translation);
  } else {
    for (const auto& p : cloud) out.push_back(a.apply(p));
  }
  return {PointCloud(std::move(out), cloud.frame()), a};
}

// ---------------------------------------------------------------------------
// Mirror completion

namespace {

struct MirrorCandidate {
  Point3 normal;
  double offset;  // plane: normal . x = offset
  double spread;
};

// Candidate plane at one end of `axis`: the boundary slab's in-plane RMS
// radius measures how wide the cloud is cut there.
MirrorCandidate end_plane(const PointCloud& cloud, const Point3& axis, bool at_max) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& p : cloud) {
    const double s = axis.dot(p);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  const double extent = hi - lo;
  const double slab = 0.05 * extent;
  const double edge = at_max ? hi : lo;
  Point3 sum = Point3::Zero();
  std::vector<Point3> members;
  for (const auto& p : cloud) {
    if (std::abs(axis.dot(p) - edge) <= slab) {
      const Point3 q = p - axis.dot(p) * axis;
      members.push_back(q);
      sum += q;
    }
  }
  double spread = 0.0;
  if (!members.empty() && extent > 0.0) {
    const Point3 mean = sum / static_cast<double>(members.size());
    for (const auto& q : members) spread += (q - mean).squaredNorm();
    spread = std::sqrt(spread / static_cast<double>(members.size()));
  }
  return {axis, edge, spread};
}

// PCA axes of a sampled partial shape are only roughly aligned with its cut.
// The boundary slab holds the rim of the cut, so its own best-fit plane gives
// a steadier normal; repeating with thinner slabs tightens it further.
MirrorCandidate refine_plane(const PointCloud& cloud, MirrorCandidate m, bool at_max) {
  const auto extreme = [&](const Point3& n) {
    double e = at_max ? -std::numeric_limits<double>::infinity()
                      : std::numeric_limits<double>::infinity();
    for (const auto& p : cloud) e = at_max ? std::max(e, n.dot(p)) : std::min(e, n.dot(p));
    return e;
  };
  const Point3 initial = m.normal;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& p : cloud) {
    lo = std::min(lo, m.normal.dot(p));
    hi = std::max(hi, m.normal.dot(p));
  }
  double slab = 0.05 * (hi - lo);
  for (int round = 0; round < 4; ++round, slab *= 0.5) {
    std::vector<Point3> rim;
    Point3 sum = Point3::Zero();
    for (const auto& p : cloud) {
      if (std::abs(m.normal.dot(p) - m.offset) <= slab) {
        rim.push_back(p);
        sum += p;
      }
    }
    if (rim.size() < 8) break;
    const Point3 c = sum / static_cast<double>(rim.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& p : rim) cov += (p - c) * (p - c).transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    const auto ev = es.eigenvalues();
    // A rim that is not clearly planar (a cap, a corner) keeps the axis.
    if (!(ev(0) < 0.25 * ev(1))) break;
    Point3 n = es.eigenvectors().col(0).normalized();
    if (n.dot(initial) < 0.0) n = -n;
    if (n.dot(initial) < std::cos(15.0 * std::numbers::pi / 180.0)) break;
    m.normal = n;
    m.offset = extreme(n);
  }
  return m;
}

}  // namespace

PointCloud mirror_complete(const PointCloud& observed, MirrorPlane plane) {
  if (observed.empty()) fail(ErrorCode::kEmptyInput, "cannot mirror an empty cloud");
  std::vector<Point3> axes;
  switch (plane) {
    case MirrorPlane::kX: axes = {Point3::UnitX()}; break;
    case MirrorPlane::kY: axes = {Point3::UnitY()}; break;
    case MirrorPlane::kZ: axes = {Point3::UnitZ()}; break;
    case MirrorPlane::kAuto: {
      const Point3 c = centroid(observed.points());
      Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
      for (const auto& p : observed) cov += (p - c) * (p - c).transpose();
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
      for (int i = 2; i >= 0; --i) axes.push_back(es.eigenvectors().col(i).normalized());
      break;
    }
  }
  MirrorCandidate best{Point3::UnitX(), 0.0, -1.0};
  bool best_at_max = false;
  for (const auto& axis : axes) {
    for (bool at_max : {false, true}) {
      const MirrorCandidate m = end_plane(observed, axis, at_max);
      if (m.spread > best.spread) {
        best = m;
        best_at_max = at_max;
      }
    }
  }
  if (plane == MirrorPlane::kAuto) best = refine_plane(observed, best, best_at_max);
  std::vector<Point3> out(observed.begin(), observed.end());
  out.reserve(2 * observed.size());
  for (const auto& p : observed) {
    const double d = best.normal.dot(p) - best.offset;
    out.push_back(p - 2.0 * d * best.normal);
  }
  return PointCloud(std::move(out), observed.frame());
}

// ---------------------------------------------------------------------------
// Predictor kinds

void PredictorKind::validate() const {
  if (variant == Variant::kNoisyOracle) {
    if (!(dropout >= 0.0 && dropout < 1.0)) {
      fail(ErrorCode::kParameter, "noisy oracle dropout must lie in [0, 1)");
    }
    if (!(jitter >= 0.0) || !std::isfinite(jitter)) {
      fail(ErrorCode::kParameter, "noisy oracle jitter must be non-negative");
    }
  }
  if (variant == Variant::kExternal) {
    if (endpoint.empty()) fail(ErrorCode::kParameter, "external predictor needs an endpoint");
    if (timeout.count() <= 0) fail(ErrorCode::kParameter, "predictor timeout must be positive");
  }
}

namespace {

const char* plane_name(MirrorPlane p) {
  switch (p) {
    case MirrorPlane::kX: return "x";
    case MirrorPlane::kY: return "y";
    case MirrorPlane::kZ: return "z";
    case MirrorPlane::kAuto: break;
  }
  return "auto";
}

}  // namespace

std::string PredictorKind::label() const {
  switch (variant) {
    case Variant::kOracle: return "oracle";
    case Variant::kNoisyOracle: return "noisy_oracle";
    case Variant::kMirror: return "mirror";
    case Variant::kExternal: return "external";
  }
  return "unknown";
}

PredictorKind predictor_kind_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    fail(ErrorCode::kParse, "predictor must be an object with a string 'kind'");
  }
  PredictorKind k;
  const auto kind = j["kind"].get<std::string>();
  try {
    if (kind == "oracle") {
      k.variant = PredictorKind::Variant::kOracle;
    } else if (kind == "noisy_oracle") {
      k.variant = PredictorKind::Variant::kNoisyOracle;
      k.dropout = j.value("dropout", 0.0);
      k.jitter = j.value("jitter", 0.0);
      k.seed = j.value("seed", std::uint64_t{0});
    } else if (kind == "mirror") {
      k.variant = PredictorKind::Variant::kMirror;
      const auto p = j.value("plane", std::string("auto"));
      if (p == "auto") k.plane = MirrorPlane::kAuto;
      else if (p == "x") k.plane = MirrorPlane::kX;
      else if (p == "y") k.plane = MirrorPlane::kY;
      else if (p == "z") k.plane = MirrorPlane::kZ;
      else fail(ErrorCode::kParse, fmt::format("unknown mirror plane '{}'", p));
    } else if (kind == "external") {
      k.variant = PredictorKind::Variant::kExternal;
      k.endpoint = j.value("endpoint", std::string());
      k.timeout = std::chrono::milliseconds(j.value("timeout_ms", std::int64_t{30000}));
    } else {
      fail(ErrorCode::kParse, fmt::format("unknown predictor kind '{}'", kind));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, fmt::format("predictor '{}': {}", kind, e.what()));
  }
  k.validate();
  return k;
}

nlohmann::json to_json(const PredictorKind& k) {
  nlohmann::json j{{"kind", k.label()}};
  switch (k.variant) {
    case PredictorKind::Variant::kNoisyOracle:
      j["dropout"] = k.dropout;
      j["jitter"] = k.jitter;
      j["seed"] = k.seed;
      break;
    case PredictorKind::Variant::kMirror:
      j["plane"] = plane_name(k.plane);
      break;
    case PredictorKind::Variant::kExternal:
      j["endpoint"] = k.endpoint;
      j["timeout_ms"] = k.timeout.count();
      break;
    case PredictorKind::Variant::kOracle:
      break;
  }
  return j;
}

namespace {

void require_observed(const PointCloud& observed) {
  if (observed.empty()) fail(ErrorCode::kEmptyInput, "predict needs a non-empty observation");
}

class OraclePredictor final : public Predictor {
 public:
  explicit OraclePredictor(PointCloud truth) : truth_(std::move(truth)) {}
  PointCloud predict(const PointCloud& observed) override {
    require_observed(observed);
    return truth_;
  }
  std::string name() const override { return "oracle"; }

 private:
  PointCloud truth_;
};

class NoisyOraclePredictor final : public Predictor {
 public:
  NoisyOraclePredictor(PointCloud truth, double dropout, double jitter, std::uint64_t seed)
      : truth_(std::move(truth)), dropout_(dropout), jitter_(jitter), seed_(seed) {}

  PointCloud predict(const PointCloud& observed) override {
    require_observed(observed);
    if (dropout_ == 0.0 && jitter_ == 0.0) return truth_;
    // Noise depends on the seed and the observation size so that repeated
    // steps see different draws while the whole episode stays reproducible.
    std::mt19937_64 rng(seed_ ^ (0x9E3779B97F4A7C15ull * (observed.size() + 1)));
    std::bernoulli_distribution drop(dropout_);
    std::normal_distribution<double> noise(0.0, jitter_ > 0.0 ? jitter_ : 1.0);
    std::vector<Point3> out;
    out.reserve(truth_.size());
    for (const auto& p : truth_) {
      if (dropout_ > 0.0 && drop(rng)) continue;
      Point3 q = p;
      if (jitter_ > 0.0) q += Point3(noise(rng), noise(rng), noise(rng));
      out.push_back(q);
    }
    if (out.empty()) out.push_back(truth_[0]);
    return PointCloud(std::move(out));
  }
  std::string name() const override { return "noisy_oracle"; }

 private:
  PointCloud truth_;
  double dropout_;
  double jitter_;
  std::uint64_t seed_;
};

class MirrorPredictor final : public Predictor {
 public:
  explicit MirrorPredictor(MirrorPlane plane) : plane_(plane) {}
  PointCloud predict(const PointCloud& observed) override {
    require_observed(observed);
    return mirror_complete(observed, plane_);
  }
  std::string name() const override { return "mirror"; }

 private:
  MirrorPlane plane_;
};

class ExternalPredictor final : public Predictor {
 public:
  ExternalPredictor(std::string endpoint, std::chrono::milliseconds timeout)
      : endpoint_(std::move(endpoint)), timeout_(timeout) {}

  PointCloud predict(const PointCloud& observed) override {
    require_observed(observed);
    try {
      if (!conn_) conn_ = wire::connect(endpoint_, timeout_);
      const std::string reply = wire::round_trip(*conn_, wire::predict_request(observed), timeout_);
      return wire::parse_predict_response(reply);
    } catch (const Error&) {
      conn_.reset();
      throw;
    }
  }
  std::string name() const override { return "external"; }

 private:
  std::string endpoint_;
  std::chrono::milliseconds timeout_;
  std::unique_ptr<wire::Connection> conn_;
};

}  // namespace

std::unique_ptr<Predictor> make_predictor(const PredictorKind& kind, const SceneModel& scene,
                                          double leaf) {
  kind.validate();
  switch (kind.variant) {
    case PredictorKind::Variant::kOracle:
    case PredictorKind::Variant::kNoisyOracle: {
      if (scene.object.empty()) fail(ErrorCode::kEmptyInput, "oracle needs the scene object");
      PointCloud truth = leaf > 0.0 ? voxel_filter(scene.object, leaf) : scene.object;
      if (kind.variant == PredictorKind::Variant::kOracle) {
        return std::make_unique<OraclePredictor>(std::move(truth));
      }
      return std::make_unique<NoisyOraclePredictor>(std::move(truth), kind.dropout,
                                                    kind.jitter, kind.seed);
    }
    case PredictorKind::Variant::kMirror:
      return std::make_unique<MirrorPredictor>(kind.plane);
    case PredictorKind::Variant::kExternal:
      return std::make_unique<ExternalPredictor>(kind.endpoint, kind.timeout);
  }
  fail(ErrorCode::kParameter, "unknown predictor variant");
}

}  // namespace prednbv
