// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0

#include "prednbv/scene.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <random>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "prednbv/cloud_io.hpp"
#include "prednbv/error.hpp"

namespace prednbv {

std::optional<double> Box::ray_hit(const Point3& origin, const Point3& dir, double t_min,
                                   double t_max) const {
  double t0 = t_min, t1 = t_max;
  for (int k = 0; k < 3; ++k) {
    if (std::abs(dir[k]) < 1e-15) {
      if (origin[k] < min[k] || origin[k] > max[k]) return std::nullopt;
      continue;
    }
    double ta = (min[k] - origin[k]) / dir[k];
    double tb = (max[k] - origin[k]) / dir[k];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return std::nullopt;
  }
  return t0;
}

void SceneModel::validate() const {
  if (object.empty()) fail(ErrorCode::kParameter, fmt::format("scene '{}': empty object", name));
  for (const auto& box : obstacles) {
    if (!(box.min.array() <= box.max.array()).all()) {
      fail(ErrorCode::kParameter, fmt::format("scene '{}': obstacle min exceeds max", name));
    }
    for (const auto& p : object) {
      if ((p.array() > box.min.array()).all() && (p.array() < box.max.array()).all()) {
        fail(ErrorCode::kParameter,
             fmt::format("scene '{}': object point inside an obstacle", name));
      }
    }
  }
}

namespace {

Point3 vec3_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) fail(ErrorCode::kParse, "expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

SceneModel load_scene(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) fail(ErrorCode::kIo, fmt::format("cannot open scene manifest '{}'", manifest.string()));
  SceneModel scene;
  std::filesystem::path ply;
  try {
    const auto j = nlohmann::json::parse(in);
    scene.name = j.at("name").get<std::string>();
    ply = j.at("object_ply_path").get<std::string>();
    if (j.contains("obstacles")) {
      for (const auto& o : j.at("obstacles")) {
        scene.obstacles.push_back({vec3_from_json(o.at("min")), vec3_from_json(o.at("max"))});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, fmt::format("scene manifest '{}': {}", manifest.string(), e.what()));
  }
  if (ply.is_relative()) ply = manifest.parent_path() / ply;
  scene.object = load_cloud(ply);
  scene.validate();
  return scene;
}

void save_scene(const std::filesystem::path& manifest, const SceneModel& scene,
                const std::string& ply_file_name) {
  nlohmann::json obstacles = nlohmann::json::array();
  for (const auto& b : scene.obstacles) {
    obstacles.push_back({{"min", {b.min.x(), b.min.y(), b.min.z()}},
                         {"max", {b.max.x(), b.max.y(), b.max.z()}}});
  }
  const nlohmann::json j = {
      {"name", scene.name}, {"object_ply_path", ply_file_name}, {"obstacles", obstacles}};
  save_cloud(manifest.parent_path() / ply_file_name, scene.object);
  write_file_atomic(manifest, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Synthetic suite: unions of closed primitives, sampled uniformly by area with
// points buried inside another primitive rejected.

namespace {

using Rng = std::mt19937_64;
constexpr double kMargin = 1e-6;
constexpr double kPi = std::numbers::pi;

double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

struct Primitive {
  virtual ~Primitive() = default;
  virtual double area() const = 0;
  virtual Point3 sample(Rng& rng) const = 0;
  virtual bool interior(const Point3& p) const = 0;
};

struct BoxPrim final : Primitive {
  Point3 c, h;
  BoxPrim(Point3 center, Point3 half) : c(center), h(half) {}
  double area() const override { return 8.0 * (h.x() * h.y() + h.y() * h.z() + h.x() * h.z()); }
  Point3 sample(Rng& rng) const override {
    const double axy = h.x() * h.y(), ayz = h.y() * h.z(), axz = h.x() * h.z();
    const double pick = uniform(rng, 0.0, axy + ayz + axz);
    const double side = uniform(rng) < 0.5 ? -1.0 : 1.0;
    const double a = uniform(rng, -1.0, 1.0), b = uniform(rng, -1.0, 1.0);
    Point3 q;
    if (pick < axy) {
      q = {a * h.x(), b * h.y(), side * h.z()};
    } else if (pick < axy + ayz) {
      q = {side * h.x(), a * h.y(), b * h.z()};
    } else {
      q = {a * h.x(), side * h.y(), b * h.z()};
    }
    return c + q;
  }
  bool interior(const Point3& p) const override {
    return ((p - c).cwiseAbs().array() < (h.array() - kMargin)).all();
  }
};

// Closed cylinder along coordinate `axis`.
struct CylinderPrim final : Primitive {
  Point3 c;
  int axis;
  double r, half_len;
  CylinderPrim(Point3 center, int ax, double radius, double half_length)
      : c(center), axis(ax), r(radius), half_len(half_length) {}
  double area() const override { return 2.0 * kPi * r * (2.0 * half_len) + 2.0 * kPi * r * r; }
  Point3 local(double along, double u, double v) const {
    Point3 q;
    q[axis] = along;
    q[(axis + 1) % 3] = u;
    q[(axis + 2) % 3] = v;
    return c + q;
  }
  Point3 sample(Rng& rng) const override {
    const double side = 2.0 * kPi * r * 2.0 * half_len;
    const double t = uniform(rng, 0.0, 2.0 * kPi);
    if (uniform(rng, 0.0, area()) < side) {
      return local(uniform(rng, -half_len, half_len), r * std::cos(t), r * std::sin(t));
    }
    const double rho = r * std::sqrt(uniform(rng));
    const double end = uniform(rng) < 0.5 ? -half_len : half_len;
    return local(end, rho * std::cos(t), rho * std::sin(t));
  }
  bool interior(const Point3& p) const override {
    const Point3 d = p - c;
    const double radial = std::hypot(d[(axis + 1) % 3], d[(axis + 2) % 3]);
    return radial < r - kMargin && std::abs(d[axis]) < half_len - kMargin;
  }
};

struct SpherePrim final : Primitive {
  Point3 c;
  double r;
  SpherePrim(Point3 center, double radius) : c(center), r(radius) {}
  double area() const override { return 4.0 * kPi * r * r; }
  Point3 sample(Rng& rng) const override {
    std::normal_distribution<double> g(0.0, 1.0);
    Point3 d;
    do {
      d = Point3(g(rng), g(rng), g(rng));
    } while (d.norm() < 1e-12);
    return c + r * d.normalized();
  }
  bool interior(const Point3& p) const override { return (p - c).norm() < r - kMargin; }
};

// Closed upright cone: base disk at `base`, apex `height` above it.
struct ConePrim final : Primitive {
  Point3 base;
  double r, height;
  ConePrim(Point3 b, double radius, double h) : base(b), r(radius), height(h) {}
  double lateral() const { return kPi * r * std::hypot(r, height); }
  double area() const override { return lateral() + kPi * r * r; }
  Point3 sample(Rng& rng) const override {
    const double t = uniform(rng, 0.0, 2.0 * kPi);
    if (uniform(rng, 0.0, area()) < lateral()) {
      const double f = std::sqrt(uniform(rng));  // radial fraction from the apex
      return base + Point3(r * f * std::cos(t), r * f * std::sin(t), height * (1.0 - f));
    }
    const double rho = r * std::sqrt(uniform(rng));
    return base + Point3(rho * std::cos(t), rho * std::sin(t), 0.0);
  }
  bool interior(const Point3& p) const override {
    const Point3 d = p - base;
    if (d.z() <= kMargin || d.z() >= height - kMargin) return false;
    return std::hypot(d.x(), d.y()) < r * (1.0 - d.z() / height) - kMargin;
  }
};

struct TorusPrim final : Primitive {
  Point3 c;
  double major, minor;
  TorusPrim(Point3 center, double big, double small) : c(center), major(big), minor(small) {}
  double area() const override { return 4.0 * kPi * kPi * major * minor; }
  Point3 sample(Rng& rng) const override {
    double theta;
    do {
      theta = uniform(rng, 0.0, 2.0 * kPi);
    } while (uniform(rng, 0.0, major + minor) > major + minor * std::cos(theta));
    const double phi = uniform(rng, 0.0, 2.0 * kPi);
    const double ring = major + minor * std::cos(theta);
    return c + Point3(ring * std::cos(phi), ring * std::sin(phi), minor * std::sin(theta));
  }
  bool interior(const Point3& p) const override {
    const Point3 d = p - c;
    const double q = std::hypot(d.x(), d.y()) - major;
    return q * q + d.z() * d.z() < (minor - kMargin) * (minor - kMargin);
  }
};

using Shape = std::vector<std::unique_ptr<Primitive>>;

template <class T, class... Args>
void add(Shape& s, Args&&... args) {
  s.push_back(std::make_unique<T>(std::forward<Args>(args)...));
}

PointCloud sample_shape(const Shape& shape, std::size_t count, Rng& rng) {
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& p : shape) {
    total += p->area();
    cumulative.push_back(total);
  }
  std::vector<Point3> pts;
  pts.reserve(count);
  while (pts.size() < count) {
    const double pick = uniform(rng, 0.0, total);
    std::size_t k = 0;
    while (k + 1 < cumulative.size() && pick >= cumulative[k]) ++k;
    const Point3 p = shape[k]->sample(rng);
    bool buried = false;
    for (std::size_t o = 0; o < shape.size() && !buried; ++o) {
      if (o != k && shape[o]->interior(p)) buried = true;
    }
    if (!buried) pts.push_back(p);
  }
  // Centre on the centroid and scale to the suite's d_max.
  Point3 c = Point3::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  double d_max = 0.0;
  for (const auto& p : pts) d_max = std::max(d_max, (p - c).norm());
  const double s = kSuiteDmax / d_max;
  for (auto& p : pts) p = (p - c) * s;
  return PointCloud(std::move(pts));
}

Shape make_shape(const std::string& name) {
  Shape s;
  if (name == "sphere") {
    add<SpherePrim>(s, Point3(0, 0, 0), 1.0);
  } else if (name == "cube") {
    add<BoxPrim>(s, Point3(0, 0, 0), Point3(1, 1, 1));
  } else if (name == "cylinder") {
    add<CylinderPrim>(s, Point3(0, 0, 0), 2, 0.6, 1.0);
  } else if (name == "airplane") {
    add<CylinderPrim>(s, Point3(0, 0, 0), 0, 0.18, 1.2);
    add<BoxPrim>(s, Point3(0.1, 0, 0), Point3(0.22, 1.0, 0.03));
    add<BoxPrim>(s, Point3(-1.05, 0, 0), Point3(0.1, 0.35, 0.02));
    add<BoxPrim>(s, Point3(-1.05, 0, 0.2), Point3(0.1, 0.02, 0.2));
  } else if (name == "tower") {
    add<BoxPrim>(s, Point3(0, 0, 0), Point3(0.4, 0.4, 1.2));
    add<ConePrim>(s, Point3(0, 0, 1.2), 0.55, 0.6);
  } else if (name == "cone") {
    add<ConePrim>(s, Point3(0, 0, -0.5), 1.0, 1.5);
  } else if (name == "torus") {
    add<TorusPrim>(s, Point3(0, 0, 0), 1.0, 0.35);
  } else if (name == "capsule") {
    add<CylinderPrim>(s, Point3(0, 0, 0), 2, 0.5, 0.8);
    add<SpherePrim>(s, Point3(0, 0, 0.8), 0.5);
    add<SpherePrim>(s, Point3(0, 0, -0.8), 0.5);
  } else if (name == "table") {
    add<BoxPrim>(s, Point3(0, 0, 0.5), Point3(1.0, 0.6, 0.05));
    for (double x : {-0.9, 0.9}) {
      for (double y : {-0.5, 0.5}) add<BoxPrim>(s, Point3(x, y, 0.0), Point3(0.05, 0.05, 0.45));
    }
  } else if (name == "car") {
    add<BoxPrim>(s, Point3(0, 0, 0), Point3(1.0, 0.45, 0.25));
    add<BoxPrim>(s, Point3(-0.1, 0, 0.4), Point3(0.5, 0.4, 0.15));
    for (double x : {-0.65, 0.65}) {
      for (double y : {-0.45, 0.45}) add<CylinderPrim>(s, Point3(x, y, -0.25), 1, 0.2, 0.08);
    }
  } else {
    fail(ErrorCode::kParameter, fmt::format("unknown suite shape '{}'", name));
  }
  return s;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"sphere", "cube",  "cylinder", "airplane",
                                                 "tower",  "cone",  "torus",    "capsule",
                                                 "table",  "car"};
  return names;
}

}  // namespace

std::vector<SceneModel> generate_suite(std::uint64_t seed) {
  std::vector<SceneModel> scenes;
  const auto& names = suite_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    Rng rng(seed * 0x9E3779B97F4A7C15ULL + i + 1);
    SceneModel scene;
    scene.name = names[i];
    scene.object = sample_shape(make_shape(names[i]), kSuitePoints, rng);
    if (names[i] == "cylinder" || names[i] == "table") {
      // A pillar well outside the candidate rings.
      scene.obstacles.push_back({Point3(2.4 * kSuiteDmax, -1.0, -kSuiteDmax),
                                 Point3(2.6 * kSuiteDmax, 1.0, kSuiteDmax)});
    }
    scene.validate();
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

std::vector<std::filesystem::path> write_suite(const std::filesystem::path& dir,
                                               std::uint64_t seed) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    fail(ErrorCode::kIo, fmt::format("cannot create output directory '{}'", dir.string()));
  }
  std::vector<std::filesystem::path> manifests;
  nlohmann::json scene_list = nlohmann::json::array();
  for (const auto& scene : generate_suite(seed)) {
    const auto manifest = dir / (scene.name + ".json");
    save_scene(manifest, scene, scene.name + ".ply");
    manifests.push_back(manifest);
    scene_list.push_back(scene.name + ".json");
  }
  const nlohmann::json experiment = {
      {"scenes", scene_list},
      {"methods",
       {{{"type", "prednbv"}, {"predictor", {{"kind", "oracle"}}}},
        {{"type", "prednbv"}, {"predictor", {{"kind", "mirror"}}}},
        {{"type", "baseline"}}}},
      {"seeds", {0, 1, 2}},
      {"output_dir", "results"}};
  write_file_atomic(dir / "experiment.json", experiment.dump(2) + "\n");
  return manifests;
}

}  // namespace prednbv
