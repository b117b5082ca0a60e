// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "prednbv/error.hpp"
#include "prednbv/metrics.hpp"
#include "prednbv/predictor.hpp"
#include "prednbv/wire.hpp"
#include "support.hpp"

using namespace prednbv;
using namespace std::chrono_literals;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{};
}

double max_pairwise_drift(const PointCloud& a, const PointCloud& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      worst = std::max(worst, std::abs((a[i] - a[j]).norm() - (b[i] - b[j]).norm()));
    }
  }
  return worst;
}

bool bit_equal(const PointCloud& a, const PointCloud& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      if (std::bit_cast<std::uint64_t>(a[i][k]) != std::bit_cast<std::uint64_t>(b[i][k])) {
        return false;
      }
    }
  }
  return true;
}

std::string helper(const std::string& mode) {
  return std::string("exec:") + PREDNBV_ECHO_PREDICTOR + " " + mode;
}

PredictorKind external(const std::string& endpoint, std::chrono::milliseconds timeout = 5000ms) {
  PredictorKind k;
  k.variant = PredictorKind::Variant::kExternal;
  k.endpoint = endpoint;
  k.timeout = timeout;
  return k;
}

SceneModel ball_scene() {
  SceneModel s;
  s.name = "ball";
  s.object = testing::random_sphere(2000, 3.0, Point3(1, 2, 3), 4);
  return s;
}

}  // namespace

TEST_CASE("default schedule is the published curriculum") {
  const auto s = default_schedule();
  REQUIRE(s.levels.size() == 8);
  const double rot[] = {25, 25, 45, 45, 45, 90, 180, 360};
  const double tr[] = {0.0, 0.1, 0.1, 0.25, 0.5, 0.5, 0.5, 0.5};
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(s.levels[i].max_rotation == rot[i]);
    CHECK(s.levels[i].max_translation == tr[i]);
    CHECK(s.levels[i].unit == TranslationUnit::kFractionOfDmax);
  }
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("schedule validation") {
  CHECK(code_of([] { CurriculumSchedule{}.validate(); }) == ErrorCode::kParameter);
  CHECK(code_of([] { CurriculumSchedule{{{45, 0.1}, {25, 0.2}}}.validate(); }) ==
        ErrorCode::kParameter);
  CHECK(code_of([] { CurriculumSchedule{{{45, 0.3}, {90, 0.2}}}.validate(); }) ==
        ErrorCode::kParameter);
  CHECK(code_of([] { CurriculumSchedule{{{361, 0.0}}}.validate(); }) == ErrorCode::kParameter);
  CHECK(code_of([] { CurriculumSchedule{{{10, -0.1}}}.validate(); }) == ErrorCode::kParameter);
  CHECK_NOTHROW(CurriculumSchedule{{{10, 0.1}, {10, 0.1}, {20, 0.1}}}.validate());
}

TEST_CASE("perturb is a seeded rigid motion with a working inverse") {
  const auto cloud = testing::random_cloud(120, 3, -2.0, 5.0);
  const auto st = cloud_stats(cloud);
  for (const auto& level : default_schedule().levels) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto r = perturb(cloud, level, seed);
      REQUIRE(r.cloud.size() == cloud.size());
      CHECK(max_pairwise_drift(cloud, r.cloud) <= 1e-9);
      CHECK(r.applied.angle >= 0.0);
      CHECK(r.applied.angle <= level.max_rotation * std::numbers::pi / 180.0);
      CHECK(r.applied.translation.norm() <= level.max_translation * st.d_max + 1e-12);
      CHECK(std::abs(r.applied.rotation_axis.norm() - 1.0) < 1e-12);
      for (std::size_t i = 0; i < cloud.size(); ++i) {
        CHECK((r.applied.invert(r.cloud[i]) - cloud[i]).norm() <= 1e-9);
      }
      const auto again = perturb(cloud, level, seed);
      CHECK(bit_equal(again.cloud, r.cloud));
    }
  }
  CHECK_FALSE(bit_equal(perturb(cloud, {90, 0.5}, 1).cloud, perturb(cloud, {90, 0.5}, 2).cloud));
}

TEST_CASE("perturb fixtures") {
  const auto cloud = testing::random_cloud(200, 8, 0.0, 4.0);
  CHECK(bit_equal(perturb(cloud, {0, 0.0}, 3).cloud, cloud));

  const auto r = perturb(cloud, {25, 0.0}, 3);
  CHECK((cloud_stats(r.cloud).centroid - cloud_stats(cloud).centroid).norm() <= 1e-9);
  CHECK(r.applied.translation.isZero(0.0));

  PerturbationLevel metres{0, 2.0, TranslationUnit::kMeters};
  const auto t = perturb(cloud, metres, 9);
  CHECK(t.applied.translation.norm() <= 2.0);
  CHECK((t.cloud[0] - cloud[0] - t.applied.translation).norm() <= 1e-12);

  CHECK(code_of([] { perturb(PointCloud{}, {25, 0.0}, 0); }) == ErrorCode::kEmptyInput);
  CHECK(code_of([&] { perturb(cloud, {400, 0.0}, 0); }) == ErrorCode::kParameter);
}

TEST_CASE("oracle predictor returns the filtered ground truth") {
  const auto scene = ball_scene();
  PredictorKind k;
  const auto p = make_predictor(k, scene, 0.1);
  const PointCloud observed(std::vector<Point3>{scene.object[0]});
  const auto pred = p->predict(observed);
  CHECK(bit_equal(pred, voxel_filter(scene.object, 0.1)));
  CHECK(coverage(pred, scene.object, 0.1) == 1.0);
  CHECK(code_of([&] { p->predict(PointCloud{}); }) == ErrorCode::kEmptyInput);

  const auto raw = make_predictor(k, scene, 0.0);
  CHECK(bit_equal(raw->predict(observed), scene.object));
}

TEST_CASE("noisy oracle") {
  const auto scene = ball_scene();
  PredictorKind clean;
  PredictorKind k;
  k.variant = PredictorKind::Variant::kNoisyOracle;
  const PointCloud observed(std::vector<Point3>{scene.object[0]});
  CHECK(bit_equal(make_predictor(k, scene, 0.1)->predict(observed),
                  make_predictor(clean, scene, 0.1)->predict(observed)));

  k.dropout = 0.5;
  k.jitter = 0.01;
  k.seed = 4;
  const auto a = make_predictor(k, scene, 0.0)->predict(observed);
  const auto b = make_predictor(k, scene, 0.0)->predict(observed);
  CHECK(bit_equal(a, b));
  CHECK(a.size() > 700);
  CHECK(a.size() < 1300);
  CHECK(one_sided_chamfer(a, scene.object) < 0.05);

  k.dropout = 0.999999;
  CHECK_FALSE(make_predictor(k, scene, 0.0)->predict(observed).empty());
  k.dropout = 1.0;
  CHECK(code_of([&] { make_predictor(k, scene, 0.1); }) == ErrorCode::kParameter);
  k.dropout = 0.0;
  k.jitter = -1.0;
  CHECK(code_of([&] { make_predictor(k, scene, 0.1); }) == ErrorCode::kParameter);
}

TEST_CASE("mirror completes a plane-symmetric half") {
  const double leaf = 0.1;
  std::vector<Point3> half, full;
  for (const auto& p : testing::random_sphere(6000, 4.0, Point3::Zero(), 12)) {
    if (p.x() > 0.0) {
      half.push_back(p + Point3(3, -1, 2));
      full.push_back(p + Point3(3, -1, 2));
      full.push_back(Point3(-p.x(), p.y(), p.z()) + Point3(3, -1, 2));
    }
  }
  const PointCloud observed(half), truth(full);
  for (auto plane : {MirrorPlane::kAuto, MirrorPlane::kX}) {
    const auto pred = mirror_complete(observed, plane);
    REQUIRE(pred.size() == 2 * observed.size());
    for (std::size_t i = 0; i < observed.size(); ++i) CHECK(pred[i] == observed[i]);
    CHECK(one_sided_chamfer(pred, truth) <= leaf);
    CHECK(coverage(pred, truth, leaf) > 0.95);
  }
  // A wrong fixed axis is worse than the automatic choice.
  CHECK(one_sided_chamfer(mirror_complete(observed, MirrorPlane::kZ), truth) >
        one_sided_chamfer(mirror_complete(observed, MirrorPlane::kAuto), truth));
  CHECK(code_of([] { mirror_complete(PointCloud{}, MirrorPlane::kAuto); }) ==
        ErrorCode::kEmptyInput);
}

TEST_CASE("mirror output contains the observation") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    const auto obs = testing::random_cloud(50 + t, rng(), -1.0, 2.0);
    const auto pred = mirror_complete(obs, MirrorPlane::kAuto);
    for (std::size_t i = 0; i < obs.size(); ++i) CHECK(pred[i] == obs[i]);
    for (const auto& p : pred) CHECK(p.allFinite());
  }
  const PointCloud single(std::vector<Point3>{Point3(1, 1, 1)});
  CHECK(mirror_complete(single, MirrorPlane::kAuto).size() == 2);
}

TEST_CASE("predictor kind json") {
  using V = PredictorKind::Variant;
  for (const char* text :
       {R"({"kind":"oracle"})", R"({"kind":"noisy_oracle","dropout":0.2,"jitter":0.01,"seed":5})",
        R"({"kind":"mirror","plane":"y"})",
        R"({"kind":"external","endpoint":"tcp://127.0.0.1:9","timeout_ms":250})"}) {
    const auto k = predictor_kind_from_json(nlohmann::json::parse(text));
    const auto back = predictor_kind_from_json(to_json(k));
    CHECK(back.variant == k.variant);
    CHECK(back.dropout == k.dropout);
    CHECK(back.jitter == k.jitter);
    CHECK(back.seed == k.seed);
    CHECK(back.plane == k.plane);
    CHECK(back.endpoint == k.endpoint);
    CHECK(back.timeout == k.timeout);
    CHECK(back.label() == k.label());
  }
  const auto k = predictor_kind_from_json(nlohmann::json::parse(
      R"({"kind":"external","endpoint":"exec:x","timeout_ms":250})"));
  CHECK(k.variant == V::kExternal);
  CHECK(k.timeout == 250ms);
  CHECK(predictor_kind_from_json(nlohmann::json::parse(R"({"kind":"external","endpoint":"e"})"))
            .timeout == 30000ms);
  // Malformed documents are parse errors, out-of-range values parameter errors.
  for (std::string bad : {R"({"kind":"psychic"})", R"({"kind":"mirror","plane":"w"})",
                          R"({"kind":"mirror","plane":3})", R"([1,2])"}) {
    CHECK_MESSAGE(code_of([&] { predictor_kind_from_json(nlohmann::json::parse(bad)); }) ==
                      ErrorCode::kParse,
                  bad);
  }
  for (std::string bad : {R"({"kind":"noisy_oracle","dropout":1.5})", R"({"kind":"external"})",
                          R"({"kind":"external","endpoint":"e","timeout_ms":0})"}) {
    CHECK_MESSAGE(code_of([&] { predictor_kind_from_json(nlohmann::json::parse(bad)); }) ==
                      ErrorCode::kParameter,
                  bad);
  }
}

TEST_CASE("frame encoding") {
  const std::string f = wire::encode_frame("abc");
  CHECK(f == std::string("\x03\x00\x00\x00" "abc", 7));
  CHECK(wire::encode_frame("") == std::string(4, '\0'));
  const std::string big(300, 'x');
  CHECK(wire::encode_frame(big).substr(0, 4) == std::string("\x2c\x01\x00\x00", 4));

  // Byte-at-a-time delivery of two frames.
  const std::string stream = wire::encode_frame("first") + wire::encode_frame("second!");
  std::string buf;
  std::vector<std::string> got;
  for (char c : stream) {
    buf.push_back(c);
    while (auto frame = wire::take_frame(buf)) got.push_back(*frame);
  }
  CHECK(got == std::vector<std::string>{"first", "second!"});
  CHECK(buf.empty());

  std::string huge("\xff\xff\xff\xff", 4);
  CHECK(code_of([&] { wire::take_frame(huge); }) == ErrorCode::kPredictorUnavailable);
}

TEST_CASE("request and response payloads") {
  const PointCloud c(std::vector<Point3>{Point3(0.1, -2.5, 1e-300), Point3(1.0 / 3.0, 7, 8)});
  const auto j = nlohmann::json::parse(wire::predict_request(c));
  CHECK(j["op"] == "predict");
  REQUIRE(j["points"].size() == 2);
  CHECK(j["points"][1][0].get<double>() == 1.0 / 3.0);

  const auto back = wire::parse_predict_response(nlohmann::json{{"points", j["points"]}}.dump());
  CHECK(bit_equal(back, c));

  for (const char* bad : {R"({"error":"boom"})", R"({"points":[]})", R"({"points":[[1,2]]})",
                          R"({"points":[[1,2,"3"]]})", R"({"points":[[null,0,0]]})",
                          R"({"points":{}})", R"({})", R"([])", "nonsense", R"({"points":[[1e999,0,0]]})"}) {
    CHECK_MESSAGE(code_of([&] { wire::parse_predict_response(bad); }) ==
                      ErrorCode::kPredictorUnavailable,
                  bad);
  }
}

TEST_CASE("fuzzed frames never escape as anything but predictor errors") {
  std::mt19937_64 rng(1234);
  std::uniform_int_distribution<int> byte(0, 255), len(0, 64);
  const std::string valid = R"({"points":[[1,2,3]]})";
  int errors = 0;
  for (int t = 0; t < 1000; ++t) {
    std::string payload;
    if (t % 2 == 0) {
      for (int i = len(rng); i > 0; --i) payload.push_back(static_cast<char>(byte(rng)));
    } else {
      payload = valid;
      for (int i = 0; i < 3; ++i) payload[rng() % payload.size()] = static_cast<char>(byte(rng));
    }
    std::string buf = (t % 3 == 0) ? payload : wire::encode_frame(payload);
    try {
      while (auto f = wire::take_frame(buf)) wire::parse_predict_response(*f);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kPredictorUnavailable);
      ++errors;
    }
  }
  CHECK(errors > 0);
}

TEST_CASE("exec endpoint round-trips 2048 points bit-exactly") {
  const auto cloud = testing::random_cloud(2048, 99, -1e3, 1e3);
  auto p = make_predictor(external(helper("echo")), SceneModel{}, 0.1);
  CHECK(bit_equal(p->predict(cloud), cloud));
  CHECK(bit_equal(p->predict(cloud), cloud));  // same process, second request

  auto serial = make_predictor(external(helper("serial")), SceneModel{}, 0.1);
  CHECK(serial->predict(cloud)[0].x() == 0.0);
  CHECK(serial->predict(cloud)[0].x() == 1.0);
  CHECK(serial->predict(cloud)[0].x() == 2.0);
}

TEST_CASE("exec endpoint protocol violations") {
  const PointCloud obs(std::vector<Point3>{Point3(1, 2, 3)});
  for (const char* mode : {"error", "garbage", "two", "oversize", "close", "empty", "null"}) {
    auto p = make_predictor(external(helper(mode)), SceneModel{}, 0.1);
    CHECK_MESSAGE(code_of([&] { p->predict(obs); }) == ErrorCode::kPredictorUnavailable, mode);
  }
  auto missing = make_predictor(external("exec:/nonexistent/predictor"), SceneModel{}, 0.1);
  CHECK(code_of([&] { missing->predict(obs); }) == ErrorCode::kPredictorUnavailable);
  auto scheme = make_predictor(external("udp://x:1"), SceneModel{}, 0.1);
  CHECK(code_of([&] { scheme->predict(obs); }) == ErrorCode::kPredictorUnavailable);
}

TEST_CASE("exec endpoint timeout") {
  const PointCloud obs(std::vector<Point3>{Point3(1, 2, 3)});
  auto p = make_predictor(external(helper("sleep"), 300ms), SceneModel{}, 0.1);
  const auto t0 = std::chrono::steady_clock::now();
  CHECK(code_of([&] { p->predict(obs); }) == ErrorCode::kPredictorUnavailable);
  const auto waited = std::chrono::steady_clock::now() - t0;
  CHECK(waited >= 250ms);
  CHECK(waited < 5s);
}

TEST_CASE("tcp endpoint") {
  const int srv = ::socket(AF_INET, SOCK_STREAM, 0);
  REQUIRE(srv >= 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  REQUIRE(::bind(srv, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
  socklen_t alen = sizeof addr;
  ::getsockname(srv, reinterpret_cast<sockaddr*>(&addr), &alen);
  REQUIRE(::listen(srv, 1) == 0);
  const int port = ntohs(addr.sin_port);

  std::thread server([srv] {
    const int c = ::accept(srv, nullptr, nullptr);
    std::string buf;
    char tmp[4096];
    std::optional<std::string> frame;
    while (!(frame = wire::take_frame(buf))) {
      const ssize_t n = ::read(c, tmp, sizeof tmp);
      if (n <= 0) break;
      buf.append(tmp, static_cast<std::size_t>(n));
    }
    if (frame) {
      const auto req = nlohmann::json::parse(*frame);
      const std::string reply =
          wire::encode_frame(nlohmann::json{{"points", req["points"]}}.dump());
      (void)!::write(c, reply.data(), reply.size());
    }
    ::close(c);
  });

  const auto cloud = testing::random_cloud(500, 5);
  auto p = make_predictor(external("tcp://127.0.0.1:" + std::to_string(port)), SceneModel{}, 0.1);
  CHECK(bit_equal(p->predict(cloud), cloud));
  server.join();
  ::close(srv);

  // Nobody listens there any more.
  auto dead = make_predictor(external("tcp://127.0.0.1:" + std::to_string(port), 500ms),
                             SceneModel{}, 0.1);
  CHECK(code_of([&] { dead->predict(cloud); }) == ErrorCode::kPredictorUnavailable);
}
