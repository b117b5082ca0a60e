// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "prednbv/error.hpp"
#include "prednbv/occupancy.hpp"
#include "prednbv/rrt.hpp"
#include "support.hpp"

using namespace prednbv;

namespace {

Observation single_return(const Point3& sensor, const Point3& hit) {
  Observation obs;
  obs.pose = Pose::translation(sensor);
  obs.cloud = PointCloud(std::vector<Point3>{hit});
  return obs;
}

// Cells whose open box the segment crosses, by brute-force slab tests.
std::set<CellIndex> crossed_cells(const OccupancyGrid& g, const Point3& a, const Point3& b) {
  std::set<CellIndex> out;
  const auto& d = g.dims();
  for (int z = 0; z < d[2]; ++z) {
    for (int y = 0; y < d[1]; ++y) {
      for (int x = 0; x < d[0]; ++x) {
        const Point3 lo = g.origin() + g.resolution() * Point3(x, y, z);
        const Point3 hi = lo + Point3::Constant(g.resolution());
        if (testing::segment_hits_box_interior(a, b, lo, hi, 0.0)) out.insert({x, y, z});
      }
    }
  }
  return out;
}

struct Dsu {
  std::vector<std::size_t> p;
  explicit Dsu(std::size_t n) : p(n) {
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
  }
  std::size_t find(std::size_t x) { return p[x] == x ? x : p[x] = find(p[x]); }
  void join(std::size_t a, std::size_t b) { p[find(a)] = find(b); }
};

// Frontier oracle: free cells face-adjacent to unknown, grouped by
// 26-connectivity. Returns the partition as sets of linear indices.
std::set<std::set<std::size_t>> frontier_oracle(const OccupancyGrid& g) {
  const auto& d = g.dims();
  std::vector<CellIndex> cells;
  for (int z = 0; z < d[2]; ++z) {
    for (int y = 0; y < d[1]; ++y) {
      for (int x = 0; x < d[0]; ++x) {
        if (g.at({x, y, z}) != CellState::kFree) continue;
        bool f = false;
        for (const CellIndex nb : {CellIndex{x + 1, y, z}, CellIndex{x - 1, y, z},
                                   CellIndex{x, y + 1, z}, CellIndex{x, y - 1, z},
                                   CellIndex{x, y, z + 1}, CellIndex{x, y, z - 1}}) {
          f = f || (g.valid(nb) && g.at(nb) == CellState::kUnknown);
        }
        if (f) cells.push_back({x, y, z});
      }
    }
  }
  Dsu dsu(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t j = i + 1; j < cells.size(); ++j) {
      bool adj = true;
      for (int k = 0; k < 3; ++k) adj = adj && std::abs(cells[i][k] - cells[j][k]) <= 1;
      if (adj) dsu.join(i, j);
    }
  }
  std::map<std::size_t, std::set<std::size_t>> groups;
  for (std::size_t i = 0; i < cells.size(); ++i) groups[dsu.find(i)].insert(g.linear(cells[i]));
  std::set<std::set<std::size_t>> out;
  for (auto& [_, s] : groups) out.insert(s);
  return out;
}

bool sampled_free(const OccupancyGrid& g, const std::vector<Point3>& wp) {
  const double spacing = g.resolution() / 4.0;
  for (std::size_t i = 0; i + 1 < wp.size(); ++i) {
    const double len = (wp[i + 1] - wp[i]).norm();
    const int n = static_cast<int>(std::ceil(len / spacing));
    for (int s = 0; s <= n; ++s) {
      const Point3 p = wp[i] + (n == 0 ? 0.0 : double(s) / n) * (wp[i + 1] - wp[i]);
      CellIndex c;
      for (int k = 0; k < 3; ++k) {
        c[k] = static_cast<int>(std::floor((p[k] - g.origin()[k]) / g.resolution()));
      }
      if (!g.valid(c) || g.at(c) == CellState::kOccupied) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("grid indexing") {
  const OccupancyGrid g(Point3(-1, -2, -3), 0.5, {4, 6, 8});
  CHECK(g.cell_count() == 192);
  CHECK(g.upper().isApprox(Point3(1, 1, 1)));
  for (std::size_t i = 0; i < g.cell_count(); ++i) CHECK(g.linear(g.unlinear(i)) == i);
  CHECK(g.cell_of(Point3(-1, -2, -3)) == CellIndex{0, 0, 0});
  CHECK_FALSE(g.cell_of(Point3(1, 0, 0)));  // upper face is exclusive
  CHECK_FALSE(g.cell_of(Point3(0, 0, -3.01)));
  CHECK(g.center({1, 2, 3}).isApprox(Point3(-0.25, -0.75, -1.25)));
  CHECK_THROWS_AS(OccupancyGrid(Point3::Zero(), 0.0, {1, 1, 1}), Error);
  CHECK_THROWS_AS(OccupancyGrid(Point3::Zero(), 1.0, {0, 1, 1}), Error);
  const auto c = OccupancyGrid::centered(Point3(5, 5, 5), 3.0, 1.0);
  CHECK(c.dims() == CellIndex{6, 6, 6});
  CHECK(c.origin().isApprox(Point3(2, 2, 2)));
}

TEST_CASE("traversal matches the slab oracle on random segments") {
  const OccupancyGrid g(Point3(-0.3, 0.1, -0.7), 0.7, {9, 8, 7});
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Point3 lo = g.origin(), hi = g.upper();
  for (int t = 0; t < 300; ++t) {
    const Point3 a = lo + (hi - lo).cwiseProduct(Point3(u(rng), u(rng), u(rng)));
    const Point3 b = lo + (hi - lo).cwiseProduct(Point3(u(rng), u(rng), u(rng)));
    const auto walk = traverse(g, a, b);
    const std::set<CellIndex> got(walk.begin(), walk.end());
    CHECK(got.size() == walk.size());  // no cell visited twice
    CHECK(got == crossed_cells(g, a, b));
    CHECK(walk.front() == *g.cell_of(a));
    CHECK(walk.back() == *g.cell_of(b));
    for (std::size_t i = 1; i < walk.size(); ++i) {
      int manhattan = 0;
      for (int k = 0; k < 3; ++k) manhattan += std::abs(walk[i][k] - walk[i - 1][k]);
      CHECK(manhattan == 1);
    }
  }
}

TEST_CASE("single return 5 m ahead") {
  OccupancyGrid g(Point3::Zero(), 1.0, {10, 3, 3});
  integrate_in_place(g, single_return(Point3(0.5, 1.5, 1.5), Point3(5.5, 1.5, 1.5)));
  for (int x = 1; x <= 4; ++x) CHECK(g.at({x, 1, 1}) == CellState::kFree);
  CHECK(g.at({0, 1, 1}) == CellState::kFree);  // sensor cell
  CHECK(g.at({5, 1, 1}) == CellState::kOccupied);
  const auto c = g.counts();
  CHECK(c.free == 5);
  CHECK(c.occupied == 1);
  CHECK(c.unknown == g.cell_count() - 6);
}

TEST_CASE("integration is idempotent and never frees occupied cells") {
  OccupancyGrid g(Point3(-5, -5, -5), 0.5, {20, 20, 20});
  Observation obs;
  obs.pose = Pose::translation(Point3(-4, 0.1, 0.2));
  obs.cloud = testing::random_sphere(400, 2.0, Point3(1, 0, 0), 3);
  obs.obstacle_hits = PointCloud(std::vector<Point3>{Point3(4, 4, 4)});
  const auto once = integrate(g, obs);
  const auto twice = integrate(once, obs);
  CHECK(once == twice);
  CHECK(grid_dump(once) == grid_dump(twice));
  CHECK(g.counts().unknown == g.cell_count());  // input untouched
  CHECK(once.state_at(Point3(4, 4, 4)) == CellState::kOccupied);
  for (const auto& p : obs.cloud) CHECK(once.state_at(p) == CellState::kOccupied);

  // A later ray through an occupied cell leaves it occupied.
  const auto later = integrate(once, single_return(Point3(-4.9, 1, 0.05), Point3(4.9, 1, 0.05)));
  for (std::size_t i = 0; i < once.cell_count(); ++i) {
    if (once.raw()[i] == static_cast<std::uint8_t>(CellState::kOccupied)) {
      CHECK(later.raw()[i] == static_cast<std::uint8_t>(CellState::kOccupied));
    }
  }

  Observation empty;
  empty.pose = Pose::translation(Point3(0, 0, 0));
  CHECK(integrate(once, empty) == once);

  Observation outside = obs;
  outside.pose = Pose::translation(Point3(50, 0, 0));
  try {
    integrate(g, outside);
    FAIL("expected kBounds");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBounds);
  }
}

TEST_CASE("grid summary") {
  OccupancyGrid g(Point3::Zero(), 1.0, {10, 3, 3});
  integrate_in_place(g, single_return(Point3(0.5, 1.5, 1.5), Point3(5.5, 1.5, 1.5)));
  const auto j = grid_summary(g);
  CHECK(j["counts"]["free"] == 5);
  CHECK(j["counts"]["occupied"] == 1);
  CHECK(j["dims"][0] == 10);
}

TEST_CASE("frontier fixtures") {
  OccupancyGrid g(Point3::Zero(), 1.0, {6, 6, 6});
  CHECK(frontiers(g).empty());  // all unknown

  g.set({2, 3, 4}, CellState::kFree);
  auto f = frontiers(g);
  REQUIRE(f.size() == 1);
  CHECK(f[0].isApprox(Point3(2.5, 3.5, 4.5)));

  // Free half below z = 3, unknown above: one planar cluster of 36 cells.
  OccupancyGrid h(Point3::Zero(), 1.0, {6, 6, 6});
  for (std::size_t i = 0; i < h.cell_count(); ++i) {
    if (h.unlinear(i)[2] < 3) h.set(h.unlinear(i), CellState::kFree);
  }
  const auto cl = frontier_clusters(h);
  REQUIRE(cl.size() == 1);
  CHECK(cl[0].size == 36);
  CHECK(cl[0].centroid.isApprox(Point3(3, 3, 2.5)));

  // Fully known grids have no frontier.
  for (std::size_t i = 0; i < h.cell_count(); ++i) h.set(h.unlinear(i), CellState::kFree);
  CHECK(frontiers(h).empty());
}

TEST_CASE("frontier clusters match the brute-force oracle") {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 30; ++t) {
    OccupancyGrid g(Point3::Zero(), 1.0, {7, 6, 5});
    std::discrete_distribution<int> pick({0.45, 0.45, 0.10});
    for (std::size_t i = 0; i < g.cell_count(); ++i) {
      g.set(g.unlinear(i), static_cast<CellState>(pick(rng)));
    }
    const auto got = frontier_clusters(g);
    std::set<std::set<std::size_t>> parts;
    for (std::size_t k = 0; k < got.size(); ++k) {
      parts.insert(std::set<std::size_t>(got[k].cells.begin(), got[k].cells.end()));
      CHECK(got[k].size == got[k].cells.size());
      if (k > 0) CHECK(got[k - 1].size >= got[k].size);
      Point3 sum = Point3::Zero();
      for (auto c : got[k].cells) sum += g.center(g.unlinear(c));
      CHECK(got[k].centroid.isApprox(sum / double(got[k].size)));
    }
    CHECK(parts == frontier_oracle(g));
  }
}

TEST_CASE("path length fixtures") {
  CHECK(path_length(std::vector<Point3>{Point3(1, 2, 3)}) == 0.0);
  CHECK(path_length(std::vector<Point3>{Point3(0, 0, 0), Point3(3, 4, 0)}) == 5.0);
  CHECK(path_length(std::vector<Point3>{Point3(0, 0, 0), Point3(1, 0, 0), Point3(1, 1, 0),
                                        Point3(1, 1, 1)}) == 3.0);
  CHECK_THROWS_AS(path_length(std::vector<Point3>{}), Error);
}

TEST_CASE("rrt trivial cases") {
  const OccupancyGrid g(Point3(-2, -2, -2), 1.0, {14, 4, 4});
  RrtParams p;
  const auto same = rrt_connect(Point3(0, 0, 0), Point3(0, 0, 0), g, p);
  CHECK(same.waypoints.size() == 1);
  CHECK(same.length == 0.0);

  p.step = 0.5;
  const auto straight = rrt_connect(Point3(0, 0, 0), Point3(10, 0, 0), g, p);
  CHECK(straight.length >= 10.0);
  CHECK(straight.length <= 10.0 + 4.0 * p.step);
  CHECK(straight.waypoints.front() == Point3(0, 0, 0));
  CHECK(straight.waypoints.back() == Point3(10, 0, 0));
}

TEST_CASE("rrt endpoint and budget errors") {
  OccupancyGrid g(Point3::Zero(), 1.0, {10, 10, 10});
  // Wall at x = 5 spanning the whole grid.
  for (int y = 0; y < 10; ++y) {
    for (int z = 0; z < 10; ++z) g.set({5, y, z}, CellState::kOccupied);
  }
  RrtParams p;
  p.max_iters = 2000;
  auto code_of = [&](const Point3& a, const Point3& b) {
    try {
      rrt_connect(a, b, g, p);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode{};
  };
  CHECK(code_of(Point3(1, 1, 1), Point3(9, 9, 9)) == ErrorCode::kNoPath);
  CHECK(code_of(Point3(1, 1, 1), Point3(5.5, 1, 1)) == ErrorCode::kInvalidEndpoint);
  CHECK(code_of(Point3(1, 1, 1), Point3(12, 1, 1)) == ErrorCode::kInvalidEndpoint);
  p.step = 0.0;
  CHECK(code_of(Point3(1, 1, 1), Point3(2, 2, 2)) == ErrorCode::kParameter);
}

TEST_CASE("rrt routes around a wall with a gap") {
  OccupancyGrid g(Point3::Zero(), 1.0, {12, 12, 4});
  for (int y = 0; y < 12; ++y) {
    for (int z = 0; z < 4; ++z) {
      if (y < 10) g.set({6, y, z}, CellState::kOccupied);
    }
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RrtParams p;
    p.seed = seed;
    p.step = 0.8;
    const auto path = rrt_connect(Point3(2, 2, 2), Point3(10, 2, 2), g, p);
    CHECK(sampled_free(g, path.waypoints));
    CHECK(path.length == doctest::Approx(path_length(path.waypoints)));
    CHECK(path.length > 8.0);
    const auto again = rrt_connect(Point3(2, 2, 2), Point3(10, 2, 2), g, p);
    CHECK(again.waypoints == path.waypoints);
  }
}

TEST_CASE("rrt succeeds on random queries in a free 40 m grid") {
  const OccupancyGrid g(Point3(-20, -20, -20), 1.0, {40, 40, 40});
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-19.9, 19.9);
  int ok = 0;
  for (int t = 0; t < 100; ++t) {
    const Point3 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng));
    RrtParams p;
    p.seed = static_cast<std::uint64_t>(t);
    const auto path = rrt_connect(a, b, g, p);
    const double d = (b - a).norm();
    if (sampled_free(g, path.waypoints) && path.length <= d + 4.0 * p.step + 1e-9) ++ok;
  }
  CHECK(ok == 100);
}

TEST_CASE("rrt in a cluttered grid stays collision free") {
  OccupancyGrid g(Point3::Zero(), 0.5, {30, 30, 30});
  std::mt19937_64 rng(5);
  std::bernoulli_distribution occ(0.15);
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    if (occ(rng)) g.set(g.unlinear(i), CellState::kOccupied);
  }
  std::uniform_real_distribution<double> u(0.1, 14.9);
  int planned = 0;
  for (int t = 0; t < 40; ++t) {
    const Point3 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng));
    if (g.state_at(a) == CellState::kOccupied || g.state_at(b) == CellState::kOccupied) continue;
    RrtParams p;
    p.seed = static_cast<std::uint64_t>(t);
    p.step = 0.5;
    try {
      const auto path = rrt_connect(a, b, g, p);
      ++planned;
      CHECK(sampled_free(g, path.waypoints));
      CHECK(path.waypoints.front() == a);
      CHECK(path.waypoints.back() == b);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kNoPath);
    }
  }
  CHECK(planned > 0);
}
