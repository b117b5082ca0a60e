// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0

#include "prednbv/convex_hull.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>


#include "prednbv/error.hpp"

namespace prednbv {

namespace {

constexpr int kNone = -1;

struct Face {
  std::array<int, 3> v{};
  std::array<int, 3> nb{kNone, kNone, kNone};  // across edge v[i] -> v[i+1]
  Point3 normal = Point3::Zero();
  double offset = 0.0;
  std::vector<int> outside;
  std::vector<int> coplanar;
  bool alive = true;
  unsigned stamp = 0;
};

class Quickhull {
 public:
  Quickhull(std::span<const Point3> pts, double eps) : pts_(pts), eps_(eps) {}

  void run(const std::array<int, 4>& simplex, ConvexHull& out);

 private:
  double dist(const Face& f, int p) const { return f.normal.dot(pts_[p]) - f.offset; }
  struct HorizonEdge {
    int u, v, across, across_edge;
  };

  int make_face(int a, int b, int c, const Point3* fallback_normal);
  void build_horizon(const std::vector<int>& visible, unsigned stamp,
                     std::vector<HorizonEdge>& horizon) const;
  // Marks every component of hidden faces except the largest as visible.
  void absorb_holes(unsigned stamp, std::vector<int>& visible);
  void assign(int p, std::span<const int> candidates);

  std::span<const Point3> pts_;
  double eps_;
  std::vector<Face> faces_;
};

int Quickhull::make_face(int a, int b, int c, const Point3* fallback_normal) {
  Face f;
  f.v = {a, b, c};
  Point3 n = (pts_[b] - pts_[a]).cross(pts_[c] - pts_[a]);
  const double len = n.norm();
  if (len > 0.0 && std::isfinite(len)) {
    n /= len;
  } else if (fallback_normal != nullptr) {
    n = *fallback_normal;
  }
  f.normal = n;
  f.offset = n.dot(pts_[a]);
  faces_.push_back(std::move(f));
  return static_cast<int>(faces_.size()) - 1;
}

void Quickhull::assign(int p, std::span<const int> candidates) {
  int coplanar_face = kNone;
  for (int fi : candidates) {
    const double d = dist(faces_[fi], p);
    if (d > eps_) {
      faces_[fi].outside.push_back(p);
      return;
    }
    if (coplanar_face == kNone && d >= -eps_) coplanar_face = fi;
  }
  if (coplanar_face != kNone) faces_[coplanar_face].coplanar.push_back(p);
}

void Quickhull::build_horizon(const std::vector<int>& visible, unsigned stamp,
                              std::vector<HorizonEdge>& horizon) const {
  horizon.clear();
  for (int cur : visible) {
    for (int e = 0; e < 3; ++e) {
      const int nb = faces_[cur].nb[e];
      if (faces_[nb].stamp == stamp) continue;
      const int u = faces_[cur].v[e];
      const int v = faces_[cur].v[(e + 1) % 3];
      int across_edge = kNone;
      for (int k = 0; k < 3; ++k) {
        if (faces_[nb].v[k] == v && faces_[nb].v[(k + 1) % 3] == u) across_edge = k;
      }
      if (across_edge == kNone) throw std::logic_error("quickhull: broken adjacency");
      horizon.push_back({u, v, nb, across_edge});
    }
  }
}

void Quickhull::absorb_holes(unsigned stamp, std::vector<int>& visible) {
  std::vector<int> component(faces_.size(), kNone);
  std::vector<std::vector<int>> members;
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    if (!faces_[f].alive || faces_[f].stamp == stamp || component[f] != kNone) continue;
    const int id = static_cast<int>(members.size());
    members.emplace_back();
    std::vector<int> queue = {static_cast<int>(f)};
    component[f] = id;
    while (!queue.empty()) {
      const int cur = queue.back();
      queue.pop_back();
      members[id].push_back(cur);
      for (int nb : faces_[cur].nb) {
        if (faces_[nb].stamp != stamp && component[nb] == kNone) {
          component[nb] = id;
          queue.push_back(nb);
        }
      }
    }
  }
  std::size_t keep = 0;
  for (std::size_t c = 1; c < members.size(); ++c) {
    if (members[c].size() > members[keep].size()) keep = c;
  }
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (c == keep) continue;
    for (int f : members[c]) {
      faces_[f].stamp = stamp;
      visible.push_back(f);
    }
  }
}

void Quickhull::run(const std::array<int, 4>& s, ConvexHull& out) {
  // Orient the tetrahedron so that s[3] is below the first face.
  std::array<int, 4> t = s;
  {
    const Point3 n = (pts_[t[1]] - pts_[t[0]]).cross(pts_[t[2]] - pts_[t[0]]);
    if (n.dot(pts_[t[3]] - pts_[t[0]]) > 0.0) std::swap(t[1], t[2]);
  }
  const std::array<std::array<int, 3>, 4> tet = {{{t[0], t[1], t[2]},
                                                  {t[0], t[3], t[1]},
                                                  {t[1], t[3], t[2]},
                                                  {t[2], t[3], t[0]}}};
  for (const auto& f : tet) make_face(f[0], f[1], f[2], nullptr);
  {
    std::unordered_map<long long, std::pair<int, int>> edge;
    const long long n = static_cast<long long>(pts_.size());
    for (int fi = 0; fi < 4; ++fi) {
      for (int e = 0; e < 3; ++e) {
        edge[faces_[fi].v[e] * n + faces_[fi].v[(e + 1) % 3]] = {fi, e};
      }
    }
    for (int fi = 0; fi < 4; ++fi) {
      for (int e = 0; e < 3; ++e) {
        const auto it = edge.find(faces_[fi].v[(e + 1) % 3] * n + faces_[fi].v[e]);
        faces_[fi].nb[e] = it->second.first;
      }
    }
  }

  const std::array<int, 4> initial = {0, 1, 2, 3};
  for (int p = 0; p < static_cast<int>(pts_.size()); ++p) {
    if (p == t[0] || p == t[1] || p == t[2] || p == t[3]) continue;
    assign(p, initial);
  }

  std::vector<int> stack = {0, 1, 2, 3};
  unsigned stamp = 0;
  std::vector<int> visible, new_faces, pending;
  std::vector<HorizonEdge> horizon;
  std::unordered_map<int, int> starts, ends, next_of;

  while (!stack.empty()) {
    const int fi = stack.back();
    stack.pop_back();
    if (!faces_[fi].alive || faces_[fi].outside.empty()) continue;

    int eye = kNone;
    {
      double best = -1.0;
      for (int p : faces_[fi].outside) {
        const double d = dist(faces_[fi], p);
        if (d > best) {
          best = d;
          eye = p;
        }
      }
    }

    ++stamp;
    visible.clear();
    horizon.clear();
    visible.push_back(fi);
    faces_[fi].stamp = stamp;
    for (std::size_t k = 0; k < visible.size(); ++k) {
      const int cur = visible[k];
      for (int e = 0; e < 3; ++e) {
        const int nb = faces_[cur].nb[e];
        if (faces_[nb].stamp == stamp) continue;
        if (dist(faces_[nb], eye) > eps_) {
          faces_[nb].stamp = stamp;
          visible.push_back(nb);
        }
      }
    }
    // Rounding can leave the visible region pinched at a vertex or with
    // holes. Grow it until its boundary is one simple loop.
    while (true) {
      build_horizon(visible, stamp, horizon);
      next_of.clear();
      std::vector<int> pinched;
      for (const auto& h : horizon) {
        if (!next_of.emplace(h.u, h.v).second) pinched.push_back(h.u);
      }
      if (!pinched.empty()) {
        for (std::size_t f = 0; f < faces_.size(); ++f) {
          Face& face = faces_[f];
          if (!face.alive || face.stamp == stamp) continue;
          for (int u : pinched) {
            if (face.v[0] == u || face.v[1] == u || face.v[2] == u) {
              face.stamp = stamp;
              visible.push_back(static_cast<int>(f));
              break;
            }
          }
        }
        continue;
      }
      std::size_t loop = 0;
      for (int u = horizon.front().u;;) {
        ++loop;
        u = next_of.at(u);
        if (u == horizon.front().u || loop > horizon.size()) break;
      }
      if (loop == horizon.size()) break;
      absorb_holes(stamp, visible);
    }

    new_faces.clear();
    starts.clear();
    ends.clear();
    for (const auto& h : horizon) {
      const Point3 fallback = faces_[h.across].normal;
      const int nf = make_face(h.u, h.v, eye, &fallback);
      faces_[nf].nb[0] = h.across;
      faces_[h.across].nb[h.across_edge] = nf;
      starts.emplace(h.u, nf);
      ends.emplace(h.v, nf);
      new_faces.push_back(nf);
    }
    for (int nf : new_faces) {
      Face& f = faces_[nf];
      f.nb[1] = starts.at(f.v[1]);  // edge v -> eye
      f.nb[2] = ends.at(f.v[0]);    // edge eye -> u
    }

    pending.clear();
    for (int vf : visible) {
      Face& f = faces_[vf];
      f.alive = false;
      for (int p : f.v) {
        if (p != eye && !next_of.contains(p)) pending.push_back(p);
      }
      for (int p : f.outside) {
        if (p != eye) pending.push_back(p);
      }
      pending.insert(pending.end(), f.coplanar.begin(), f.coplanar.end());
      std::vector<int>().swap(f.outside);
      std::vector<int>().swap(f.coplanar);
    }
    for (int p : pending) assign(p, new_faces);
    for (int nf : new_faces) stack.push_back(nf);
  }

  for (const auto& f : faces_) {
    if (!f.alive) continue;
    out.faces.push_back({static_cast<std::size_t>(f.v[0]), static_cast<std::size_t>(f.v[1]),
                         static_cast<std::size_t>(f.v[2])});
    for (int p : f.v) out.on_boundary[p] = 1;
    for (int p : f.coplanar) out.on_boundary[p] = 1;
  }
}

double cross2(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

void planar_hull(std::span<const Point3> pts, const std::array<int, 3>& basis, double eps,
                 ConvexHull& out) {
  const Point3 origin = pts[basis[0]];
  const Point3 e1 = (pts[basis[1]] - origin).normalized();
  const Point3 n = e1.cross(pts[basis[2]] - origin).normalized();
  const Point3 e2 = n.cross(e1);
  std::vector<Eigen::Vector2d> q(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point3 d = pts[i] - origin;
    q[i] = {d.dot(e1), d.dot(e2)};
  }
  std::vector<std::size_t> order(pts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return q[a].x() < q[b].x() || (q[a].x() == q[b].x() && q[a].y() < q[b].y());
  });
  // Andrew's monotone chain without collinear points; those are recovered
  // by the edge-distance pass below.
  std::vector<std::size_t> hull(2 * order.size());
  std::size_t k = 0;
  for (std::size_t i : order) {
    while (k >= 2 && cross2(q[hull[k - 2]], q[hull[k - 1]], q[i]) <= 0.0) --k;
    hull[k++] = i;
  }
  for (std::size_t t = order.size() - 1, lower = k + 1; t-- > 0;) {
    const std::size_t i = order[t];
    while (k >= lower && cross2(q[hull[k - 2]], q[hull[k - 1]], q[i]) <= 0.0) --k;
    hull[k++] = i;
  }
  hull.resize(k - 1);
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Eigen::Vector2d a = q[hull[i]];
    const Eigen::Vector2d b = q[hull[(i + 1) % hull.size()]];
    const Eigen::Vector2d ab = b - a;
    const double len2 = ab.squaredNorm();
    out.on_boundary[hull[i]] = 1;
    for (std::size_t p = 0; p < q.size(); ++p) {
      if (out.on_boundary[p]) continue;
      const double t = len2 > 0.0 ? std::clamp((q[p] - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
      if ((q[p] - (a + t * ab)).norm() <= eps) out.on_boundary[p] = 1;
    }
  }
}

}  // namespace

ConvexHull convex_hull(std::span<const Point3> pts, double relative_tolerance) {
  ConvexHull out;
  out.on_boundary.assign(pts.size(), 0);
  if (pts.empty()) return out;

  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double eps = relative_tolerance * std::max(scale, 1e-300);
  out.tolerance = eps;

  // Extreme pair over the three axes.
  int i0 = 0, i1 = 0;
  {
    double best = -1.0;
    for (int axis = 0; axis < 3; ++axis) {
      int lo = 0, hi = 0;
      for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
        if (pts[i][axis] < pts[lo][axis]) lo = i;
        if (pts[i][axis] > pts[hi][axis]) hi = i;
      }
      const double d = (pts[hi] - pts[lo]).norm();
      if (d > best) {
        best = d;
        i0 = lo;
        i1 = hi;
      }
    }
    if (best <= eps) {
      out.dimension = 0;
      std::fill(out.on_boundary.begin(), out.on_boundary.end(), 1);
      return out;
    }
  }
  const Point3 dir = (pts[i1] - pts[i0]).normalized();
  int i2 = i0;
  {
    double best = -1.0;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
      const Point3 d = pts[i] - pts[i0];
      const double off = (d - d.dot(dir) * dir).norm();
      if (off > best) {
        best = off;
        i2 = i;
      }
    }
    if (best <= eps) {
      out.dimension = 1;
      double lo = 0.0, hi = 0.0;
      for (const auto& p : pts) {
        lo = std::min(lo, (p - pts[i0]).dot(dir));
        hi = std::max(hi, (p - pts[i0]).dot(dir));
      }
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const double t = (pts[i] - pts[i0]).dot(dir);
        out.on_boundary[i] = (t <= lo + eps || t >= hi - eps) ? 1 : 0;
      }
      return out;
    }
  }
  int i3 = i0;
  {
    const Point3 n = (pts[i1] - pts[i0]).cross(pts[i2] - pts[i0]).normalized();
    double best = -1.0;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
      const double d = std::abs(n.dot(pts[i] - pts[i0]));
      if (d > best) {
        best = d;
        i3 = i;
      }
    }
    if (best <= eps) {
      out.dimension = 2;
      planar_hull(pts, {i0, i1, i2}, eps, out);
      return out;
    }
  }
  out.dimension = 3;
  Quickhull qh(pts, eps);
  qh.run({i0, i1, i2, i3}, out);
  return out;
}

}  // namespace prednbv
