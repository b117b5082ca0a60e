// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0

#include "prednbv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "prednbv/error.hpp"
#include "prednbv/kdtree.hpp"

namespace prednbv {

namespace {

void require_nonempty(const PointCloud& c, const char* what) {
  if (c.empty()) fail(ErrorCode::kEmptyInput, std::string(what) + ": empty cloud");
}

double directed_mean(const PointCloud& from, const KdTree& to, Norm norm) {
  double sum = 0.0;
  for (const auto& p : from) sum += to.nearest(p, norm).distance;
  return sum / static_cast<double>(from.size());
}

double matched_fraction(const PointCloud& from, const KdTree& to, double radius) {
  std::size_t hit = 0;
  for (const auto& p : from) hit += to.any_within(p, radius) ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(from.size());
}

// Forward auction with epsilon scaling (Bertsekas). Maximises -cost; the
// returned gap is the primal/dual difference of the final phase.
EmdResult auction_emd(const PointCloud& a, const PointCloud& b) {
  const std::size_t n = a.size();
  auto cost = [&](std::size_t i, std::size_t j) { return (a[i] - b[j]).norm(); };

  double max_cost = 0.0;
  const Point3 ca = centroid(a.points());
  for (const auto& p : b) max_cost = std::max(max_cost, (p - ca).norm());
  for (const auto& p : a) max_cost = std::max(max_cost, (p - ca).norm());
  max_cost = std::max(2.0 * max_cost, 1e-12);

  const double eps_final = 1e-5 * max_cost;
  std::vector<double> price(n, 0.0);
  std::vector<std::size_t> owner(n), assigned(n);
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  for (double eps = max_cost / 4.0;; eps = std::max(eps / 5.0, eps_final)) {
    std::fill(owner.begin(), owner.end(), kNone);
    std::fill(assigned.begin(), assigned.end(), kNone);
    std::deque<std::size_t> queue;
    for (std::size_t i = 0; i < n; ++i) queue.push_back(i);
    while (!queue.empty()) {
      const std::size_t i = queue.front();
      queue.pop_front();
      double best = -std::numeric_limits<double>::infinity();
      double second = best;
      std::size_t best_j = 0;
      for (std::size_t j = 0; j < n; ++j) {
        const double v = -cost(i, j) - price[j];
        if (v > best) {
          second = best;
          best = v;
          best_j = j;
        } else if (v > second) {
          second = v;
        }
      }
      const double incr = (n == 1 ? 0.0 : best - second) + eps;
      price[best_j] += incr;
      if (owner[best_j] != kNone) {
        assigned[owner[best_j]] = kNone;
        queue.push_back(owner[best_j]);
      }
      owner[best_j] = i;
      assigned[i] = best_j;
    }
    if (eps <= eps_final) break;
  }

  EmdResult r;
  r.exact = false;
  r.assignment = assigned;
  double primal = 0.0;
  for (std::size_t i = 0; i < n; ++i) primal += cost(i, assigned[i]);
  // Dual of the min-cost problem: sum_i min_j (c_ij + p_j) - sum_j p_j is a
  // lower bound on the optimum.
  double dual = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) m = std::min(m, cost(i, j) + price[j]);
    dual += m;
  }
  for (double p : price) dual -= p;
  r.value = primal / static_cast<double>(n);
  r.duality_gap = std::max(0.0, (primal - dual) / static_cast<double>(n));
  return r;
}

}  // namespace

double chamfer(const PointCloud& a, const PointCloud& b, ChamferVariant variant) {
  require_nonempty(a, "chamfer");
  require_nonempty(b, "chamfer");
  const Norm norm = variant == ChamferVariant::kL1 ? Norm::kL1 : Norm::kL2Squared;
  const KdTree ta(a.points());
  const KdTree tb(b.points());
  return 0.5 * (directed_mean(a, tb, norm) + directed_mean(b, ta, norm));
}

double one_sided_chamfer(const PointCloud& from, const PointCloud& to) {
  require_nonempty(from, "one_sided_chamfer");
  require_nonempty(to, "one_sided_chamfer");
  const KdTree t(to.points());
  double sum = 0.0;
  for (const auto& p : from) sum += std::sqrt(t.nearest(p).distance);
  return sum / static_cast<double>(from.size());
}

std::vector<std::size_t> solve_assignment(const std::vector<double>& cost, std::size_t n) {
  if (cost.size() != n * n) fail(ErrorCode::kParameter, "assignment cost matrix is not n x n");
  // Shortest augmenting path Hungarian method with potentials, 1-based rows.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

EmdResult emd_detailed(const PointCloud& a, const PointCloud& b) {
  require_nonempty(a, "emd");
  require_nonempty(b, "emd");
  if (a.size() != b.size()) {
    fail(ErrorCode::kCardinality, "emd requires clouds of equal size");
  }
  const std::size_t n = a.size();
  if (std::equal(a.begin(), a.end(), b.begin())) {
    EmdResult same;
    same.assignment.resize(n);
    for (std::size_t i = 0; i < n; ++i) same.assignment[i] = i;
    return same;
  }
  if (n > kEmdExactLimit) return auction_emd(a, b);

  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = (a[i] - b[j]).norm();
  }
  EmdResult r;
  r.assignment = solve_assignment(cost, n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += cost[i * n + r.assignment[i]];
  r.value = sum / static_cast<double>(n);
  return r;
}

double emd(const PointCloud& a, const PointCloud& b) { return emd_detailed(a, b).value; }

double fscore(const PointCloud& pred, const PointCloud& gt, double threshold) {
  require_nonempty(pred, "fscore");
  require_nonempty(gt, "fscore");
  if (!(threshold > 0.0)) fail(ErrorCode::kParameter, "fscore threshold must be positive");
  const KdTree tp(pred.points());
  const KdTree tg(gt.points());
  const double precision = matched_fraction(pred, tg, threshold);
  const double recall = matched_fraction(gt, tp, threshold);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double coverage(const PointCloud& observed, const PointCloud& gt, double tol) {
  require_nonempty(gt, "coverage");
  if (!(tol > 0.0)) fail(ErrorCode::kParameter, "coverage tolerance must be positive");
  if (observed.empty()) return 0.0;
  const KdTree t(observed.points());
  return matched_fraction(gt, t, tol);
}

double default_fscore_threshold(const PointCloud& gt) {
  require_nonempty(gt, "default_fscore_threshold");
  Point3 lo = gt[0], hi = gt[0];
  for (const auto& p : gt) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double diag = (hi - lo).norm();
  return diag > 0.0 ? 0.01 * diag : 1e-6;
}

PointCloud stride_subsample(const PointCloud& cloud, std::size_t count) {
  if (count >= cloud.size()) return cloud;
  std::vector<std::size_t> idx(count);
  for (std::size_t i = 0; i < count; ++i) idx[i] = i * cloud.size() / count;
  return cloud.select(idx);
}

MetricReport evaluate(const PointCloud& pred, const PointCloud& gt, double threshold) {
  require_nonempty(pred, "evaluate");
  require_nonempty(gt, "evaluate");
  MetricReport r;
  r.threshold = threshold > 0.0 ? threshold : default_fscore_threshold(gt);
  r.cd_l1 = chamfer(pred, gt, ChamferVariant::kL1);
  r.cd_l2 = chamfer(pred, gt, ChamferVariant::kL2);
  r.fscore = fscore(pred, gt, r.threshold);
  const std::size_t m = std::min({pred.size(), gt.size(), kEvaluateEmdCap});
  r.emd = emd(stride_subsample(pred, m), stride_subsample(gt, m));
  return r;
}

void to_json(nlohmann::json& j, const MetricReport& r) {
  j = nlohmann::json{{"cd_l1", r.cd_l1},
                     {"cd_l2", r.cd_l2},
                     {"emd", r.emd},
                     {"fscore", r.fscore},
                     {"threshold", r.threshold}};
}

}  // namespace prednbv
