// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0
//
// Reconstruction quality metrics. All functions are pure and return values in
// the units of the input clouds (no x1000 scaling).

#ifndef PREDNBV_METRICS_HPP_
#define PREDNBV_METRICS_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prednbv/geometry.hpp"

namespace prednbv {

enum class ChamferVariant { kL1, kL2 };

// Symmetric chamfer: half the sum of both directed mean nearest distances,
// L1 norm for kL1 and squared Euclidean for kL2.
double chamfer(const PointCloud& a, const PointCloud& b, ChamferVariant variant);

// Directed mean nearest Euclidean distance from `from` to `to`.
double one_sided_chamfer(const PointCloud& from, const PointCloud& to);

/// Inputs up to this size are matched exactly.
inline constexpr std::size_t kEmdExactLimit = 256;

struct EmdResult {
  double value = 0.0;          // mean matched Euclidean distance
  bool exact = true;
  double duality_gap = 0.0;    // upper bound on value - optimum, same units
  std::vector<std::size_t> assignment;  // a[i] is matched with b[assignment[i]]
};

EmdResult emd_detailed(const PointCloud& a, const PointCloud& b);
double emd(const PointCloud& a, const PointCloud& b);

// Minimum-cost perfect matching on a dense n x n cost matrix (row-major).
// Returns column assigned to each row.
std::vector<std::size_t> solve_assignment(const std::vector<double>& cost, std::size_t n);

double fscore(const PointCloud& pred, const PointCloud& gt, double threshold);

// Fraction of `gt` points that have an `observed` point within `tol`.
double coverage(const PointCloud& observed, const PointCloud& gt, double tol);

// 1% of the ground-truth bounding-box diagonal.
double default_fscore_threshold(const PointCloud& gt);

struct MetricReport {
  double cd_l1 = 0.0;
  double cd_l2 = 0.0;
  double emd = 0.0;
  double fscore = 0.0;
  double threshold = 0.0;
};

// Largest cloud size fed to EMD by evaluate(); larger or unequal inputs are
// stride-subsampled to a common size first.
inline constexpr std::size_t kEvaluateEmdCap = 2048;

// threshold <= 0 selects default_fscore_threshold(gt).
MetricReport evaluate(const PointCloud& pred, const PointCloud& gt, double threshold = 0.0);

// Deterministic evenly spaced subset of `count` points.
PointCloud stride_subsample(const PointCloud& cloud, std::size_t count);

void to_json(nlohmann::json& j, const MetricReport& r);

}  // namespace prednbv

#endif  // PREDNBV_METRICS_HPP_
