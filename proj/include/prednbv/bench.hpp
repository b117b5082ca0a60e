// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment runner: every (scene, method, seed) episode, per-episode JSON
// reports and a summary table.

#ifndef PREDNBV_BENCH_HPP_
#define PREDNBV_BENCH_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prednbv/episode.hpp"
#include "prednbv/planner.hpp"
#include "prednbv/predictor.hpp"

namespace prednbv {

struct MethodSpec {
  enum class Type { kPrednbv, kBaseline };
  Type type = Type::kPrednbv;
  PredictorKind predictor;  // kPrednbv only

  // "prednbv-<predictor>" or "baseline".
  std::string label() const;
};

struct ExperimentConfig {
  std::vector<std::filesystem::path> scenes;  // manifest paths
  std::vector<MethodSpec> methods;
  PlannerConfig planner;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output_dir;

  // Throws kParameter when a list is empty or methods repeat.
  void validate() const;
};

// Relative scene and output paths are resolved against `base_dir`.
ExperimentConfig experiment_from_json(const nlohmann::json& j,
                                      const std::filesystem::path& base_dir);
ExperimentConfig load_experiment(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

struct SummaryRow {
  std::string scene;
  std::string method;
  std::uint64_t seed = 0;
  std::size_t points_seen = 0;
  double coverage = 0.0;
  double distance = 0.0;
  int steps = 0;
  // (points_seen - baseline) / baseline for the same scene and seed.
  std::optional<double> improvement;
};

struct RunFailure {
  std::string scene;  // manifest path as configured
  std::string method;
  std::uint64_t seed = 0;
  std::string message;
};

struct RunResult {
  std::vector<SummaryRow> rows;  // scene, method, seed order of the config
  std::vector<RunFailure> failures;
  bool ok() const { return failures.empty(); }
};

// Fills the improvement column of prednbv rows in place.
void compute_improvements(std::vector<SummaryRow>& rows);

// Header: scene,method,seed,points_seen,coverage,distance,steps,improvement.
std::string summary_csv(const std::vector<SummaryRow>& rows);

// File name of one episode report inside <output_dir>/reports.
std::string report_file_name(const std::string& scene, const std::string& method,
                             std::uint64_t seed);

// Runs every episode, `jobs` at a time, writing each report and then
// summary.csv and failures.json atomically. A scene that fails to load is
// recorded and the rest continue.
RunResult run_experiment(const ExperimentConfig& cfg, int jobs = 1);

}  // namespace prednbv

#endif  // PREDNBV_BENCH_HPP_
