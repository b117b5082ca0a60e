// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0
//
// prednbv command-line front end. Exit codes: 0 success, 1 runtime failure,
// 2 usage error.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "CLI11.hpp"
#include "prednbv/prednbv.h"

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

int report(prednbv_status s, const char* what) {
  std::fprintf(stderr, "prednbv: %s: %s (%s)\n", what, prednbv_last_error(),
               prednbv_status_name(s));
  return kFailure;
}

int cmd_run(const std::string& config, int jobs) {
  prednbv_experiment* exp = nullptr;
  const prednbv_status s = prednbv_experiment_load(config.c_str(), &exp);
  if (s == PREDNBV_E_PARAMETER) {
    std::fprintf(stderr, "prednbv: invalid experiment config: %s\n", prednbv_last_error());
    return kUsage;
  }
  if (s != PREDNBV_OK) return report(s, "cannot load experiment");
  size_t failures = 0;
  const prednbv_status r = prednbv_experiment_run(exp, jobs, &failures);
  if (r != PREDNBV_OK) {
    prednbv_experiment_free(exp);
    return report(r, "run failed");
  }
  std::fputs(prednbv_experiment_summary(exp), stdout);
  prednbv_experiment_free(exp);
  if (failures > 0) {
    std::fprintf(stderr, "prednbv: %zu failure(s); see failures.json\n", failures);
    return kFailure;
  }
  return kOk;
}

int cmd_metrics(const std::string& pred_path, const std::string& gt_path, double threshold) {
  prednbv_cloud* pred = nullptr;
  prednbv_cloud* gt = nullptr;
  prednbv_status s = prednbv_cloud_load(pred_path.c_str(), &pred);
  if (s != PREDNBV_OK) return report(s, pred_path.c_str());
  s = prednbv_cloud_load(gt_path.c_str(), &gt);
  if (s != PREDNBV_OK) {
    prednbv_cloud_free(pred);
    return report(s, gt_path.c_str());
  }
  char* json = nullptr;
  s = prednbv_metrics_json(pred, gt, threshold, &json);
  prednbv_cloud_free(pred);
  prednbv_cloud_free(gt);
  if (s != PREDNBV_OK) return report(s, "metrics");
  std::printf("%s\n", json);
  prednbv_string_free(json);
  return kOk;
}

int cmd_gen_scenes(const std::string& out, std::uint64_t seed) {
  const prednbv_status s = prednbv_generate_scenes(out.c_str(), seed);
  if (s != PREDNBV_OK) return report(s, "gen-scenes");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* level = std::getenv("PREDNBV_LOG")) {
    if (prednbv_set_log_level(level) != PREDNBV_OK) {
      std::fprintf(stderr, "prednbv: ignoring PREDNBV_LOG: %s\n", prednbv_last_error());
    }
  }

  CLI::App app{"Prediction-driven next-best-view planning"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(prednbv_version()));

  std::string config;
  int jobs = 1;
  auto* run = app.add_subcommand("run", "Run an experiment and write reports plus summary.csv");
  run->add_option("--config", config, "Experiment JSON")->required();
  run->add_option("--jobs", jobs, "Episodes run in parallel")->check(CLI::PositiveNumber);

  std::string pred_path, gt_path;
  double threshold = 0.0;
  auto* metrics = app.add_subcommand("metrics", "Compare a predicted cloud with ground truth");
  metrics->add_option("--pred", pred_path, "Predicted cloud (.ply/.xyz)")->required();
  metrics->add_option("--gt", gt_path, "Ground-truth cloud (.ply/.xyz)")->required();
  metrics->add_option("--threshold", threshold, "F-score distance; default 1% of the gt diagonal");

  std::string out_dir;
  std::uint64_t seed = 0;
  auto* gen = app.add_subcommand("gen-scenes", "Write the synthetic ten-scene suite");
  gen->add_option("--out", out_dir, "Output directory")->required();
  gen->add_option("--seed", seed, "Generator seed")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (*run) return cmd_run(config, jobs);
  if (*metrics) return cmd_metrics(pred_path, gt_path, threshold);
  if (*gen) return cmd_gen_scenes(out_dir, seed);
  return kUsage;
}
