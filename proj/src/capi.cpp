// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0

#include "prednbv/prednbv.h"

#include <cstring>
#include <new>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "prednbv/bench.hpp"
#include "prednbv/cloud_io.hpp"
#include "prednbv/error.hpp"
#include "prednbv/metrics.hpp"
#include "prednbv/scene.hpp"

struct prednbv_cloud {
  prednbv::PointCloud cloud;
};

struct prednbv_experiment {
  prednbv::ExperimentConfig config;
  std::string summary;
};

namespace {

thread_local std::string g_last_error;

// Diagnostics go to stderr so that stdout stays machine-readable.
void ensure_logger() {
  static const bool once = [] {
    auto logger = spdlog::stderr_color_mt("prednbv");
    spdlog::set_default_logger(logger);
    return true;
  }();
  (void)once;
}

template <typename F>
prednbv_status guarded(F&& body) {
  ensure_logger();
  g_last_error.clear();
  try {
    body();
    return PREDNBV_OK;
  } catch (const prednbv::Error& e) {
    g_last_error = e.what();
    return static_cast<prednbv_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown failure";
  }
  return PREDNBV_E_INTERNAL;
}

void require(const void* p, const char* what) {
  if (p == nullptr) prednbv::fail(prednbv::ErrorCode::kParameter, std::string(what) + " is null");
}

}  // namespace

extern "C" {

const char* prednbv_version(void) { return "1.0.0"; }

const char* prednbv_last_error(void) { return g_last_error.c_str(); }

const char* prednbv_status_name(prednbv_status status) {
  if (status == PREDNBV_OK) return "ok";
  if (status == PREDNBV_E_INTERNAL) return "internal";
  if (status >= PREDNBV_E_PARAMETER && status <= PREDNBV_E_PARSE) {
    return prednbv::to_string(static_cast<prednbv::ErrorCode>(status));
  }
  return "unknown";
}

prednbv_status prednbv_set_log_level(const char* level) {
  return guarded([&] {
    require(level, "level");
    const std::string l = level;
    if (l == "error") spdlog::set_level(spdlog::level::err);
    else if (l == "info") spdlog::set_level(spdlog::level::info);
    else if (l == "debug") spdlog::set_level(spdlog::level::debug);
    else prednbv::fail(prednbv::ErrorCode::kParameter, "log level must be error, info or debug");
  });
}

prednbv_status prednbv_cloud_create(const double* xyz, size_t count, prednbv_cloud** out) {
  return guarded([&] {
    require(out, "out");
    if (count > 0) require(xyz, "xyz");
    std::vector<prednbv::Point3> pts(count);
    for (size_t i = 0; i < count; ++i) pts[i] = {xyz[3 * i], xyz[3 * i + 1], xyz[3 * i + 2]};
    *out = new prednbv_cloud{prednbv::PointCloud(std::move(pts))};
  });
}

prednbv_status prednbv_cloud_load(const char* path, prednbv_cloud** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new prednbv_cloud{prednbv::load_cloud(path)};
  });
}

prednbv_status prednbv_cloud_save(const prednbv_cloud* cloud, const char* path) {
  return guarded([&] {
    require(cloud, "cloud");
    require(path, "path");
    prednbv::save_cloud(path, cloud->cloud);
  });
}

size_t prednbv_cloud_size(const prednbv_cloud* cloud) {
  return cloud == nullptr ? 0 : cloud->cloud.size();
}

prednbv_status prednbv_cloud_copy(const prednbv_cloud* cloud, double* xyz, size_t capacity) {
  return guarded([&] {
    require(cloud, "cloud");
    const size_t n = std::min(capacity, cloud->cloud.size());
    if (n > 0) require(xyz, "xyz");
    for (size_t i = 0; i < n; ++i) {
      const auto& p = cloud->cloud[i];
      xyz[3 * i] = p.x();
      xyz[3 * i + 1] = p.y();
      xyz[3 * i + 2] = p.z();
    }
  });
}

void prednbv_cloud_free(prednbv_cloud* cloud) { delete cloud; }

prednbv_status prednbv_metrics_json(const prednbv_cloud* pred, const prednbv_cloud* gt,
                                    double threshold, char** out_json) {
  return guarded([&] {
    require(pred, "pred");
    require(gt, "gt");
    require(out_json, "out_json");
    nlohmann::json j = prednbv::evaluate(pred->cloud, gt->cloud, threshold);
    const std::string s = j.dump();
    char* buf = new char[s.size() + 1];
    std::memcpy(buf, s.c_str(), s.size() + 1);
    *out_json = buf;
  });
}

void prednbv_string_free(char* s) { delete[] s; }

prednbv_status prednbv_generate_scenes(const char* dir, uint64_t seed) {
  return guarded([&] {
    require(dir, "dir");
    prednbv::write_suite(dir, seed);
  });
}

prednbv_status prednbv_experiment_load(const char* path, prednbv_experiment** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new prednbv_experiment{prednbv::load_experiment(path), {}};
  });
}

size_t prednbv_experiment_episode_count(const prednbv_experiment* exp) {
  if (exp == nullptr) return 0;
  const auto& c = exp->config;
  return c.scenes.size() * c.methods.size() * c.seeds.size();
}

prednbv_status prednbv_experiment_run(prednbv_experiment* exp, int jobs, size_t* failures) {
  return guarded([&] {
    require(exp, "experiment");
    if (jobs < 1) prednbv::fail(prednbv::ErrorCode::kParameter, "jobs must be at least 1");
    const prednbv::RunResult r = prednbv::run_experiment(exp->config, jobs);
    exp->summary = prednbv::summary_csv(r.rows);
    if (failures != nullptr) *failures = r.failures.size();
  });
}

const char* prednbv_experiment_summary(const prednbv_experiment* exp) {
  return exp == nullptr ? "" : exp->summary.c_str();
}

void prednbv_experiment_free(prednbv_experiment* exp) { delete exp; }

}  // extern "C"
