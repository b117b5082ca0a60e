// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0

#include "prednbv/bench.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "prednbv/cloud_io.hpp"
#include "prednbv/error.hpp"
#include "prednbv/scene.hpp"

namespace prednbv {

std::string MethodSpec::label() const {
  return type == Type::kBaseline ? "baseline" : "prednbv-" + predictor.label();
}

void ExperimentConfig::validate() const {
  if (scenes.empty()) fail(ErrorCode::kParameter, "experiment lists no scenes");
  if (methods.empty()) fail(ErrorCode::kParameter, "experiment lists no methods");
  if (seeds.empty()) fail(ErrorCode::kParameter, "experiment lists no seeds");
  if (output_dir.empty()) fail(ErrorCode::kParameter, "experiment has no output_dir");
  std::set<std::string> labels;
  for (const auto& m : methods) {
    if (!labels.insert(m.label()).second) {
      fail(ErrorCode::kParameter, fmt::format("method '{}' listed twice", m.label()));
    }
  }
  planner.validate();
}

ExperimentConfig experiment_from_json(const nlohmann::json& j,
                                      const std::filesystem::path& base_dir) {
  if (!j.is_object()) fail(ErrorCode::kParameter, "experiment config must be a JSON object");
  ExperimentConfig cfg;
  try {
    for (const auto& s : j.value("scenes", nlohmann::json::array())) {
      const std::filesystem::path p = s.get<std::string>();
      cfg.scenes.push_back(p.is_absolute() ? p : base_dir / p);
    }
    for (const auto& m : j.value("methods", nlohmann::json::array())) {
      MethodSpec spec;
      const auto type = m.at("type").get<std::string>();
      if (type == "baseline") {
        spec.type = MethodSpec::Type::kBaseline;
      } else if (type == "prednbv") {
        spec.predictor = predictor_kind_from_json(m.at("predictor"));
      } else {
        fail(ErrorCode::kParameter, fmt::format("unknown method type '{}'", type));
      }
      cfg.methods.push_back(std::move(spec));
    }
    for (const auto& s : j.value("seeds", nlohmann::json::array())) {
      cfg.seeds.push_back(s.get<std::uint64_t>());
    }
    if (j.contains("planner")) cfg.planner = planner_config_from_json(j["planner"]);
    const std::filesystem::path out = j.value("output_dir", std::string("results"));
    cfg.output_dir = out.is_absolute() ? out : base_dir / out;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParameter, fmt::format("experiment config: {}", e.what()));
  } catch (const Error& e) {
    fail(ErrorCode::kParameter, e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, fmt::format("cannot read '{}'", path.string()));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParameter, fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
  }
  return experiment_from_json(j, path.parent_path());
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json scenes = nlohmann::json::array();
  for (const auto& s : cfg.scenes) scenes.push_back(s.string());
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& m : cfg.methods) {
    if (m.type == MethodSpec::Type::kBaseline) {
      methods.push_back({{"type", "baseline"}});
    } else {
      methods.push_back({{"type", "prednbv"}, {"predictor", to_json(m.predictor)}});
    }
  }
  return {{"scenes", scenes},
          {"methods", methods},
          {"planner", to_json(cfg.planner)},
          {"seeds", cfg.seeds},
          {"output_dir", cfg.output_dir.string()}};
}

void compute_improvements(std::vector<SummaryRow>& rows) {
  std::map<std::pair<std::string, std::uint64_t>, std::size_t> baseline;
  for (const auto& r : rows) {
    if (r.method == "baseline") baseline[{r.scene, r.seed}] = r.points_seen;
  }
  for (auto& r : rows) {
    r.improvement.reset();
    if (r.method == "baseline") continue;
    const auto it = baseline.find({r.scene, r.seed});
    if (it == baseline.end() || it->second == 0) continue;
    r.improvement = (static_cast<double>(r.points_seen) - static_cast<double>(it->second)) /
                    static_cast<double>(it->second);
  }
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "scene,method,seed,points_seen,coverage,distance,steps,improvement\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{:.6f},{:.6f},{},{}\n", r.scene, r.method, r.seed,
                       r.points_seen, r.coverage, r.distance, r.steps,
                       r.improvement ? fmt::format("{:.6f}", *r.improvement) : std::string());
  }
  return out;
}

std::string report_file_name(const std::string& scene, const std::string& method,
                             std::uint64_t seed) {
  return fmt::format("{}__{}__seed{}.json", scene, method, seed);
}

namespace {

struct Job {
  std::size_t scene;
  std::size_t method;
  std::size_t seed;
};

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, int jobs) {
  cfg.validate();
  const auto report_dir = cfg.output_dir / "reports";
  std::error_code ec;
  std::filesystem::create_directories(report_dir, ec);
  if (ec) {
    fail(ErrorCode::kIo, fmt::format("cannot create '{}': {}", report_dir.string(), ec.message()));
  }

  RunResult result;
  std::vector<std::optional<SceneModel>> scenes(cfg.scenes.size());
  for (std::size_t i = 0; i < cfg.scenes.size(); ++i) {
    try {
      scenes[i] = load_scene(cfg.scenes[i]);
      scenes[i]->validate();
    } catch (const Error& e) {
      spdlog::error("scene {}: {}", cfg.scenes[i].string(), e.what());
      result.failures.push_back({cfg.scenes[i].string(), "", 0, e.what()});
      scenes[i].reset();
    }
  }

  std::vector<Job> work;
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    if (!scenes[s]) continue;
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
      for (std::size_t k = 0; k < cfg.seeds.size(); ++k) work.push_back({s, m, k});
    }
  }

  std::vector<std::optional<SummaryRow>> rows(work.size());
  std::vector<std::optional<RunFailure>> errors(work.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      const Job& job = work[i];
      const SceneModel& scene = *scenes[job.scene];
      const MethodSpec& method = cfg.methods[job.method];
      const std::uint64_t seed = cfg.seeds[job.seed];
      try {
        const Pose start = start_pose(scene, cfg.planner, seed);
        const EpisodeReport report =
            method.type == MethodSpec::Type::kBaseline
                ? run_baseline_episode(scene, start, cfg.planner, seed)
                : run_episode(scene, start, method.predictor, cfg.planner, seed);
        write_file_atomic(report_dir / report_file_name(scene.name, report.method, seed),
                          to_json(report).dump(1) + "\n");
        rows[i] = SummaryRow{scene.name, report.method, seed, report.final_observed.size(),
                             report.coverage, report.total_distance, report.steps, {}};
        spdlog::info("{} {} seed {}: {} points, coverage {:.3f}, {} steps, {}", scene.name,
                     report.method, seed, report.final_observed.size(), report.coverage,
                     report.steps, to_string(report.termination));
      } catch (const std::exception& e) {
        spdlog::error("{} {} seed {}: {}", scene.name, method.label(), seed, e.what());
        errors[i] = RunFailure{cfg.scenes[job.scene].string(), method.label(), seed, e.what()};
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(work.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < work.size(); ++i) {
    if (rows[i]) result.rows.push_back(std::move(*rows[i]));
    if (errors[i]) result.failures.push_back(std::move(*errors[i]));
  }
  compute_improvements(result.rows);
  write_file_atomic(cfg.output_dir / "summary.csv", summary_csv(result.rows));
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : result.failures) {
    failures.push_back({{"scene", f.scene}, {"method", f.method}, {"seed", f.seed},
                        {"error", f.message}});
  }
  write_file_atomic(cfg.output_dir / "failures.json", failures.dump(2) + "\n");
  return result;
}

}  // namespace prednbv
