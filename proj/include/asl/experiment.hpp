#pragma once

#include "asl/graph_learning.hpp"
#include "asl/influence.hpp"
#include "asl/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace asl {

/// Everything needed to reproduce a run. Defaults are the reference setup:
/// 30 agents, 10 hypotheses, binary observations, p = 0.2, delta = mu = 0.1.
struct ExperimentConfig {
  std::size_t n = 30;
  int theta_count = 10;
  int z_count = 2;
  double edge_prob = 0.2;
  double delta = 0.1;
  double mu = 0.1;
  std::size_t steps = 14000;
  std::uint64_t seed = 1;
  LearnerMode mode = LearnerMode::KnownState;
  Hypothesis true_theta = 0;
  double epsilon = 0.4;
  int d = 2;
  double tau_edge = 0.05;
  int target = 0;
  int source = 1;
  std::size_t top_m = 5;
  bool belief_trace = false;
  bool belief_trace_mu = false;
  std::vector<ScheduleEvent> schedule;
};

/// Throws ConfigError naming the offending field.
void validate(const ExperimentConfig& config);

ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Full JSON echo including every default; parse_config(to_json_text(c)) == c.
std::string to_json_text(const ExperimentConfig& config);

/// Seeds of the hidden graph and the likelihood model, derived from config.seed.
std::uint64_t graph_seed(const ExperimentConfig& config);
std::uint64_t model_seed(const ExperimentConfig& config);

CombinationMatrix build_graph(const ExperimentConfig& config);
LikelihoodModel build_model(const ExperimentConfig& config);
OnlineConfig online_config(const ExperimentConfig& config);

struct RunArtifacts {
  ExperimentConfig config;
  std::filesystem::path out_dir;
  std::filesystem::path config_echo;
  std::filesystem::path true_graph;     ///< truth at the end of the run
  std::filesystem::path learned_graph;
  std::filesystem::path model;
  std::filesystem::path msd_trace;
  std::optional<std::filesystem::path> belief_trace;
  std::filesystem::path influence_report;
};

/// Builds graph and model, runs the learner with the schedule and writes every artifact.
RunArtifacts run_scenario(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Engine only: writes the graph, the model and the belief trace.
RunArtifacts simulate(const ExperimentConfig& config, const std::filesystem::path& out_dir);

struct ModeComparison {
  MsdTrace known;
  MsdTrace vote;
  std::filesystem::path file;
};

/// Runs both learner modes on the same graph, model and observation stream.
ModeComparison compare_modes(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Writes plot-ready data: "msd", "map" or "path". Throws std::invalid_argument otherwise.
std::filesystem::path emit_plot_data(const RunArtifacts& artifacts, std::string_view which);

// File formats.
void write_msd_csv(const std::filesystem::path& path, const MsdTrace& trace, LearnerMode mode);
void write_influence_map_csv(const std::filesystem::path& path, const InfluenceMap& map);
void write_path_csv(const std::filesystem::path& path, const InfluencePath& p);
InfluencePath read_path_csv(const std::filesystem::path& path);
void write_influence_report(const std::filesystem::path& path, const InfluenceMap& map,
                            double delta, const std::vector<InfluencePath>& paths);

}  // namespace asl
