// Command-line front end: simulate, learn, influence, path, compare.
#include "asl/csv.hpp"
#include "asl/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("config", c.config_path, "experiment config (JSON)")->required();
  sub->add_option("--seed", c.seed, "override the config seed");
  sub->add_option("--out-dir", c.out_dir, "output directory")->capture_default_str();
}

asl::ExperimentConfig resolve(const Common& c) {
  asl::ExperimentConfig config = asl::load_config(c.config_path);
  if (c.seed) config.seed = *c.seed;
  asl::validate(config);
  return config;
}

struct GraphChoice {
  std::optional<int> target;
  std::optional<int> source;
  std::optional<int> d;
  std::string graph_path;
};

// The analysed matrix: a saved graph if given (learned estimates are projected
// onto combination matrices first), otherwise the true graph of the config.
asl::Matrix analysed_matrix(const asl::ExperimentConfig& config, const GraphChoice& g) {
  if (g.graph_path.empty()) return asl::build_graph(config).weights();
  const asl::GraphRecord rec = asl::load_graph(g.graph_path);
  if (rec.learned) return asl::to_combination_matrix(rec.weights, config.tau_edge).weights();
  return rec.weights;
}

void apply(asl::ExperimentConfig& config, const GraphChoice& g) {
  if (g.target) config.target = *g.target;
  if (g.source) config.source = *g.source;
  if (g.d) config.d = *g.d;
  asl::validate(config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive social learning: simulation, online graph learning and influence analysis"};
  app.require_subcommand(1);

  Common sim_opts, learn_opts, infl_opts, path_opts, cmp_opts;
  GraphChoice infl_graph, path_graph;

  auto* sim = app.add_subcommand("simulate", "run the social-learning engine only");
  add_common(sim, sim_opts);

  auto* learn = app.add_subcommand("learn", "full online graph-learning run");
  add_common(learn, learn_opts);

  auto* infl = app.add_subcommand("influence", "influence map for a target agent");
  add_common(infl, infl_opts);
  infl->add_option("--target", infl_graph.target, "target agent");
  infl->add_option("--d", infl_graph.d, "maximum walk length");
  infl->add_option("--graph", infl_graph.graph_path, "graph file (default: true graph of the config)");

  auto* path = app.add_subcommand("path", "most influential path from source to target");
  add_common(path, path_opts);
  path->add_option("--source", path_graph.source, "source agent");
  path->add_option("--target", path_graph.target, "target agent");
  path->add_option("--d", path_graph.d, "maximum hop count");
  path->add_option("--graph", path_graph.graph_path, "graph file (default: true graph of the config)");

  auto* cmp = app.add_subcommand("compare", "known-state vs majority-vote learner");
  add_common(cmp, cmp_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*sim) {
      const auto config = resolve(sim_opts);
      const auto art = asl::simulate(config, sim_opts.out_dir);
      std::cout << "beliefs: " << art.belief_trace->string() << "\n";
    } else if (*learn) {
      const auto config = resolve(learn_opts);
      const auto art = asl::run_scenario(config, learn_opts.out_dir);
      const auto rows = asl::read_csv(art.msd_trace);
      std::cout << "msd trace: " << art.msd_trace.string() << "\n";
      if (rows.size() > 1) std::cout << "final msd: " << rows.back().at(1) << "\n";
      std::cout << "learned graph: " << art.learned_graph.string() << "\n";
    } else if (*infl) {
      auto config = resolve(infl_opts);
      apply(config, infl_graph);
      const asl::Matrix a = analysed_matrix(config, infl_graph);
      const auto map = asl::influence_map(a, config.target, config.d, config.delta, config.theta_count);
      std::filesystem::create_directories(infl_opts.out_dir);
      const std::filesystem::path dir = infl_opts.out_dir;
      asl::write_influence_map_csv(dir / "influence_map.csv", map);
      asl::write_influence_report(dir / "influence.json", map, config.delta,
                                  asl::top_paths(a, config.target, config.d, config.delta,
                                                 config.theta_count, config.top_m));
      std::cout << "influence map: " << (dir / "influence_map.csv").string() << "\n";
    } else if (*path) {
      auto config = resolve(path_opts);
      apply(config, path_graph);
      const asl::Matrix a = analysed_matrix(config, path_graph);
      const auto p = asl::most_influential_path(a, config.source, config.target, config.d,
                                                config.delta, config.theta_count);
      std::filesystem::create_directories(path_opts.out_dir);
      const std::filesystem::path file = std::filesystem::path(path_opts.out_dir) / "path.csv";
      asl::write_path_csv(file, p);
      std::cout << "path:";
      for (int v : p.nodes) std::cout << ' ' << v;
      std::cout << "\nscore: " << asl::format_real(p.score) << "\n";
    } else if (*cmp) {
      const auto config = resolve(cmp_opts);
      const auto cmp_result = asl::compare_modes(config, cmp_opts.out_dir);
      std::cout << "comparison: " << cmp_result.file.string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
