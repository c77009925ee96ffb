#include "asl/experiment.hpp"

#include "asl/csv.hpp"
#include "asl/random.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace asl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kGraphStream = 10;
constexpr std::uint64_t kModelStream = 11;

void require(bool ok, const std::string& field, const std::string& why) {
  if (!ok) throw ConfigError("config field '" + field + "': " + why);
}

template <typename T>
T field(const json& doc, const char* name, T fallback) {
  if (!doc.contains(name)) return fallback;
  try {
    return doc.at(name).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config field '") + name + "': wrong type");
  }
}

ScheduleEvent parse_event(const json& node, std::size_t index) {
  const std::string where = "schedule[" + std::to_string(index) + "]";
  require(node.is_object(), where, "expected an object");
  static const std::set<std::string> known{"step", "kind", "theta", "flip_prob", "period"};
  for (const auto& [key, value] : node.items()) {
    require(known.count(key) > 0, where + "." + key, "unknown key");
  }
  require(node.contains("step") && node.contains("kind"), where, "needs 'step' and 'kind'");
  ScheduleEvent ev;
  try {
    ev.step = node.at("step").get<std::size_t>();
    ev.kind = parse_event_kind(node.at("kind").get<std::string>());
    ev.new_theta = node.value("theta", 0);
    ev.flip_prob = node.value("flip_prob", 0.005);
    ev.period = node.value("period", std::size_t{500});
  } catch (const json::exception& e) {
    throw ConfigError("config field '" + where + "': " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config field '" + where + ".kind': " + e.what());
  }
  return ev;
}

json event_to_json(const ScheduleEvent& ev) {
  json node{{"step", ev.step}, {"kind", to_string(ev.kind)}};
  switch (ev.kind) {
    case EventKind::StateChange: node["theta"] = ev.new_theta; break;
    case EventKind::Churn:
      node["flip_prob"] = ev.flip_prob;
      node["period"] = ev.period;
      break;
    case EventKind::RegenerateEdges: break;
  }
  return node;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

Matrix learned_weights(const fs::path& learned_graph) {
  return load_graph(learned_graph).weights;
}

class BeliefTraceWriter {
 public:
  BeliefTraceWriter(const fs::path& path, std::size_t n, int theta_count, bool with_mu)
      : writer_(path, header(n, theta_count, with_mu)), with_mu_(with_mu) {}

  void operator()(const StepRecord& r) {
    writer_ << r.step << r.vote;
    const Matrix& psi = r.beliefs.psi;
    for (Eigen::Index k = 0; k < psi.rows(); ++k) {
      for (Eigen::Index t = 0; t < psi.cols(); ++t) writer_ << psi(k, t);
    }
    if (with_mu_) {
      const Matrix& mu = r.beliefs.mu;
      for (Eigen::Index k = 0; k < mu.rows(); ++k) {
        for (Eigen::Index t = 0; t < mu.cols(); ++t) writer_ << mu(k, t);
      }
    }
    writer_.end_row();
  }

 private:
  static std::vector<std::string> header(std::size_t n, int theta_count, bool with_mu) {
    std::vector<std::string> h{"step", "theta_hat"};
    for (const char* prefix : {"psi", "mu"}) {
      if (std::string(prefix) == "mu" && !with_mu) break;
      for (std::size_t k = 0; k < n; ++k) {
        for (int t = 0; t < theta_count; ++t) {
          h.push_back(std::string(prefix) + "_" + std::to_string(k) + "_" + std::to_string(t));
        }
      }
    }
    return h;
  }

  CsvWriter writer_;
  bool with_mu_;
};

}  // namespace

void validate(const ExperimentConfig& c) {
  require(c.n >= 2, "n", "must be >= 2");
  require(c.theta_count >= 2, "theta_count", "must be >= 2");
  require(c.z_count >= 2, "z_count", "must be >= 2");
  require(c.edge_prob > 0.0 && c.edge_prob < 1.0, "edge_prob", "must be in (0, 1)");
  require(c.delta > 0.0 && c.delta < 1.0, "delta", "must be in (0, 1)");
  require(c.mu >= 0.0, "mu", "must be >= 0");
  require(c.true_theta >= 0 && c.true_theta < c.theta_count, "true_theta", "out of range");
  require(c.epsilon > 0.0 && c.epsilon < 1.0 / c.z_count, "epsilon", "must be in (0, 1/z_count)");
  require(c.d >= 0, "d", "must be >= 0");
  require(c.tau_edge >= 0.0, "tau_edge", "must be >= 0");
  require(c.target >= 0 && static_cast<std::size_t>(c.target) < c.n, "target", "out of range");
  require(c.source >= 0 && static_cast<std::size_t>(c.source) < c.n, "source", "out of range");
  for (std::size_t e = 0; e < c.schedule.size(); ++e) {
    const auto& ev = c.schedule[e];
    const std::string where = "schedule[" + std::to_string(e) + "]";
    require(ev.step >= 1, where + ".step", "must be >= 1");
    require(e == 0 || ev.step > c.schedule[e - 1].step, where + ".step", "steps must be strictly increasing");
    if (ev.kind == EventKind::StateChange) {
      require(ev.new_theta >= 0 && ev.new_theta < c.theta_count, where + ".theta", "out of range");
    }
    if (ev.kind == EventKind::Churn) {
      require(ev.flip_prob >= 0.0 && ev.flip_prob < 1.0, where + ".flip_prob", "must be in [0, 1)");
      require(ev.period >= 1, where + ".period", "must be >= 1");
    }
  }
}

ExperimentConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{
      "n", "theta_count", "z_count", "edge_prob", "delta", "mu", "steps", "seed", "mode",
      "true_theta", "epsilon", "d", "tau_edge", "target", "source", "top_m", "belief_trace",
      "belief_trace_mu", "schedule", "derived"};
  for (const auto& [key, value] : doc.items()) {
    require(known.count(key) > 0, key, "unknown key");
  }

  ExperimentConfig c;
  c.n = field(doc, "n", c.n);
  c.theta_count = field(doc, "theta_count", c.theta_count);
  c.z_count = field(doc, "z_count", c.z_count);
  c.edge_prob = field(doc, "edge_prob", c.edge_prob);
  c.delta = field(doc, "delta", c.delta);
  c.mu = field(doc, "mu", c.mu);
  c.steps = field(doc, "steps", c.steps);
  c.seed = field(doc, "seed", c.seed);
  try {
    c.mode = parse_learner_mode(field(doc, "mode", to_string(c.mode)));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config field 'mode': ") + e.what());
  }
  c.true_theta = field(doc, "true_theta", c.true_theta);
  c.epsilon = field(doc, "epsilon", c.epsilon);
  c.d = field(doc, "d", c.d);
  c.tau_edge = field(doc, "tau_edge", c.tau_edge);
  c.target = field(doc, "target", c.target);
  c.source = field(doc, "source", c.source);
  c.top_m = field(doc, "top_m", c.top_m);
  c.belief_trace = field(doc, "belief_trace", c.belief_trace);
  c.belief_trace_mu = field(doc, "belief_trace_mu", c.belief_trace_mu);
  if (doc.contains("schedule")) {
    require(doc["schedule"].is_array(), "schedule", "expected a list");
    std::size_t index = 0;
    for (const auto& node : doc["schedule"]) c.schedule.push_back(parse_event(node, index++));
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json_text(const ExperimentConfig& c) {
  json schedule = json::array();
  for (const auto& ev : c.schedule) schedule.push_back(event_to_json(ev));
  json doc{{"n", c.n},
           {"theta_count", c.theta_count},
           {"z_count", c.z_count},
           {"edge_prob", c.edge_prob},
           {"delta", c.delta},
           {"mu", c.mu},
           {"steps", c.steps},
           {"seed", c.seed},
           {"mode", to_string(c.mode)},
           {"true_theta", c.true_theta},
           {"epsilon", c.epsilon},
           {"d", c.d},
           {"tau_edge", c.tau_edge},
           {"target", c.target},
           {"source", c.source},
           {"top_m", c.top_m},
           {"belief_trace", c.belief_trace},
           {"belief_trace_mu", c.belief_trace_mu},
           {"schedule", schedule},
           {"derived", {{"graph_seed", graph_seed(c)}, {"model_seed", model_seed(c)}}}};
  return doc.dump(2) + "\n";
}

std::uint64_t graph_seed(const ExperimentConfig& config) {
  return derive_seed(config.seed, kGraphStream);
}

std::uint64_t model_seed(const ExperimentConfig& config) {
  return derive_seed(config.seed, kModelStream);
}

CombinationMatrix build_graph(const ExperimentConfig& config) {
  return generate_erdos_renyi(config.n, config.edge_prob, graph_seed(config));
}

LikelihoodModel build_model(const ExperimentConfig& config) {
  return generate_model(config.n, config.theta_count, config.z_count, config.epsilon,
                        model_seed(config), config.true_theta);
}

OnlineConfig online_config(const ExperimentConfig& config) {
  OnlineConfig oc;
  oc.steps = config.steps;
  oc.delta = config.delta;
  oc.mu = config.mu;
  oc.mode = config.mode;
  oc.true_theta = config.true_theta;
  oc.seed = config.seed;
  oc.edge_prob = config.edge_prob;
  oc.schedule = config.schedule;
  return oc;
}

RunArtifacts simulate(const ExperimentConfig& config, const fs::path& out_dir) {
  validate(config);
  fs::create_directories(out_dir);
  RunArtifacts art;
  art.config = config;
  art.out_dir = out_dir;
  art.config_echo = out_dir / "config.json";
  art.true_graph = out_dir / "graph_true.json";
  art.model = out_dir / "model.json";
  art.belief_trace = out_dir / "beliefs.csv";

  const CombinationMatrix a = build_graph(config);
  const LikelihoodModel model = build_model(config);
  write_text(art.config_echo, to_json_text(config));
  save_model(art.model, model, config.true_theta);

  OnlineConfig oc = online_config(config);
  oc.mu = 0.0;
  BeliefTraceWriter beliefs(*art.belief_trace, config.n, config.theta_count, config.belief_trace_mu);
  const OnlineResult result = run_online(a, model, oc, std::ref(beliefs));
  save_graph(art.true_graph, to_record(result.final_truth, graph_seed(config)));
  return art;
}

RunArtifacts run_scenario(const ExperimentConfig& config, const fs::path& out_dir) {
  validate(config);
  fs::create_directories(out_dir);
  RunArtifacts art;
  art.config = config;
  art.out_dir = out_dir;
  art.config_echo = out_dir / "config.json";
  art.true_graph = out_dir / "graph_true.json";
  art.learned_graph = out_dir / "graph_learned.json";
  art.model = out_dir / "model.json";
  art.msd_trace = out_dir / "msd.csv";
  art.influence_report = out_dir / "influence.json";

  const CombinationMatrix a = build_graph(config);
  const LikelihoodModel model = build_model(config);
  write_text(art.config_echo, to_json_text(config));
  save_model(art.model, model, config.true_theta);

  std::optional<BeliefTraceWriter> beliefs;
  StepObserver observer;
  if (config.belief_trace) {
    art.belief_trace = out_dir / "beliefs.csv";
    beliefs.emplace(*art.belief_trace, config.n, config.theta_count, config.belief_trace_mu);
    observer = std::ref(*beliefs);
  }
  const OnlineResult result = run_online(a, model, online_config(config), observer);

  save_graph(art.true_graph, to_record(result.final_truth, graph_seed(config)));
  save_graph(art.learned_graph, learned_record(result.learner.estimate));
  write_msd_csv(art.msd_trace, result.trace, config.mode);

  const Matrix learned = to_combination_matrix(result.learner.estimate, config.tau_edge).weights();
  const InfluenceMap map = influence_map(learned, config.target, config.d, config.delta, config.theta_count);
  write_influence_report(art.influence_report, map, config.delta,
                         top_paths(learned, config.target, config.d, config.delta,
                                   config.theta_count, config.top_m));
  return art;
}

ModeComparison compare_modes(const ExperimentConfig& config, const fs::path& out_dir) {
  validate(config);
  fs::create_directories(out_dir);
  const CombinationMatrix a = build_graph(config);
  const LikelihoodModel model = build_model(config);
  OnlineConfig oc = online_config(config);

  ModeComparison out;
  oc.mode = LearnerMode::KnownState;
  out.known = run_online(a, model, oc).trace;
  oc.mode = LearnerMode::MajorityVote;
  out.vote = run_online(a, model, oc).trace;

  write_text(out_dir / "config.json", to_json_text(config));
  out.file = out_dir / "msd_compare.csv";
  CsvWriter w(out.file, {"step", "msd_known", "msd_vote", "theta_hat", "event"});
  for (std::size_t i = 0; i < out.known.size(); ++i) {
    w << (i + 1) << out.known.msd[i] << out.vote.msd[i] << out.vote.vote[i] << out.known.events[i];
    w.end_row();
  }
  return out;
}

fs::path emit_plot_data(const RunArtifacts& art, std::string_view which) {
  const ExperimentConfig& c = art.config;
  if (which == "msd") {
    const fs::path out = art.out_dir / "plot_msd.csv";
    const auto rows = read_csv(art.msd_trace);
    CsvWriter w(out, {"step", "msd"});
    for (std::size_t r = 1; r < rows.size(); ++r) {
      w << rows[r].at(0) << rows[r].at(1);
      w.end_row();
    }
    return out;
  }
  if (which == "map") {
    const fs::path out = art.out_dir / "plot_map.csv";
    const Matrix learned = to_combination_matrix(learned_weights(art.learned_graph), c.tau_edge).weights();
    write_influence_map_csv(out, influence_map(learned, c.target, c.d, c.delta, c.theta_count));
    return out;
  }
  if (which == "path") {
    const fs::path out = art.out_dir / "plot_path.csv";
    const Matrix learned = to_combination_matrix(learned_weights(art.learned_graph), c.tau_edge).weights();
    write_path_csv(out, most_influential_path(learned, c.source, c.target, c.d, c.delta, c.theta_count));
    return out;
  }
  throw std::invalid_argument("unknown plot selector '" + std::string(which) +
                              "' (expected msd|map|path)");
}

void write_msd_csv(const fs::path& path, const MsdTrace& trace, LearnerMode mode) {
  CsvWriter w(path, {"step", "msd", "mode", "theta_hat", "true_theta", "event"});
  const std::string mode_text = to_string(mode);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    w << (i + 1) << trace.msd[i] << mode_text << trace.vote[i] << trace.true_theta[i]
      << trace.events[i];
    w.end_row();
  }
}

void write_influence_map_csv(const fs::path& path, const InfluenceMap& map) {
  CsvWriter w(path, {"source", "target", "d", "raw", "normalized"});
  for (const auto& e : map.entries) {
    w << e.source << map.target << map.horizon << e.raw << e.normalized;
    w.end_row();
  }
}

void write_path_csv(const fs::path& path, const InfluencePath& p) {
  CsvWriter w(path, {"nodes", "hops", "score"});
  std::string nodes;
  for (std::size_t s = 0; s < p.nodes.size(); ++s) {
    if (s) nodes += ' ';
    nodes += std::to_string(p.nodes[s]);
  }
  w << nodes << p.length() << p.score;
  w.end_row();
}

InfluencePath read_path_csv(const fs::path& path) {
  const auto rows = read_csv(path);
  if (rows.size() < 2 || rows[1].size() < 3) throw IoError(path.string() + ": malformed path file");
  InfluencePath p;
  std::stringstream ss(rows[1][0]);
  int v;
  while (ss >> v) p.nodes.push_back(v);
  p.score = std::stod(rows[1][2]);
  return p;
}

void write_influence_report(const fs::path& path, const InfluenceMap& map, double delta,
                            const std::vector<InfluencePath>& paths) {
  json entries = json::array();
  for (const auto& e : map.entries) {
    entries.push_back({{"source", e.source}, {"raw", e.raw}, {"normalized", e.normalized}});
  }
  json top = json::array();
  for (const auto& p : paths) top.push_back({{"nodes", p.nodes}, {"score", p.score}});
  json doc{{"target", map.target},  {"d", map.horizon},     {"delta", delta},
           {"normalized", map.normalized}, {"influence", entries}, {"top_paths", top}};
  write_text(path, doc.dump(1) + "\n");
}

}  // namespace asl
