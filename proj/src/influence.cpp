#include "asl/influence.hpp"

#include "asl/social_learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace asl {

namespace {

void check_weights(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) throw DimensionError("influence: matrix must be square");
  if (!a.allFinite() || a.minCoeff() < 0.0 || a.maxCoeff() > 1.0) {
    throw std::invalid_argument("influence: weights must lie in [0, 1]");
  }
}

void check_node(const Matrix& a, int v) {
  if (v < 0 || v >= a.rows()) throw std::out_of_range("influence: node index out of range");
}

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in (0, 1)");
}

// Relative tolerance under which two path costs count as tied.
constexpr double kTieTolerance = 1e-12;

bool nearly_equal(double x, double y) {
  return std::abs(x - y) <= kTieTolerance * std::max({1.0, std::abs(x), std::abs(y)});
}

struct Label {
  double cost = std::numeric_limits<double>::infinity();
  std::vector<int> nodes;
};

bool better(double cost, const std::vector<int>& nodes, const Label& current) {
  if (current.nodes.empty()) return true;
  if (nearly_equal(cost, current.cost)) return nodes < current.nodes;
  return cost < current.cost;
}

}  // namespace

double path_influence(const Matrix& a, const std::vector<int>& nodes, double delta,
                      int theta_count) {
  check_weights(a);
  check_delta(delta);
  if (nodes.empty()) throw InvalidPath("path has no nodes");
  for (int v : nodes) check_node(a, v);
  double product = 1.0;
  for (std::size_t s = 1; s < nodes.size(); ++s) {
    const double w = a(nodes[s - 1], nodes[s]);
    if (!(w > 0.0)) {
      throw InvalidPath("no edge " + std::to_string(nodes[s - 1]) + " -> " +
                        std::to_string(nodes[s]));
    }
    product *= (1.0 - delta) * w;
  }
  return static_cast<double>(theta_count - 1) * delta * product;
}

double eta(const Matrix& a, int source, int target, int d, double delta, int theta_count) {
  check_weights(a);
  check_delta(delta);
  check_node(a, source);
  check_node(a, target);
  if (d < 0) throw std::invalid_argument("eta: d must be nonnegative");
  // reach = e_source^T A^r, scaled by (1 - delta)^r
  Eigen::RowVectorXd reach = Eigen::RowVectorXd::Zero(a.cols());
  reach(source) = 1.0;
  double total = reach(target);
  for (int r = 1; r <= d; ++r) {
    reach = (1.0 - delta) * (reach * a);
    total += reach(target);
  }
  return static_cast<double>(theta_count - 1) * delta * total;
}

InfluenceMap influence_map(const Matrix& a, int target, int d, double delta, int theta_count) {
  check_weights(a);
  check_node(a, target);
  InfluenceMap map;
  map.target = target;
  map.horizon = d;
  double peak = 0.0;
  for (int source = 0; source < a.rows(); ++source) {
    if (source == target) continue;
    const double raw = eta(a, source, target, d, delta, theta_count);
    map.entries.push_back({source, raw, 0.0});
    peak = std::max(peak, raw);
  }
  map.normalized = peak > 0.0;
  if (map.normalized) {
    for (auto& e : map.entries) e.normalized = e.raw / peak;
  }
  return map;
}

InfluencePath most_influential_path(const Matrix& a, int source, int target, int d,
                                    double delta, int theta_count) {
  check_weights(a);
  check_delta(delta);
  check_node(a, source);
  check_node(a, target);
  if (source == target) return {{source}, path_influence(a, {source}, delta, theta_count)};
  if (d < 1) throw NoPath("target unreachable within 0 hops");

  const int n = static_cast<int>(a.rows());
  const double hop_cost = -std::log1p(-delta);
  // labels[h][v]: best walk from source to v using exactly h hops
  std::vector<std::vector<Label>> labels(static_cast<std::size_t>(d) + 1,
                                         std::vector<Label>(static_cast<std::size_t>(n)));
  labels[0][static_cast<std::size_t>(source)] = {0.0, {source}};

  using Entry = std::pair<double, std::pair<int, int>>;  // cost, (hops, node)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
  frontier.push({0.0, {0, source}});
  while (!frontier.empty()) {
    const auto [cost, state] = frontier.top();
    frontier.pop();
    const auto [hops, v] = state;
    const Label& from = labels[static_cast<std::size_t>(hops)][static_cast<std::size_t>(v)];
    // Stale entry: the label improved after this was queued.
    if (cost != from.cost) continue;
    if (hops == d || v == target) continue;
    for (int w = 0; w < n; ++w) {
      const double weight = a(v, w);
      if (!(weight > 0.0)) continue;
      const double next_cost = from.cost - std::log(weight) + hop_cost;
      Label& slot = labels[static_cast<std::size_t>(hops) + 1][static_cast<std::size_t>(w)];
      std::vector<int> nodes = from.nodes;
      nodes.push_back(w);
      if (better(next_cost, nodes, slot)) {
        slot = {next_cost, std::move(nodes)};
        frontier.push({next_cost, {hops + 1, w}});
      }
    }
  }

  const Label* best = nullptr;
  for (int h = 1; h <= d; ++h) {
    const Label& candidate = labels[static_cast<std::size_t>(h)][static_cast<std::size_t>(target)];
    if (candidate.nodes.empty()) continue;
    // Strict improvement required to prefer more hops.
    if (best == nullptr ||
        (!nearly_equal(candidate.cost, best->cost) && candidate.cost < best->cost)) {
      best = &candidate;
    }
  }
  if (best == nullptr) {
    throw NoPath("agent " + std::to_string(target) + " unreachable from " +
                 std::to_string(source) + " within " + std::to_string(d) + " hops");
  }
  return {best->nodes, path_influence(a, best->nodes, delta, theta_count)};
}

std::vector<InfluencePath> top_paths(const Matrix& a, int target, int d, double delta,
                                     int theta_count, std::size_t m) {
  InfluenceMap map = influence_map(a, target, d, delta, theta_count);
  std::stable_sort(map.entries.begin(), map.entries.end(),
                   [](const InfluenceEntry& x, const InfluenceEntry& y) { return x.raw > y.raw; });
  std::vector<InfluencePath> out;
  for (const auto& e : map.entries) {
    if (out.size() >= m) break;
    if (!(e.raw > 0.0)) break;
    try {
      out.push_back(most_influential_path(a, e.source, target, d, delta, theta_count));
    } catch (const NoPath&) {
    }
  }
  return out;
}

DerivativeCheck influence_derivative_check(const Matrix& a, const Matrix& lambda0,
                                           const std::vector<Matrix>& lr_sequence, std::size_t t,
                                           double delta, Eigen::Index column, double h) {
  const std::size_t i = lr_sequence.size();
  if (t < 1 || t > i) throw std::invalid_argument("derivative check needs 1 <= t <= i");
  if (a.rows() != a.cols() || a.rows() != lambda0.rows()) {
    throw DimensionError("derivative check: dimension mismatch");
  }
  if (column < 0 || column >= lambda0.cols()) throw std::out_of_range("column out of range");
  const Eigen::Index n = a.rows();

  auto unroll = [&](const std::vector<Matrix>& seq) {
    LogRatioMatrix lambda{lambda0, 0, LogRatioMatrix::Kind::BeliefRatio};
    for (const Matrix& l : seq) {
      lambda = recursion_reference(lambda, a, {l, 0, LogRatioMatrix::Kind::LikelihoodRatio}, delta);
    }
    return lambda.values;
  };

  DerivativeCheck out;
  const int lag = static_cast<int>(i - t);
  Matrix power = Matrix::Identity(n, n);
  for (int s = 0; s < lag; ++s) power = power * a;
  out.closed_form = delta * std::pow(1.0 - delta, lag) * power;

  out.numerical.resize(n, n);
  std::vector<Matrix> plus = lr_sequence;
  std::vector<Matrix> minus = lr_sequence;
  for (Eigen::Index l = 0; l < n; ++l) {
    plus[t - 1](l, column) += h;
    minus[t - 1](l, column) -= h;
    const Matrix diff = (unroll(plus) - unroll(minus)) / (2.0 * h);
    out.numerical.row(l) = diff.col(column).transpose();
    plus[t - 1](l, column) = lr_sequence[t - 1](l, column);
    minus[t - 1](l, column) = lr_sequence[t - 1](l, column);
  }
  return out;
}

}  // namespace asl
