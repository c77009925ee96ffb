#include "asl/graph.hpp"
#include "asl/influence.hpp"
#include "asl/random.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>

using namespace asl;

namespace {

struct Walk {
  std::vector<int> nodes;
  double score;
  double cost;
};

// Every walk from source to target with 1..d hops (0 hops when source == target).
std::vector<Walk> enumerate_walks(const Matrix& a, int source, int target, int d, double delta,
                                  int theta_count) {
  std::vector<Walk> out;
  std::vector<int> nodes{source};
  std::function<void(int)> grow = [&](int depth) {
    const int v = nodes.back();
    if (v == target) {
      double prod = 1.0, cost = 0.0;
      for (std::size_t s = 1; s < nodes.size(); ++s) {
        prod *= a(nodes[s - 1], nodes[s]);
        cost += -std::log(a(nodes[s - 1], nodes[s])) - std::log(1.0 - delta);
      }
      const double r = static_cast<double>(nodes.size() - 1);
      out.push_back({nodes, (theta_count - 1) * delta * std::pow(1 - delta, r) * prod, cost});
    }
    if (depth == d) return;
    for (int w = 0; w < a.rows(); ++w) {
      if (a(v, w) <= 0.0) continue;
      nodes.push_back(w);
      grow(depth + 1);
      nodes.pop_back();
    }
  };
  grow(0);
  return out;
}

Matrix random_connected(RandomStream& rng, int n, bool uniform_weights) {
  while (true) {
    Adjacency s(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) s(i, j) = i == j || rng.bernoulli(0.4);
    }
    if (!is_strongly_connected(s)) continue;
    if (uniform_weights) return CombinationMatrix::from_support(s).weights();
    Matrix w = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) w(i, j) = s(i, j) ? 0.05 + rng.uniform() : 0.0;
    }
    for (int k = 0; k < n; ++k) w.col(k) /= w.col(k).sum();
    return w;
  }
}

}  // namespace

TEST_CASE("path influence") {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 1) = 0.3;
  CHECK(path_influence(a, {0, 1}, 0.1, 2) == doctest::Approx(0.027).epsilon(1e-14));
  a(0, 1) = 0.5;
  a(1, 2) = 0.5;
  CHECK(path_influence(a, {0, 1, 2}, 0.1, 2) == doctest::Approx(0.02025).epsilon(1e-14));
  CHECK_THROWS_AS(path_influence(a, {0, 2}, 0.1, 2), InvalidPath);
  CHECK_THROWS_AS(path_influence(a, {}, 0.1, 2), InvalidPath);
}

TEST_CASE("eta") {
  Matrix a(2, 2);
  a << 0.7, 0.3, 0.3, 0.7;
  CHECK(eta(a, 0, 1, 0, 0.1, 2) == 0.0);
  CHECK(eta(a, 1, 1, 0, 0.1, 2) == doctest::Approx(0.1));
  Matrix single = Matrix::Identity(2, 2);
  single(0, 1) = 0.3;
  single(1, 1) = 0.7;
  CHECK(eta(single, 0, 1, 1, 0.1, 2) == doctest::Approx(0.027).epsilon(1e-14));
  CHECK(eta(single, 0, 1, 1, 0.1, 2) == doctest::Approx(path_influence(single, {0, 1}, 0.1, 2)).epsilon(1e-14));
  CHECK_THROWS(eta(a, 0, 1, -1, 0.1, 2));
}

TEST_CASE("eta and best path agree with walk enumeration") {
  RandomStream rng(12);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(5));
    const Matrix a = random_connected(rng, n, trial % 2 == 0);
    const int d = 1 + static_cast<int>(rng.below(4));
    const double delta = 0.05 + 0.9 * rng.uniform();
    const int theta_count = 2 + static_cast<int>(rng.below(8));
    for (int l = 0; l < n; ++l) {
      for (int k = 0; k < n; ++k) {
        const auto walks = enumerate_walks(a, l, k, d, delta, theta_count);
        double total = 0.0;
        for (const auto& w : walks) total += w.score;
        CHECK(std::abs(eta(a, l, k, d, delta, theta_count) - total) <= 1e-10);

        if (walks.empty()) {
          CHECK_THROWS_AS(most_influential_path(a, l, k, d, delta, theta_count), NoPath);
          continue;
        }
        double min_cost = walks.front().cost;
        for (const auto& w : walks) min_cost = std::min(min_cost, w.cost);
        const Walk* pick = nullptr;
        for (const auto& w : walks) {
          if (w.cost > min_cost + 1e-9) continue;
          if (pick == nullptr || w.nodes.size() < pick->nodes.size() ||
              (w.nodes.size() == pick->nodes.size() && w.nodes < pick->nodes)) {
            pick = &w;
          }
        }
        const auto p = most_influential_path(a, l, k, d, delta, theta_count);
        CHECK(p.nodes == pick->nodes);
        CHECK(std::abs(p.score - pick->score) <= 1e-10);
        for (const auto& w : walks) CHECK(w.score <= p.score * (1 + 1e-12));
      }
    }
  }
}

TEST_CASE("most influential path examples") {
  Matrix chain = Matrix::Identity(3, 3) * 0.5;
  chain(0, 0) = 1.0;
  chain(0, 1) = 0.5;
  chain(1, 2) = 0.5;
  const auto p = most_influential_path(chain, 0, 2, 3, 0.1, 2);
  CHECK(p.nodes == std::vector<int>{0, 1, 2});
  CHECK(p.length() == 2);
  CHECK_THROWS_AS(most_influential_path(chain, 0, 2, 1, 0.1, 2), NoPath);
  CHECK_THROWS_AS(most_influential_path(chain, 2, 0, 4, 0.1, 2), NoPath);

  // Triangle: direct 0.1 against the two-hop route 0.6 * 0.6.
  Matrix tri = Matrix::Zero(3, 3);
  tri(0, 2) = 0.1;
  tri(0, 1) = 0.6;
  tri(1, 2) = 0.6;
  tri(1, 1) = 0.4;
  tri(2, 2) = 0.3;
  tri(0, 0) = 1.0;
  const auto t = most_influential_path(tri, 0, 2, 2, 0.1, 2);
  CHECK(t.nodes == std::vector<int>{0, 1, 2});
  CHECK(t.score == doctest::Approx(0.1 * 0.81 * 0.36).epsilon(1e-14));
  CHECK(path_influence(tri, {0, 2}, 0.1, 2) == doctest::Approx(0.1 * 0.09).epsilon(1e-14));
  CHECK(most_influential_path(tri, 0, 2, 1, 0.1, 2).nodes == std::vector<int>{0, 2});

  // Score is recomputable from the stored fields.
  CHECK(std::abs(t.score - path_influence(tri, t.nodes, 0.1, 2)) <= 1e-12);
}

TEST_CASE("influence map") {
  // Star: leaves 1..4 feed the hub 0 with uniform weights.
  Adjacency s = Adjacency::Constant(5, 5, false);
  for (int v = 0; v < 5; ++v) {
    s(v, v) = true;
    s(v, 0) = true;
    s(0, v) = true;
  }
  const Matrix star = CombinationMatrix::from_support(s).weights();
  const auto map = influence_map(star, 0, 1, 0.1, 10);
  REQUIRE(map.entries.size() == 4);
  for (const auto& e : map.entries) {
    CHECK(e.source != 0);
    CHECK(e.raw == doctest::Approx(map.entries.front().raw).epsilon(1e-15));
    CHECK(e.normalized == doctest::Approx(1.0));
  }

  const Matrix iso = Matrix::Identity(3, 3);
  const auto flat = influence_map(iso, 0, 2, 0.1, 2);
  CHECK_FALSE(flat.normalized);
  for (const auto& e : flat.entries) CHECK(e.raw == 0.0);

  RandomStream rng(2);
  const Matrix a = random_connected(rng, 6, false);
  const auto m = influence_map(a, 3, 2, 0.2, 5);
  double top = 0.0;
  for (const auto& e : m.entries) {
    CHECK(e.raw >= 0.0);
    CHECK(e.normalized >= 0.0);
    CHECK(e.normalized <= 1.0);
    top = std::max(top, e.normalized);
  }
  CHECK(top == 1.0);
}

TEST_CASE("a non-neighbour can out-influence every neighbour") {
  // Target 0 hears from 1 and 3; agent 2 only reaches 0 through 3 but
  // keeps reinforcing its own signal.
  Matrix a = Matrix::Zero(4, 4);
  a(0, 0) = 0.05;
  a(1, 0) = 0.05;
  a(3, 0) = 0.9;
  a(1, 1) = 1.0;
  a(2, 2) = 1.0;
  a(2, 3) = 0.95;
  a(3, 3) = 0.05;
  const CombinationMatrix valid(a);
  const auto map = influence_map(a, 0, 3, 0.1, 10);
  const auto& e = map.entries;  // sources 1, 2, 3
  REQUIRE(e.size() == 3);
  CHECK(a(2, 0) == 0.0);
  CHECK(e[1].source == 2);
  CHECK(e[1].raw > e[0].raw);
  CHECK(e[1].raw > e[2].raw);
  CHECK(e[1].normalized == 1.0);
}

TEST_CASE("influence properties") {
  RandomStream rng(4);
  bool asymmetric = false;
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_connected(rng, 5, false);
    for (int l = 0; l < 5; ++l) {
      for (int k = 0; k < 5; ++k) {
        double prev = 0.0;
        for (int d = 0; d <= 6; ++d) {
          const double v = eta(a, l, k, d, 0.1, 4);
          CHECK(v >= prev);
          prev = v;
        }
        if (std::abs(eta(a, l, k, 2, 0.1, 4) - eta(a, k, l, 2, 0.1, 4)) > 1e-6) asymmetric = true;
      }
    }
  }
  CHECK(asymmetric);

  // Saturation on the reference graph.
  const Matrix g = generate_erdos_renyi(30, 0.2, 1).weights();
  std::vector<InfluenceMap> maps;
  for (int d = 1; d <= 6; ++d) maps.push_back(influence_map(g, 0, d, 0.1, 10));
  std::vector<double> gaps;
  for (std::size_t d = 0; d + 1 < maps.size(); ++d) {
    double gap = 0.0;
    for (std::size_t s = 0; s < maps[d].entries.size(); ++s) {
      gap = std::max(gap, std::abs(maps[d].entries[s].normalized - maps[d + 1].entries[s].normalized));
    }
    gaps.push_back(gap);
  }
  for (std::size_t i = 1; i < gaps.size(); ++i) CHECK(gaps[i] < gaps[i - 1]);
}

TEST_CASE("top paths") {
  const Matrix g = generate_erdos_renyi(12, 0.3, 3).weights();
  const auto paths = top_paths(g, 0, 3, 0.1, 10, 5);
  REQUIRE(paths.size() == 5);
  const auto map = influence_map(g, 0, 3, 0.1, 10);
  std::vector<double> raws;
  for (const auto& e : map.entries) raws.push_back(e.raw);
  std::sort(raws.rbegin(), raws.rend());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    CHECK(paths[i].nodes.back() == 0);
    CHECK(eta(g, paths[i].nodes.front(), 0, 3, 0.1, 10) == doctest::Approx(raws[i]).epsilon(1e-14));
  }
}

TEST_CASE("influence derivative") {
  RandomStream rng(7);
  SUBCASE("t equals i") {
    const Matrix a = random_connected(rng, 4, false);
    const std::vector<Matrix> seq{Matrix::Random(4, 2), Matrix::Random(4, 2)};
    const auto c = influence_derivative_check(a, Matrix::Zero(4, 2), seq, 2, 0.2);
    for (int l = 0; l < 4; ++l) {
      for (int k = 0; k < 4; ++k) {
        const double expected = l == k ? 0.2 : 0.0;
        CHECK(c.closed_form(l, k) == doctest::Approx(expected));
        CHECK(std::abs(c.numerical(l, k) - expected) <= 1e-8);
      }
    }
  }
  SUBCASE("one step back") {
    const Matrix a = random_connected(rng, 4, false);
    const std::vector<Matrix> seq{Matrix::Random(4, 3), Matrix::Random(4, 3), Matrix::Random(4, 3)};
    const auto c = influence_derivative_check(a, Matrix::Random(4, 3), seq, 2, 0.1, 1);
    CHECK((c.closed_form - 0.1 * 0.9 * a).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((c.closed_form - c.numerical).cwiseAbs().maxCoeff() <= 1e-5);
  }
  SUBCASE("random lags") {
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 2 + static_cast<int>(rng.below(4));
      const Matrix a = random_connected(rng, n, false);
      const std::size_t i = 1 + rng.below(6);
      const std::size_t t = i - rng.below(std::min<std::size_t>(i, 6));
      std::vector<Matrix> seq;
      for (std::size_t s = 0; s < i; ++s) seq.push_back(Matrix::Random(n, 2));
      const auto c = influence_derivative_check(a, Matrix::Random(n, 2), seq, t, 0.3);
      for (int l = 0; l < n; ++l) {
        for (int k = 0; k < n; ++k) {
          CHECK(std::abs(c.closed_form(l, k) - c.numerical(l, k)) <=
                1e-4 * std::max(std::abs(c.closed_form(l, k)), 1e-6));
        }
      }
    }
    CHECK_THROWS(influence_derivative_check(Matrix::Identity(2, 2), Matrix::Zero(2, 1),
                                            {Matrix::Zero(2, 1)}, 2, 0.1));
  }
}
