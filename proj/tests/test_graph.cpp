#include "asl/graph.hpp"
#include "asl/random.hpp"

#include <doctest.h>

#include <filesystem>
#include <vector>

using namespace asl;

namespace {

// Reachability by plain BFS over the adjacency, independent of the library DFS.
bool all_pairs_reachable(const Adjacency& s) {
  const Eigen::Index n = s.rows();
  for (Eigen::Index src = 0; src < n; ++src) {
    std::vector<bool> seen(n, false);
    std::vector<Eigen::Index> queue{src};
    seen[src] = true;
    for (std::size_t q = 0; q < queue.size(); ++q) {
      for (Eigen::Index v = 0; v < n; ++v) {
        if (s(queue[q], v) && !seen[v]) {
          seen[v] = true;
          queue.push_back(v);
        }
      }
    }
    for (bool b : seen) {
      if (!b) return false;
    }
  }
  return true;
}

void check_left_stochastic(const Matrix& w) {
  for (Eigen::Index k = 0; k < w.cols(); ++k) CHECK(std::abs(w.col(k).sum() - 1.0) <= 1e-12);
  CHECK(w.minCoeff() >= 0.0);
  CHECK(w.maxCoeff() <= 1.0);
}

}  // namespace

TEST_CASE("combination matrix rejects non left-stochastic weights") {
  Matrix w(2, 2);
  w << 0.5, 0.5, 0.6, 0.5;
  CHECK_THROWS_AS(CombinationMatrix{w}, std::invalid_argument);
  w << 0.5, 1.5, 0.5, -0.5;
  CHECK_THROWS_AS(CombinationMatrix{w}, std::invalid_argument);
  w << 0.5, 0.25, 0.5, 0.75;
  CHECK_NOTHROW(CombinationMatrix{w});
}

TEST_CASE("uniform averaging over the in-neighbourhood") {
  Adjacency s = Adjacency::Constant(3, 3, false);
  s(0, 0) = s(1, 1) = s(2, 2) = true;
  s(0, 1) = s(2, 1) = true;
  const auto a = CombinationMatrix::from_support(s);
  CHECK(a(0, 1) == doctest::Approx(1.0 / 3));
  CHECK(a(1, 1) == doctest::Approx(1.0 / 3));
  CHECK(a(2, 1) == doctest::Approx(1.0 / 3));
  CHECK(a(0, 0) == 1.0);
  check_left_stochastic(a.weights());
}

TEST_CASE("erdos-renyi generator on the reference size") {
  const auto a = generate_erdos_renyi(30, 0.2, 7);
  CHECK(a.size() == 30);
  check_left_stochastic(a.weights());
  CHECK(is_strongly_connected(a));
  CHECK(all_pairs_reachable(a.support()));
  for (int k = 0; k < 30; ++k) CHECK(a(k, k) > 0.0);
}

TEST_CASE("erdos-renyi generator limits and determinism") {
  const auto full = generate_erdos_renyi(2, 0.999999, 4);
  CHECK(full.support().all());
  check_left_stochastic(full.weights());

  const auto a = generate_erdos_renyi(5, 0.5, 1);
  const auto b = generate_erdos_renyi(5, 0.5, 1);
  CHECK(a == b);
}

TEST_CASE("generator budget exhaustion") {
  CHECK_THROWS_AS(generate_erdos_renyi(30, 1e-9, 1, 5), BudgetExhausted);
  try {
    generate_erdos_renyi(30, 1e-9, 1, 3);
  } catch (const BudgetExhausted& e) {
    CHECK(std::string(e.what()).find("connectivity unreachable") != std::string::npos);
  }
}

TEST_CASE("strong connectivity predicate") {
  CHECK_FALSE(is_strongly_connected(CombinationMatrix(Matrix::Identity(3, 3))));
  Adjacency cycle = Adjacency::Constant(3, 3, false);
  cycle(0, 1) = cycle(1, 2) = cycle(2, 0) = true;
  cycle(1, 1) = true;
  CHECK(is_strongly_connected(cycle));
  cycle(2, 0) = false;
  CHECK_FALSE(is_strongly_connected(cycle));

  // Oracle comparison on random supports.
  RandomStream rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(5));
    Adjacency s(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) s(i, j) = i == j || rng.bernoulli(0.3);
    }
    CHECK(is_strongly_connected(s) == all_pairs_reachable(s));
  }
}

TEST_CASE("spectral profile") {
  SUBCASE("doubly stochastic gives the uniform Perron vector") {
    Matrix w(4, 4);
    w << 0.4, 0.2, 0.2, 0.2, 0.2, 0.4, 0.2, 0.2, 0.2, 0.2, 0.4, 0.2, 0.2, 0.2, 0.2, 0.4;
    const auto p = spectral_profile(CombinationMatrix(w));
    for (int i = 0; i < 4; ++i) CHECK(p.perron(i) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(p.beta2 == doctest::Approx(0.2).epsilon(1e-9));
  }
  SUBCASE("reference graph") {
    const auto a = generate_erdos_renyi(30, 0.2, 7);
    const auto p = spectral_profile(a);
    CHECK((a.weights() * p.perron - p.perron).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(p.perron.minCoeff() > 0.0);
    CHECK(p.perron.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.beta2 >= 0.0);
    CHECK(p.beta2 < 1.0);
    CHECK(p.beta > p.beta2);
    CHECK(p.beta < 1.0);
    // Envelope checked by direct powering.
    Matrix power = Matrix::Identity(30, 30);
    double worst = 0.0;
    double rate = 1.0;
    for (int t = 1; t <= 200; ++t) {
      power = power * a.weights();
      rate *= p.beta;
      for (int l = 0; l < 30; ++l) {
        for (int k = 0; k < 30; ++k) {
          worst = std::max(worst, std::abs(power(l, k) - p.perron(l)) - (p.sigma * rate + kMixingNoiseFloor));
        }
      }
    }
    CHECK(worst <= 0.0);
    CHECK(mixing_envelope_excess(a, p, 200) <= 0.0);
  }
}

TEST_CASE("perturb edges") {
  const auto a = generate_erdos_renyi(30, 0.2, 11);
  CHECK(perturb_edges(a, 0.0, 5) == a);

  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto b = perturb_edges(a, 0.05, s);
    check_left_stochastic(b.weights());
    CHECK(is_strongly_connected(b));
    for (int k = 0; k < 30; ++k) CHECK(b(k, k) > 0.0);
  }

  // Expected number of flipped bits in one draw: 870 * 0.005 = 4.35.
  RandomStream rng(2024);
  const Adjacency support = a.support();
  double flips = 0.0;
  const int draws = 10000;
  for (int t = 0; t < draws; ++t) {
    const Adjacency f = flip_edges(support, 0.005, rng);
    flips += static_cast<double>((f != support).count());
    CHECK((f.matrix().diagonal().array() == support.matrix().diagonal().array()).all());
  }
  CHECK(flips / draws == doctest::Approx(4.35).epsilon(0.10));
}

TEST_CASE("regenerate edges") {
  const auto a = generate_erdos_renyi(30, 0.2, 1);
  const auto b = regenerate_edges(a, 0.2, 77);
  CHECK(regenerate_edges(a, 0.2, 77) == b);
  CHECK_FALSE((a.support() == b.support()).all());
  check_left_stochastic(b.weights());
  CHECK(is_strongly_connected(b));
  const auto small = regenerate_edges(generate_erdos_renyi(2, 0.9, 3), 0.9, 4);
  check_left_stochastic(small.weights());
}

TEST_CASE("graph file round trip is bit exact") {
  const auto dir = std::filesystem::path(ASL_TEST_TMP_DIR);
  std::filesystem::create_directories(dir);
  const auto a = generate_erdos_renyi(12, 0.3, 5);
  save_graph(dir / "g.json", to_record(a, 5));
  const auto rec = load_graph(dir / "g.json");
  CHECK(rec.weights == a.weights());
  CHECK((rec.adjacency == a.support()).all());
  REQUIRE(rec.seed.has_value());
  CHECK(*rec.seed == 5);
  CHECK_FALSE(rec.learned);

  Matrix est = Matrix::Random(4, 4);
  est(1, 2) = 0.1 + 1e-17;
  save_graph(dir / "l.json", learned_record(est));
  const auto back = load_graph(dir / "l.json");
  CHECK(back.learned);
  CHECK(back.weights == est);
  CHECK_FALSE(back.seed.has_value());
}
