#include "asl/graph.hpp"

#include "asl/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <vector>

namespace asl {

namespace {

bool reaches_all(const Adjacency& support, bool reverse) {
  const Eigen::Index n = support.rows();
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<Eigen::Index> stack{0};
  seen[0] = 1;
  Eigen::Index visited = 1;
  while (!stack.empty()) {
    const Eigen::Index v = stack.back();
    stack.pop_back();
    for (Eigen::Index w = 0; w < n; ++w) {
      const bool edge = reverse ? support(w, v) : support(v, w);
      if (edge && !seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        ++visited;
        stack.push_back(w);
      }
    }
  }
  return visited == n;
}

Adjacency draw_erdos_renyi(std::size_t n, double p, RandomStream& rng) {
  const auto m = static_cast<Eigen::Index>(n);
  Adjacency support = Adjacency::Constant(m, m, false);
  for (Eigen::Index l = 0; l < m; ++l) {
    for (Eigen::Index k = 0; k < m; ++k) {
      if (l == k) {
        support(l, k) = true;
      } else {
        support(l, k) = rng.bernoulli(p);
      }
    }
  }
  return support;
}

}  // namespace

CombinationMatrix::CombinationMatrix(Matrix weights) : weights_(std::move(weights)) {
  if (weights_.rows() != weights_.cols() || weights_.rows() == 0) {
    throw std::invalid_argument("combination matrix must be square and non-empty");
  }
  if (!weights_.allFinite() || weights_.minCoeff() < 0.0 || weights_.maxCoeff() > 1.0) {
    throw std::invalid_argument("combination weights must lie in [0, 1]");
  }
  for (Eigen::Index k = 0; k < weights_.cols(); ++k) {
    if (std::abs(weights_.col(k).sum() - 1.0) > kColumnTolerance) {
      throw std::invalid_argument("column " + std::to_string(k) +
                                  " of combination matrix does not sum to 1");
    }
  }
}

CombinationMatrix CombinationMatrix::from_support(const Adjacency& support) {
  if (support.rows() != support.cols()) {
    throw std::invalid_argument("support must be square");
  }
  Matrix w = Matrix::Zero(support.rows(), support.cols());
  for (Eigen::Index k = 0; k < support.cols(); ++k) {
    const auto degree = support.col(k).count();
    if (degree == 0) {
      throw std::invalid_argument("agent " + std::to_string(k) + " has no in-neighbor");
    }
    for (Eigen::Index l = 0; l < support.rows(); ++l) {
      if (support(l, k)) w(l, k) = 1.0 / static_cast<double>(degree);
    }
  }
  return CombinationMatrix(std::move(w));
}

bool is_strongly_connected(const Adjacency& support) {
  if (support.rows() == 0) return false;
  return reaches_all(support, false) && reaches_all(support, true);
}

bool is_strongly_connected(const CombinationMatrix& a) {
  return is_strongly_connected(a.support());
}

CombinationMatrix generate_erdos_renyi(std::size_t n, double p, std::uint64_t seed,
                                       int max_attempts) {
  if (n < 2) throw std::invalid_argument("erdos-renyi: need at least 2 agents");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("erdos-renyi: p must be in (0, 1)");
  RandomStream rng(seed);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Adjacency support = draw_erdos_renyi(n, p, rng);
    if (is_strongly_connected(support)) return CombinationMatrix::from_support(support);
  }
  throw BudgetExhausted("connectivity unreachable after " + std::to_string(max_attempts) +
                        " attempts");
}

Adjacency flip_edges(const Adjacency& support, double flip_prob, RandomStream& rng) {
  Adjacency out = support;
  for (Eigen::Index l = 0; l < support.rows(); ++l) {
    for (Eigen::Index k = 0; k < support.cols(); ++k) {
      if (l != k && rng.bernoulli(flip_prob)) out(l, k) = !out(l, k);
    }
  }
  return out;
}

CombinationMatrix perturb_edges(const CombinationMatrix& a, double flip_prob,
                                std::uint64_t seed, int max_attempts) {
  if (!(flip_prob >= 0.0 && flip_prob < 1.0)) {
    throw std::invalid_argument("perturb_edges: flip_prob must be in [0, 1)");
  }
  const Adjacency support = a.support();
  RandomStream rng(seed);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    const Adjacency flipped = flip_edges(support, flip_prob, rng);
    if ((flipped == support).all()) return a;
    if (is_strongly_connected(flipped)) return CombinationMatrix::from_support(flipped);
  }
  throw BudgetExhausted("connectivity unreachable after " + std::to_string(max_attempts) +
                        " edge-flip attempts");
}

CombinationMatrix regenerate_edges(const CombinationMatrix& a, double p, std::uint64_t seed,
                                   int max_attempts) {
  return generate_erdos_renyi(a.size(), p, seed, max_attempts);
}

SpectralProfile spectral_profile(const CombinationMatrix& a, int fit_horizon) {
  const Matrix& w = a.weights();
  const Eigen::Index n = w.rows();
  SpectralProfile profile;

  // Power iteration for the right Perron vector; the iterate keeps unit sum
  // because the columns of A sum to one.
  Vector u = Vector::Constant(n, 1.0 / static_cast<double>(n));
  constexpr int kMaxIterations = 1'000'000;
  bool converged = false;
  for (int it = 0; it < kMaxIterations; ++it) {
    Vector next = w * u;
    next /= next.sum();
    const double change = (next - u).cwiseAbs().maxCoeff();
    u = std::move(next);
    if (change < 1e-15) {
      converged = true;
      break;
    }
  }
  if (!converged || u.minCoeff() <= 0.0) {
    throw ConvergenceError("power iteration did not converge; matrix is not primitive");
  }
  profile.perron = u;

  Eigen::EigenSolver<Matrix> solver(w, false);
  std::vector<double> magnitudes;
  for (Eigen::Index i = 0; i < n; ++i) magnitudes.push_back(std::abs(solver.eigenvalues()(i)));
  std::sort(magnitudes.begin(), magnitudes.end(), std::greater<>());
  profile.beta2 = n > 1 ? magnitudes[1] : 0.0;
  if (profile.beta2 >= 1.0 - 1e-12) {
    throw ConvergenceError("second eigenvalue on the unit circle; matrix is not primitive");
  }
  profile.beta = 0.5 * (1.0 + profile.beta2);

  Matrix power = Matrix::Identity(n, n);
  double sigma = 0.0;
  double beta_t = 1.0;
  for (int t = 1; t <= fit_horizon; ++t) {
    power = power * w;
    beta_t *= profile.beta;
    const double dev = (power.colwise() - u).cwiseAbs().maxCoeff();
    if (dev > kMixingNoiseFloor) sigma = std::max(sigma, dev / beta_t);
  }
  profile.sigma = sigma;
  return profile;
}

double mixing_envelope_excess(const CombinationMatrix& a, const SpectralProfile& profile,
                              int horizon) {
  const Matrix& w = a.weights();
  Matrix power = Matrix::Identity(w.rows(), w.cols());
  double worst = -std::numeric_limits<double>::infinity();
  for (int t = 1; t <= horizon; ++t) {
    power = power * w;
    const double dev = (power.colwise() - profile.perron).cwiseAbs().maxCoeff();
    const double bound = profile.sigma * std::pow(profile.beta, t) + kMixingNoiseFloor;
    worst = std::max(worst, dev - bound);
  }
  return worst;
}

GraphRecord to_record(const CombinationMatrix& a, std::optional<std::uint64_t> seed) {
  return GraphRecord{a.weights(), a.support(), seed, false};
}

GraphRecord learned_record(const Matrix& estimate) {
  return GraphRecord{estimate, estimate.array() > 0.0, std::nullopt, true};
}

void save_graph(const std::filesystem::path& path, const GraphRecord& record) {
  const Eigen::Index n = record.weights.rows();
  nlohmann::json doc;
  doc["n"] = n;
  std::vector<int> adjacency;
  std::vector<double> weights;
  for (Eigen::Index l = 0; l < n; ++l) {
    for (Eigen::Index k = 0; k < n; ++k) {
      adjacency.push_back(record.adjacency(l, k) ? 1 : 0);
      weights.push_back(record.weights(l, k));
    }
  }
  doc["adjacency"] = adjacency;
  doc["weights"] = weights;
  doc["seed"] = record.seed ? nlohmann::json(*record.seed) : nlohmann::json(nullptr);
  doc["learned"] = record.learned;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(1) << '\n';
}

GraphRecord load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
    const auto n = doc.at("n").get<Eigen::Index>();
    const auto adjacency = doc.at("adjacency").get<std::vector<int>>();
    const auto weights = doc.at("weights").get<std::vector<double>>();
    if (n <= 0 || adjacency.size() != static_cast<std::size_t>(n * n) ||
        weights.size() != static_cast<std::size_t>(n * n)) {
      throw IoError(path.string() + ": adjacency/weights do not match n");
    }
    GraphRecord record;
    record.weights.resize(n, n);
    record.adjacency.resize(n, n);
    for (Eigen::Index l = 0; l < n; ++l) {
      for (Eigen::Index k = 0; k < n; ++k) {
        const auto idx = static_cast<std::size_t>(l * n + k);
        record.weights(l, k) = weights[idx];
        record.adjacency(l, k) = adjacency[idx] != 0;
      }
    }
    if (doc.contains("seed") && !doc["seed"].is_null()) {
      record.seed = doc["seed"].get<std::uint64_t>();
    }
    record.learned = doc.value("learned", false);
    return record;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace asl
