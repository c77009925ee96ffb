#pragma once

#include "asl/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>

namespace asl {

class RandomStream;

/// Left-stochastic combination matrix over n agents.
///
/// Entry (l, k) is the weight a_{lk} that agent k assigns to its in-neighbor l.
/// Every entry lies in [0, 1] and every column sums to one. A positive entry
/// marks the directed edge l -> k.
class CombinationMatrix {
 public:
  static constexpr double kColumnTolerance = 1e-12;

  /// Validates `weights`; throws std::invalid_argument on violation.
  explicit CombinationMatrix(Matrix weights);

  /// Uniform-averaging rule: a_{lk} = 1 / |N_k| over the in-neighborhood of k.
  /// Every column of `support` needs at least one entry.
  static CombinationMatrix from_support(const Adjacency& support);

  std::size_t size() const { return static_cast<std::size_t>(weights_.rows()); }
  const Matrix& weights() const { return weights_; }
  double operator()(std::size_t l, std::size_t k) const { return weights_(l, k); }
  Adjacency support() const { return weights_.array() > 0.0; }

  friend bool operator==(const CombinationMatrix& a, const CombinationMatrix& b) {
    return a.weights_.rows() == b.weights_.rows() &&
           a.weights_.cols() == b.weights_.cols() && a.weights_ == b.weights_;
  }

 private:
  Matrix weights_;
};

/// Perron vector and geometric mixing envelope of a primitive left-stochastic matrix.
struct SpectralProfile {
  Vector perron;       ///< A u = u, u > 0, sum(u) = 1
  double beta2 = 0.0;  ///< |second largest-magnitude eigenvalue|
  double sigma = 0.0;
  double beta = 0.0;   ///< rate with beta2 < beta < 1
};

/// Deviations below this are treated as rounding noise when fitting and checking sigma.
inline constexpr double kMixingNoiseFloor = 1e-12;

inline constexpr int kDefaultResampleBudget = 1000;

/// True iff every ordered pair of agents is joined by a positive-weight path.
bool is_strongly_connected(const Adjacency& support);
bool is_strongly_connected(const CombinationMatrix& a);

/// Erdos-Renyi digraph with all self-loops, resampled until strongly connected.
/// Throws BudgetExhausted after `max_attempts` rejections.
CombinationMatrix generate_erdos_renyi(std::size_t n, double p, std::uint64_t seed,
                                       int max_attempts = kDefaultResampleBudget);

/// One independent flip draw over the off-diagonal bits of `support`.
Adjacency flip_edges(const Adjacency& support, double flip_prob, RandomStream& rng);

/// Flips each off-diagonal edge with probability `flip_prob`, keeps the
/// self-loops and re-derives uniform weights. The draw is repeated until the
/// result is strongly connected. When no bit flips the input is returned as is.
CombinationMatrix perturb_edges(const CombinationMatrix& a, double flip_prob,
                                std::uint64_t seed,
                                int max_attempts = kDefaultResampleBudget);

/// Fresh Erdos-Renyi support of the same size.
CombinationMatrix regenerate_edges(const CombinationMatrix& a, double p, std::uint64_t seed,
                                   int max_attempts = kDefaultResampleBudget);

SpectralProfile spectral_profile(const CombinationMatrix& a, int fit_horizon = 200);

/// Largest |[A^t]_{lk} - u_l| - sigma beta^t over t = 1..horizon; nonpositive when
/// the envelope holds (up to kMixingNoiseFloor).
double mixing_envelope_excess(const CombinationMatrix& a, const SpectralProfile& profile,
                              int horizon);

/// On-disk graph document. Learned estimates are stored with `learned = true`
/// and may hold arbitrary real weights.
struct GraphRecord {
  Matrix weights;
  Adjacency adjacency;
  std::optional<std::uint64_t> seed;
  bool learned = false;
};

GraphRecord to_record(const CombinationMatrix& a, std::optional<std::uint64_t> seed = {});
GraphRecord learned_record(const Matrix& estimate);

void save_graph(const std::filesystem::path& path, const GraphRecord& record);
GraphRecord load_graph(const std::filesystem::path& path);

}  // namespace asl
