#pragma once

#include "asl/log_ratio.hpp"
#include "asl/types.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace asl {

class RandomStream;

/// Categorical likelihoods L_k(z | theta) for every agent.
///
/// Table k is |Theta| x |Z_k|; row theta is the law of agent k's observation
/// under hypothesis theta. All entries are strictly positive, so every log
/// likelihood ratio is bounded by `bound()`.
class LikelihoodModel {
 public:
  static constexpr double kRowTolerance = 1e-12;

  /// Validates and takes ownership of the per-agent tables.
  explicit LikelihoodModel(std::vector<Matrix> tables);

  std::size_t agents() const { return tables_.size(); }
  int theta_count() const { return theta_count_; }
  int z_count(std::size_t k) const { return static_cast<int>(tables_[k].cols()); }
  const Matrix& table(std::size_t k) const { return tables_[k]; }
  double beta(std::size_t k, int z, Hypothesis theta) const { return tables_[k](theta, z); }
  double log_beta(std::size_t k, int z, Hypothesis theta) const {
    return log_tables_[k](theta, z);
  }
  /// max |log(beta_{k,z}(theta) / beta_{k,z}(theta'))| over k, z, theta, theta'.
  double bound() const { return bound_; }

 private:
  std::vector<Matrix> tables_;
  std::vector<Matrix> log_tables_;
  int theta_count_ = 0;
  double bound_ = 0.0;
};

/// One observation per agent at a given time.
struct ObservationBatch {
  std::size_t time = 0;
  std::vector<int> symbols;
};

inline constexpr double kIdentifiabilityTolerance = 1e-6;

double kl_divergence(const LikelihoodModel& model, std::size_t k, Hypothesis theta_a,
                     Hypothesis theta_b);

/// Every theta != true_theta has some agent with KL(L_k(true) || L_k(theta)) > tol.
bool is_identifiable(const LikelihoodModel& model, Hypothesis true_theta,
                     double tolerance = kIdentifiabilityTolerance);

/// Random model: each row uniform on the simplex, clipped to [epsilon, 1 - epsilon]
/// and renormalized; redrawn until identifiable. Throws BudgetExhausted.
LikelihoodModel generate_model(std::size_t n, int theta_count, int z_count, double epsilon,
                               std::uint64_t seed, Hypothesis true_theta,
                               int max_attempts = 1000);

ObservationBatch sample_observations(const LikelihoodModel& model, Hypothesis true_theta,
                                     RandomStream& rng, std::size_t time = 0);

/// [L]_{k,j} = log L_k(z_k | theta0) - log L_k(z_k | theta_j).
LogRatioMatrix log_likelihood_ratio_matrix(const LikelihoodModel& model,
                                           const ObservationBatch& batch,
                                           Hypothesis theta0 = 0);

/// Mean of the likelihood-ratio matrix when observations follow `assumed_theta`:
/// KL(L_k(assumed) || L_k(theta_j)) - KL(L_k(assumed) || L_k(theta0)).
LogRatioMatrix mean_likelihood_matrix(const LikelihoodModel& model, Hypothesis assumed_theta,
                                      Hypothesis theta0 = 0);

/// Smallest eigenvalue of the sample mean of L L^T over `samples` draws.
double min_second_moment_eigenvalue(const LikelihoodModel& model, Hypothesis theta0,
                                    Hypothesis true_theta, std::size_t samples,
                                    RandomStream& rng);

void save_model(const std::filesystem::path& path, const LikelihoodModel& model,
                Hypothesis true_theta);

struct ModelRecord {
  LikelihoodModel model;
  Hypothesis true_theta;
};

ModelRecord load_model(const std::filesystem::path& path);

}  // namespace asl
