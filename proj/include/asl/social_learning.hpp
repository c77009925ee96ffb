#pragma once

#include "asl/graph.hpp"
#include "asl/log_ratio.hpp"
#include "asl/observation.hpp"
#include "asl/types.hpp"

#include <span>
#include <utility>
#include <vector>

namespace asl {

class RandomStream;

/// Beliefs of every agent at one time step, rows indexed by agent.
///
/// The log-space matrices are authoritative; `mu` and `psi` are their
/// exponentials. `psi` is the public (post-adapt, pre-combine) belief.
struct BeliefState {
  Matrix log_mu;
  Matrix log_psi;
  Matrix mu;
  Matrix psi;
  std::size_t time = 0;

  Eigen::Index agents() const { return log_mu.rows(); }
  Eigen::Index hypotheses() const { return log_mu.cols(); }
};

/// Uniform beliefs (mu = psi = 1/|Theta|) at time 0, so Lambda_0 = 0.
BeliefState uniform_beliefs(std::size_t n, int theta_count);

/// State whose public belief at time 0 is `psi0`; mu_0 is its combination under `a`.
BeliefState beliefs_from_public(const Matrix& psi0, const CombinationMatrix& a);

/// Row-wise log-sum-exp normalization in place.
void normalize_log_rows(Matrix& logs);

/// log psi = delta log L(z | theta) + (1 - delta) log mu_prev, row-normalized.
Matrix adapt_log(const Matrix& log_mu, const LikelihoodModel& model,
                 const ObservationBatch& batch, double delta);

/// log mu = A^T log psi, row-normalized.
Matrix combine_log(const Matrix& log_psi, const CombinationMatrix& a);

/// Adaptation step on the previous beliefs; returns psi.
Matrix adapt_step(const BeliefState& state, const LikelihoodModel& model,
                  const ObservationBatch& batch, double delta);

/// Geometric-mean combination of psi; returns mu.
Matrix combine_step(const Matrix& psi, const CombinationMatrix& a);

/// Draws one batch under `true_theta`, then adapts and combines.
std::pair<BeliefState, ObservationBatch> step(const BeliefState& state,
                                              const LikelihoodModel& model,
                                              const CombinationMatrix& a, double delta,
                                              Hypothesis true_theta, RandomStream& rng);

/// Same update for an already drawn batch.
BeliefState advance(const BeliefState& state, const LikelihoodModel& model,
                    const CombinationMatrix& a, const ObservationBatch& batch, double delta);

/// Lambda_i from the public beliefs: log psi_k(theta0) - log psi_k(theta_j).
LogRatioMatrix log_belief_matrix(const BeliefState& state, Hypothesis theta0 = 0);

/// (1 - delta) A^T Lambda_prev + delta L. Throws DimensionError on shape mismatch.
LogRatioMatrix recursion_reference(const LogRatioMatrix& prev_lambda, const Matrix& a,
                                   const LogRatioMatrix& batch_lr, double delta);

/// argmax of agent k's public belief, lowest index on ties.
Hypothesis estimate_state_agent(const BeliefState& state, Eigen::Index k);
std::vector<Hypothesis> estimate_states(const BeliefState& state);

/// Most frequent estimate, lowest index on ties.
Hypothesis majority_vote(std::span<const Hypothesis> estimates);

/// Elementwise bound on |Lambda_i| for a run started from Lambda_0.
///
/// Advances Lambda_bar_i = (1 - delta) A^T Lambda_bar_{i-1} + delta b 11^T, the
/// recursive form of the closed-form envelope.
class LogBeliefEnvelope {
 public:
  LogBeliefEnvelope(const CombinationMatrix& a, const Matrix& lambda0, double delta,
                    double bound);

  void advance();
  const Matrix& current() const { return envelope_; }
  std::size_t time() const { return time_; }

 private:
  Matrix a_transpose_;
  Matrix envelope_;
  double delta_;
  double bound_;
  std::size_t time_ = 0;
};

}  // namespace asl
