#pragma once

#include "asl/graph.hpp"
#include "asl/log_ratio.hpp"
#include "asl/observation.hpp"
#include "asl/social_learning.hpp"
#include "asl/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace asl {

enum class LearnerMode {
  KnownState,    ///< mean likelihood matrix taken under the true hypothesis
  MajorityVote,  ///< mean likelihood matrix taken under the network vote
};

std::string to_string(LearnerMode mode);
LearnerMode parse_learner_mode(const std::string& text);

/// Online graph learner. The estimate is an unconstrained n x n matrix.
struct LearnerState {
  Matrix estimate;
  double mu_step = 0.1;
  double delta = 0.1;
  Hypothesis reference = 0;
  LearnerMode mode = LearnerMode::KnownState;
};

/// Learner started from the uniform matrix (1/n) 11^T.
LearnerState initial_learner(std::size_t n, double mu_step, double delta, LearnerMode mode,
                             Hypothesis reference = 0);

/// 1/2 || Lambda_now - (1 - delta) A^T Lambda_prev - delta Lbar ||_F^2
double loss(const Matrix& a, const LogRatioMatrix& lambda_now, const LogRatioMatrix& lambda_prev,
            const LogRatioMatrix& mean_lr, double delta);

/// Gradient of `loss` with respect to A: -(1 - delta) Lambda_prev R^T, R the residual.
Matrix gradient(const Matrix& a, const LogRatioMatrix& lambda_now,
                const LogRatioMatrix& lambda_prev, const LogRatioMatrix& mean_lr, double delta);

/// One stochastic-gradient step, no projection:
/// A_i = A_{i-1} + mu (1 - delta) Lambda_{i-1} (Lambda_i^T - (1 - delta) Lambda_{i-1}^T A_{i-1} - delta Lbar^T).
LearnerState ogl_update(const LearnerState& state, const LogRatioMatrix& lambda_now,
                        const LogRatioMatrix& lambda_prev, const LogRatioMatrix& mean_lr);

/// Squared Frobenius deviation ||A_star - estimate||_F^2.
double msd(const Matrix& a_star, const Matrix& estimate);
inline double msd(const CombinationMatrix& a_star, const Matrix& estimate) {
  return msd(a_star.weights(), estimate);
}

enum class EventKind { StateChange, RegenerateEdges, Churn };

std::string to_string(EventKind kind);
EventKind parse_event_kind(const std::string& text);

/// A change applied to the hidden network before the update of `step`.
struct ScheduleEvent {
  std::size_t step = 1;
  EventKind kind = EventKind::StateChange;
  Hypothesis new_theta = 0;     ///< StateChange
  double flip_prob = 0.005;     ///< Churn
  std::size_t period = 500;     ///< Churn: repeats every `period` steps from `step`
};

struct OnlineConfig {
  std::size_t steps = 0;
  double delta = 0.1;
  double mu = 0.1;
  LearnerMode mode = LearnerMode::KnownState;
  Hypothesis true_theta = 0;
  Hypothesis reference = 0;
  std::uint64_t seed = 0;
  double edge_prob = 0.2;  ///< used by RegenerateEdges
  std::vector<ScheduleEvent> schedule;
  std::optional<Matrix> initial_estimate;
};

/// Per-step record of a run; index i holds step i + 1.
struct MsdTrace {
  std::vector<double> msd;
  std::vector<Hypothesis> vote;        ///< network estimate theta_hat_i
  std::vector<Hypothesis> true_theta;
  std::vector<std::string> events;     ///< event markers applied at that step, "" if none

  std::size_t size() const { return msd.size(); }
};

/// View of one step handed to a StepObserver.
struct StepRecord {
  std::size_t step;
  const BeliefState& beliefs;
  const ObservationBatch& batch;
  const LogRatioMatrix& lambda;
  Hypothesis vote;
  Hypothesis true_theta;
  const CombinationMatrix& a_star;
  const Matrix& estimate;
};

using StepObserver = std::function<void(const StepRecord&)>;

struct OnlineResult {
  LearnerState learner;
  MsdTrace trace;
  CombinationMatrix final_truth;
};

/// Runs social learning and the graph learner in lockstep.
///
/// At step i the scheduled events for i are applied first, then a batch is
/// drawn, beliefs are adapted and combined, the learner takes one step on
/// (Lambda_i, Lambda_{i-1}) and the deviation is scored against the current
/// truth. The observation stream depends only on `config.seed`, never on the
/// learner, so runs that differ only in learner settings share it.
OnlineResult run_online(const CombinationMatrix& a_star, const LikelihoodModel& model,
                        const OnlineConfig& config, const StepObserver& observer = {});

/// Diagnostics of the steady-state deviation bound from sampled moments.
struct SteadyStateBound {
  double nu = 0.0;
  double kappa = 0.0;
  double alpha = 1.0;
  double gamma = 0.0;
  std::optional<double> bound;  ///< empty when nu <= 0 (degenerate moment)
};

SteadyStateBound steady_state_bound(const std::vector<Matrix>& lambda_samples,
                                    const std::vector<Matrix>& lr_samples, double delta,
                                    double mu);

/// Entry-wise estimate > tau_edge.
Adjacency threshold_edges(const Matrix& estimate, double tau_edge);

struct KMeansSupport {
  Adjacency adjacency;
  bool degenerate = false;  ///< all entries equal; adjacency is empty
  double low_centroid = 0.0;
  double high_centroid = 0.0;
};

/// One-dimensional 2-means over all entries, started from the min and max entry.
KMeansSupport kmeans_binarize(const Matrix& estimate);

/// F1 score of `estimate` as a predictor of the edges in `truth`.
double support_f1(const Adjacency& truth, const Adjacency& estimate);

/// Post-processing: zero entries <= tau_edge and renormalize columns to sum to one.
/// A column with no surviving entry gets a self-loop of weight one.
CombinationMatrix to_combination_matrix(const Matrix& estimate, double tau_edge);

}  // namespace asl
