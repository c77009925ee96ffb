#include "asl/graph_learning.hpp"

#include "asl/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace asl {

namespace {

void check_shapes(const Matrix& a, const LogRatioMatrix& now, const LogRatioMatrix& prev,
                  const LogRatioMatrix& mean_lr) {
  if (a.rows() != a.cols() || a.rows() != now.agents() || now.agents() != prev.agents() ||
      now.agents() != mean_lr.agents() || now.columns() != prev.columns() ||
      now.columns() != mean_lr.columns()) {
    throw DimensionError("graph learning: dimension mismatch");
  }
}

Matrix residual(const Matrix& a, const LogRatioMatrix& now, const LogRatioMatrix& prev,
                const LogRatioMatrix& mean_lr, double delta) {
  return now.values - (1.0 - delta) * a.transpose() * prev.values - delta * mean_lr.values;
}

constexpr std::uint64_t kObservationStream = 1;
constexpr std::uint64_t kTopologyStream = 2;

}  // namespace

std::string to_string(LearnerMode mode) {
  return mode == LearnerMode::KnownState ? "known" : "vote";
}

LearnerMode parse_learner_mode(const std::string& text) {
  if (text == "known") return LearnerMode::KnownState;
  if (text == "vote") return LearnerMode::MajorityVote;
  throw std::invalid_argument("unknown learner mode '" + text + "' (expected known|vote)");
}

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::StateChange: return "state-change";
    case EventKind::RegenerateEdges: return "regenerate-edges";
    case EventKind::Churn: return "churn";
  }
  return "unknown";
}

EventKind parse_event_kind(const std::string& text) {
  if (text == "state-change") return EventKind::StateChange;
  if (text == "regenerate-edges") return EventKind::RegenerateEdges;
  if (text == "churn") return EventKind::Churn;
  throw std::invalid_argument("unknown event kind '" + text + "'");
}

LearnerState initial_learner(std::size_t n, double mu_step, double delta, LearnerMode mode,
                             Hypothesis reference) {
  if (n == 0) throw std::invalid_argument("learner needs at least one agent");
  if (!(mu_step >= 0.0)) throw std::invalid_argument("learning rate must be nonnegative");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in (0, 1)");
  const auto m = static_cast<Eigen::Index>(n);
  return LearnerState{Matrix::Constant(m, m, 1.0 / static_cast<double>(n)), mu_step, delta,
                      reference, mode};
}

double loss(const Matrix& a, const LogRatioMatrix& lambda_now, const LogRatioMatrix& lambda_prev,
            const LogRatioMatrix& mean_lr, double delta) {
  check_shapes(a, lambda_now, lambda_prev, mean_lr);
  return 0.5 * residual(a, lambda_now, lambda_prev, mean_lr, delta).squaredNorm();
}

Matrix gradient(const Matrix& a, const LogRatioMatrix& lambda_now,
                const LogRatioMatrix& lambda_prev, const LogRatioMatrix& mean_lr, double delta) {
  check_shapes(a, lambda_now, lambda_prev, mean_lr);
  const Matrix r = residual(a, lambda_now, lambda_prev, mean_lr, delta);
  return -(1.0 - delta) * lambda_prev.values * r.transpose();
}

LearnerState ogl_update(const LearnerState& state, const LogRatioMatrix& lambda_now,
                        const LogRatioMatrix& lambda_prev, const LogRatioMatrix& mean_lr) {
  check_shapes(state.estimate, lambda_now, lambda_prev, mean_lr);
  const double delta = state.delta;
  LearnerState next = state;
  const Matrix r = residual(state.estimate, lambda_now, lambda_prev, mean_lr, delta);
  next.estimate.noalias() += state.mu_step * (1.0 - delta) * lambda_prev.values * r.transpose();
  return next;
}

double msd(const Matrix& a_star, const Matrix& estimate) {
  if (a_star.rows() != estimate.rows() || a_star.cols() != estimate.cols()) {
    throw DimensionError("msd: dimension mismatch");
  }
  return (a_star - estimate).squaredNorm();
}

OnlineResult run_online(const CombinationMatrix& a_star, const LikelihoodModel& model,
                        const OnlineConfig& config, const StepObserver& observer) {
  const std::size_t n = a_star.size();
  if (model.agents() != n) throw DimensionError("run_online: model and graph disagree in size");
  const int theta_count = model.theta_count();
  auto check_theta = [&](Hypothesis h, const char* what) {
    if (h < 0 || h >= theta_count) throw std::invalid_argument(std::string(what) + " out of range");
  };
  check_theta(config.true_theta, "true_theta");
  check_theta(config.reference, "reference");
  for (std::size_t e = 0; e < config.schedule.size(); ++e) {
    const auto& ev = config.schedule[e];
    if (ev.step == 0) throw std::invalid_argument("schedule events start at step 1");
    if (e > 0 && ev.step <= config.schedule[e - 1].step) {
      throw std::invalid_argument("schedule steps must be strictly increasing");
    }
    if (ev.kind == EventKind::StateChange) check_theta(ev.new_theta, "schedule new_theta");
    if (ev.kind == EventKind::Churn && ev.period == 0) {
      throw std::invalid_argument("churn period must be positive");
    }
  }

  LearnerState learner = initial_learner(n, config.mu, config.delta, config.mode, config.reference);
  if (config.initial_estimate) {
    if (config.initial_estimate->rows() != static_cast<Eigen::Index>(n) ||
        config.initial_estimate->cols() != static_cast<Eigen::Index>(n)) {
      throw DimensionError("initial estimate has wrong shape");
    }
    learner.estimate = *config.initial_estimate;
  }

  std::vector<LogRatioMatrix> means;
  means.reserve(static_cast<std::size_t>(theta_count));
  for (Hypothesis h = 0; h < theta_count; ++h) {
    means.push_back(mean_likelihood_matrix(model, h, config.reference));
  }

  CombinationMatrix truth = a_star;
  Hypothesis true_theta = config.true_theta;
  RandomStream observations(derive_seed(config.seed, kObservationStream));
  const std::uint64_t topology_seed = derive_seed(config.seed, kTopologyStream);

  BeliefState beliefs = uniform_beliefs(n, theta_count);
  LogRatioMatrix lambda_prev = log_belief_matrix(beliefs, config.reference);

  MsdTrace trace;
  trace.msd.reserve(config.steps);
  trace.vote.reserve(config.steps);
  trace.true_theta.reserve(config.steps);
  trace.events.reserve(config.steps);

  for (std::size_t i = 1; i <= config.steps; ++i) {
    std::string marker;
    for (const auto& ev : config.schedule) {
      bool fires = ev.step == i;
      if (ev.kind == EventKind::Churn) fires = i >= ev.step && (i - ev.step) % ev.period == 0;
      if (!fires) continue;
      switch (ev.kind) {
        case EventKind::StateChange:
          true_theta = ev.new_theta;
          break;
        case EventKind::RegenerateEdges:
          truth = regenerate_edges(truth, config.edge_prob, derive_seed(topology_seed, i));
          break;
        case EventKind::Churn:
          truth = perturb_edges(truth, ev.flip_prob, derive_seed(topology_seed, i));
          break;
      }
      if (!marker.empty()) marker += ';';
      marker += to_string(ev.kind);
    }

    const ObservationBatch batch = sample_observations(model, true_theta, observations, i);
    beliefs = advance(beliefs, model, truth, batch, config.delta);
    LogRatioMatrix lambda_now = log_belief_matrix(beliefs, config.reference);
    if (!lambda_now.values.allFinite()) {
      throw Error("log-belief matrix overflowed at step " + std::to_string(i));
    }

    const std::vector<Hypothesis> estimates = estimate_states(beliefs);
    const Hypothesis vote = majority_vote(estimates);
    const Hypothesis assumed = learner.mode == LearnerMode::KnownState ? true_theta : vote;
    learner = ogl_update(learner, lambda_now, lambda_prev, means[static_cast<std::size_t>(assumed)]);

    trace.msd.push_back(msd(truth, learner.estimate));
    trace.vote.push_back(vote);
    trace.true_theta.push_back(true_theta);
    trace.events.push_back(std::move(marker));

    if (observer) {
      observer(StepRecord{i, beliefs, batch, lambda_now, vote, true_theta, truth, learner.estimate});
    }
    lambda_prev = std::move(lambda_now);
  }
  return OnlineResult{std::move(learner), std::move(trace), std::move(truth)};
}

SteadyStateBound steady_state_bound(const std::vector<Matrix>& lambda_samples,
                                    const std::vector<Matrix>& lr_samples, double delta,
                                    double mu) {
  if (lambda_samples.empty() || lr_samples.empty()) {
    throw std::invalid_argument("steady_state_bound: no samples");
  }
  const Eigen::Index n = lambda_samples.front().rows();
  if (lambda_samples.size() < static_cast<std::size_t>(n) ||
      lr_samples.size() < static_cast<std::size_t>(n)) {
    throw std::invalid_argument("steady_state_bound: need at least n samples");
  }
  Matrix lambda_moment = Matrix::Zero(n, n);
  for (const Matrix& l : lambda_samples) lambda_moment.noalias() += l * l.transpose();
  lambda_moment /= static_cast<double>(lambda_samples.size());

  Matrix lr_mean = Matrix::Zero(n, lr_samples.front().cols());
  for (const Matrix& l : lr_samples) lr_mean += l;
  lr_mean /= static_cast<double>(lr_samples.size());
  Matrix lr_cov = Matrix::Zero(n, n);
  for (const Matrix& l : lr_samples) {
    const Matrix c = l - lr_mean;
    lr_cov.noalias() += c * c.transpose();
  }
  lr_cov /= static_cast<double>(lr_samples.size());

  Eigen::SelfAdjointEigenSolver<Matrix> lambda_eig(lambda_moment, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Matrix> lr_eig(lr_cov, Eigen::EigenvaluesOnly);
  const double scale = (1.0 - delta) * (1.0 - delta);

  SteadyStateBound out;
  out.nu = scale * std::max(0.0, lambda_eig.eigenvalues().minCoeff());
  out.kappa = scale * std::max(0.0, lambda_eig.eigenvalues().maxCoeff());
  out.gamma = delta * delta * out.kappa * static_cast<double>(n) *
              std::max(0.0, lr_eig.eigenvalues().maxCoeff());
  out.alpha = 1.0 - 2.0 * mu * out.nu;
  if (out.nu > 0.0) out.bound = mu * mu * out.gamma / (1.0 - out.alpha);
  return out;
}

Adjacency threshold_edges(const Matrix& estimate, double tau_edge) {
  if (!(tau_edge >= 0.0)) throw std::invalid_argument("tau_edge must be nonnegative");
  return estimate.array() > tau_edge;
}

KMeansSupport kmeans_binarize(const Matrix& estimate) {
  if (estimate.rows() < 2) throw std::invalid_argument("kmeans_binarize: need n >= 2");
  KMeansSupport out;
  double low = estimate.minCoeff();
  double high = estimate.maxCoeff();
  if (low == high) {
    out.adjacency = Adjacency::Constant(estimate.rows(), estimate.cols(), false);
    out.degenerate = true;
    out.low_centroid = out.high_centroid = low;
    return out;
  }
  Adjacency assign = Adjacency::Constant(estimate.rows(), estimate.cols(), false);
  constexpr int kMaxIterations = 1000;
  for (int it = 0; it < kMaxIterations; ++it) {
    // Ties go to the low cluster.
    const Adjacency next = (estimate.array() - high).abs() < (estimate.array() - low).abs();
    double sum_high = 0.0, sum_low = 0.0;
    Eigen::Index count_high = 0, count_low = 0;
    for (Eigen::Index idx = 0; idx < estimate.size(); ++idx) {
      if (next(idx)) {
        sum_high += estimate(idx);
        ++count_high;
      } else {
        sum_low += estimate(idx);
        ++count_low;
      }
    }
    const bool stable = it > 0 && (next == assign).all();
    assign = next;
    if (count_high > 0) high = sum_high / static_cast<double>(count_high);
    if (count_low > 0) low = sum_low / static_cast<double>(count_low);
    if (stable) break;
  }
  out.adjacency = assign;
  out.low_centroid = low;
  out.high_centroid = high;
  return out;
}

double support_f1(const Adjacency& truth, const Adjacency& estimate) {
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols()) {
    throw DimensionError("support_f1: dimension mismatch");
  }
  const auto tp = static_cast<double>((truth && estimate).count());
  const auto denom = static_cast<double>(truth.count() + estimate.count());
  return denom == 0.0 ? 1.0 : 2.0 * tp / denom;
}

CombinationMatrix to_combination_matrix(const Matrix& estimate, double tau_edge) {
  if (estimate.rows() != estimate.cols()) throw DimensionError("estimate must be square");
  Matrix w = (estimate.array() > tau_edge).select(estimate, 0.0);
  for (Eigen::Index k = 0; k < w.cols(); ++k) {
    const double total = w.col(k).sum();
    if (total > 0.0) {
      w.col(k) /= total;
    } else {
      w.col(k).setZero();
      w(k, k) = 1.0;
    }
  }
  return CombinationMatrix(std::move(w));
}

}  // namespace asl
