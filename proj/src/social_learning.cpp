#include "asl/social_learning.hpp"

#include "asl/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace asl {

namespace {

BeliefState finish(Matrix log_mu, Matrix log_psi, std::size_t time) {
  BeliefState s;
  s.mu = log_mu.array().exp().matrix();
  s.psi = log_psi.array().exp().matrix();
  s.log_mu = std::move(log_mu);
  s.log_psi = std::move(log_psi);
  s.time = time;
  return s;
}

Matrix checked_log(const Matrix& p) {
  if (p.minCoeff() <= 0.0) throw std::invalid_argument("beliefs must be strictly positive");
  Matrix logs = p.array().log().matrix();
  normalize_log_rows(logs);
  return logs;
}

}  // namespace

void normalize_log_rows(Matrix& logs) {
  for (Eigen::Index k = 0; k < logs.rows(); ++k) {
    const double peak = logs.row(k).maxCoeff();
    const double lse = peak + std::log((logs.row(k).array() - peak).exp().sum());
    logs.row(k).array() -= lse;
  }
}

BeliefState uniform_beliefs(std::size_t n, int theta_count) {
  const Matrix logs = Matrix::Constant(static_cast<Eigen::Index>(n), theta_count,
                                       -std::log(static_cast<double>(theta_count)));
  return finish(logs, logs, 0);
}

BeliefState beliefs_from_public(const Matrix& psi0, const CombinationMatrix& a) {
  Matrix log_psi = checked_log(psi0);
  Matrix log_mu = combine_log(log_psi, a);
  return finish(std::move(log_mu), std::move(log_psi), 0);
}

Matrix adapt_log(const Matrix& log_mu, const LikelihoodModel& model,
                 const ObservationBatch& batch, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in (0, 1)");
  if (static_cast<std::size_t>(log_mu.rows()) != model.agents() ||
      batch.symbols.size() != model.agents() || log_mu.cols() != model.theta_count()) {
    throw DimensionError("adapt: beliefs, model and batch disagree in shape");
  }
  Matrix log_psi(log_mu.rows(), log_mu.cols());
  for (Eigen::Index k = 0; k < log_mu.rows(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const int z = batch.symbols[ku];
    for (Eigen::Index theta = 0; theta < log_mu.cols(); ++theta) {
      log_psi(k, theta) = delta * model.log_beta(ku, z, static_cast<Hypothesis>(theta)) +
                          (1.0 - delta) * log_mu(k, theta);
    }
  }
  normalize_log_rows(log_psi);
  return log_psi;
}

Matrix combine_log(const Matrix& log_psi, const CombinationMatrix& a) {
  if (static_cast<std::size_t>(log_psi.rows()) != a.size()) {
    throw DimensionError("combine: beliefs and combination matrix disagree in size");
  }
  Matrix log_mu = a.weights().transpose() * log_psi;
  normalize_log_rows(log_mu);
  return log_mu;
}

Matrix adapt_step(const BeliefState& state, const LikelihoodModel& model,
                  const ObservationBatch& batch, double delta) {
  return adapt_log(state.log_mu, model, batch, delta).array().exp().matrix();
}

Matrix combine_step(const Matrix& psi, const CombinationMatrix& a) {
  return combine_log(checked_log(psi), a).array().exp().matrix();
}

BeliefState advance(const BeliefState& state, const LikelihoodModel& model,
                    const CombinationMatrix& a, const ObservationBatch& batch, double delta) {
  Matrix log_psi = adapt_log(state.log_mu, model, batch, delta);
  Matrix log_mu = combine_log(log_psi, a);
  return finish(std::move(log_mu), std::move(log_psi), state.time + 1);
}

std::pair<BeliefState, ObservationBatch> step(const BeliefState& state,
                                              const LikelihoodModel& model,
                                              const CombinationMatrix& a, double delta,
                                              Hypothesis true_theta, RandomStream& rng) {
  ObservationBatch batch = sample_observations(model, true_theta, rng, state.time + 1);
  BeliefState next = advance(state, model, a, batch, delta);
  return {std::move(next), std::move(batch)};
}

LogRatioMatrix log_belief_matrix(const BeliefState& state, Hypothesis theta0) {
  const Eigen::Index t = state.hypotheses();
  if (theta0 < 0 || theta0 >= t) throw std::invalid_argument("reference hypothesis out of range");
  LogRatioMatrix out;
  out.reference = theta0;
  out.kind = LogRatioMatrix::Kind::BeliefRatio;
  out.values.resize(state.agents(), t - 1);
  for (Eigen::Index c = 0; c < t - 1; ++c) {
    out.values.col(c) = state.log_psi.col(theta0) - state.log_psi.col(hypothesis_of_column(c, theta0));
  }
  return out;
}

LogRatioMatrix recursion_reference(const LogRatioMatrix& prev_lambda, const Matrix& a,
                                   const LogRatioMatrix& batch_lr, double delta) {
  if (a.rows() != a.cols() || a.rows() != prev_lambda.agents() ||
      prev_lambda.agents() != batch_lr.agents() ||
      prev_lambda.columns() != batch_lr.columns()) {
    throw DimensionError("recursion_reference: dimension mismatch");
  }
  LogRatioMatrix out;
  out.reference = prev_lambda.reference;
  out.kind = LogRatioMatrix::Kind::BeliefRatio;
  out.values = (1.0 - delta) * a.transpose() * prev_lambda.values + delta * batch_lr.values;
  return out;
}

Hypothesis estimate_state_agent(const BeliefState& state, Eigen::Index k) {
  if (k < 0 || k >= state.agents()) throw std::out_of_range("agent index out of range");
  Eigen::Index best = 0;
  for (Eigen::Index theta = 1; theta < state.hypotheses(); ++theta) {
    if (state.log_psi(k, theta) > state.log_psi(k, best)) best = theta;
  }
  return static_cast<Hypothesis>(best);
}

std::vector<Hypothesis> estimate_states(const BeliefState& state) {
  std::vector<Hypothesis> out(static_cast<std::size_t>(state.agents()));
  for (Eigen::Index k = 0; k < state.agents(); ++k) {
    out[static_cast<std::size_t>(k)] = estimate_state_agent(state, k);
  }
  return out;
}

Hypothesis majority_vote(std::span<const Hypothesis> estimates) {
  if (estimates.empty()) throw std::invalid_argument("majority_vote: no estimates");
  const Hypothesis top = *std::max_element(estimates.begin(), estimates.end());
  std::vector<int> counts(static_cast<std::size_t>(top) + 1, 0);
  for (Hypothesis h : estimates) {
    if (h < 0) throw std::invalid_argument("majority_vote: negative hypothesis");
    ++counts[static_cast<std::size_t>(h)];
  }
  // max_element returns the first maximum, i.e. the lowest index.
  return static_cast<Hypothesis>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

LogBeliefEnvelope::LogBeliefEnvelope(const CombinationMatrix& a, const Matrix& lambda0,
                                     double delta, double bound)
    : a_transpose_(a.weights().transpose()),
      envelope_(lambda0.cwiseAbs()),
      delta_(delta),
      bound_(bound) {}

void LogBeliefEnvelope::advance() {
  envelope_ = (1.0 - delta_) * a_transpose_ * envelope_;
  envelope_.array() += delta_ * bound_;
  ++time_;
}

}  // namespace asl
