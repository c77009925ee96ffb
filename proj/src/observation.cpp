#include "asl/observation.hpp"

#include "asl/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace asl {

LikelihoodModel::LikelihoodModel(std::vector<Matrix> tables) : tables_(std::move(tables)) {
  if (tables_.empty()) throw std::invalid_argument("likelihood model needs at least one agent");
  theta_count_ = static_cast<int>(tables_.front().rows());
  if (theta_count_ < 2) throw std::invalid_argument("likelihood model needs |Theta| >= 2");
  log_tables_.reserve(tables_.size());
  for (std::size_t k = 0; k < tables_.size(); ++k) {
    const Matrix& t = tables_[k];
    if (t.rows() != theta_count_ || t.cols() < 1) {
      throw std::invalid_argument("likelihood table " + std::to_string(k) + " has wrong shape");
    }
    if (!t.allFinite() || t.minCoeff() <= 0.0) {
      throw std::invalid_argument("likelihood table " + std::to_string(k) +
                                  " must be strictly positive");
    }
    for (Eigen::Index theta = 0; theta < t.rows(); ++theta) {
      if (std::abs(t.row(theta).sum() - 1.0) > kRowTolerance) {
        throw std::invalid_argument("likelihood row (" + std::to_string(k) + ", " +
                                    std::to_string(theta) + ") does not sum to 1");
      }
    }
    Matrix logs = t.array().log().matrix();
    for (Eigen::Index z = 0; z < logs.cols(); ++z) {
      bound_ = std::max(bound_, logs.col(z).maxCoeff() - logs.col(z).minCoeff());
    }
    log_tables_.push_back(std::move(logs));
  }
}

double kl_divergence(const LikelihoodModel& model, std::size_t k, Hypothesis theta_a,
                     Hypothesis theta_b) {
  double kl = 0.0;
  for (int z = 0; z < model.z_count(k); ++z) {
    kl += model.beta(k, z, theta_a) * (model.log_beta(k, z, theta_a) - model.log_beta(k, z, theta_b));
  }
  return kl;
}

bool is_identifiable(const LikelihoodModel& model, Hypothesis true_theta, double tolerance) {
  for (Hypothesis theta = 0; theta < model.theta_count(); ++theta) {
    if (theta == true_theta) continue;
    bool separated = false;
    for (std::size_t k = 0; k < model.agents() && !separated; ++k) {
      separated = kl_divergence(model, k, true_theta, theta) > tolerance;
    }
    if (!separated) return false;
  }
  return true;
}

LikelihoodModel generate_model(std::size_t n, int theta_count, int z_count, double epsilon,
                               std::uint64_t seed, Hypothesis true_theta, int max_attempts) {
  if (n < 1) throw std::invalid_argument("generate_model: need at least one agent");
  if (theta_count < 2) throw std::invalid_argument("generate_model: theta_count must be >= 2");
  if (z_count < 2) throw std::invalid_argument("generate_model: z_count must be >= 2");
  if (!(epsilon > 0.0 && epsilon < 1.0 / z_count)) {
    throw std::invalid_argument("generate_model: epsilon must be in (0, 1/z_count)");
  }
  if (true_theta < 0 || true_theta >= theta_count) {
    throw std::invalid_argument("generate_model: true_theta out of range");
  }
  RandomStream rng(seed);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::vector<Matrix> tables;
    tables.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
      Matrix t(theta_count, z_count);
      for (int theta = 0; theta < theta_count; ++theta) {
        // Normalized unit exponentials are uniform on the simplex.
        for (int z = 0; z < z_count; ++z) t(theta, z) = -std::log1p(-rng.uniform());
        t.row(theta) /= t.row(theta).sum();
        for (int z = 0; z < z_count; ++z) t(theta, z) = std::clamp(t(theta, z), epsilon, 1.0 - epsilon);
        t.row(theta) /= t.row(theta).sum();
      }
      tables.push_back(std::move(t));
    }
    LikelihoodModel model(std::move(tables));
    if (is_identifiable(model, true_theta)) return model;
  }
  throw BudgetExhausted("no identifiable likelihood model after " +
                        std::to_string(max_attempts) + " attempts");
}

ObservationBatch sample_observations(const LikelihoodModel& model, Hypothesis true_theta,
                                     RandomStream& rng, std::size_t time) {
  ObservationBatch batch;
  batch.time = time;
  batch.symbols.resize(model.agents());
  for (std::size_t k = 0; k < model.agents(); ++k) {
    const Matrix& t = model.table(k);
    if (t.cols() == 2) {
      batch.symbols[k] = rng.uniform() < t(true_theta, 0) ? 0 : 1;
    } else {
      const Eigen::RowVectorXd row = t.row(true_theta);
      batch.symbols[k] = rng.categorical({row.data(), static_cast<std::size_t>(row.size())});
    }
  }
  return batch;
}

LogRatioMatrix log_likelihood_ratio_matrix(const LikelihoodModel& model,
                                           const ObservationBatch& batch, Hypothesis theta0) {
  const auto n = static_cast<Eigen::Index>(model.agents());
  if (batch.symbols.size() != model.agents()) {
    throw DimensionError("observation batch does not match the agent count");
  }
  LogRatioMatrix out;
  out.reference = theta0;
  out.kind = LogRatioMatrix::Kind::LikelihoodRatio;
  out.values.resize(n, model.theta_count() - 1);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const int z = batch.symbols[ku];
    const double ref = model.log_beta(ku, z, theta0);
    for (Eigen::Index c = 0; c < out.values.cols(); ++c) {
      out.values(k, c) = ref - model.log_beta(ku, z, hypothesis_of_column(c, theta0));
    }
  }
  return out;
}

LogRatioMatrix mean_likelihood_matrix(const LikelihoodModel& model, Hypothesis assumed_theta,
                                      Hypothesis theta0) {
  const auto n = static_cast<Eigen::Index>(model.agents());
  LogRatioMatrix out;
  out.reference = theta0;
  out.kind = LogRatioMatrix::Kind::LikelihoodRatio;
  out.values.resize(n, model.theta_count() - 1);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const double ref = kl_divergence(model, ku, assumed_theta, theta0);
    for (Eigen::Index c = 0; c < out.values.cols(); ++c) {
      out.values(k, c) = kl_divergence(model, ku, assumed_theta, hypothesis_of_column(c, theta0)) - ref;
    }
  }
  return out;
}

double min_second_moment_eigenvalue(const LikelihoodModel& model, Hypothesis theta0,
                                    Hypothesis true_theta, std::size_t samples,
                                    RandomStream& rng) {
  const auto n = static_cast<Eigen::Index>(model.agents());
  if (samples < model.agents()) {
    throw std::invalid_argument("min_second_moment_eigenvalue: need at least n samples");
  }
  Matrix moment = Matrix::Zero(n, n);
  for (std::size_t s = 0; s < samples; ++s) {
    const auto batch = sample_observations(model, true_theta, rng, s);
    const Matrix l = log_likelihood_ratio_matrix(model, batch, theta0).values;
    moment.noalias() += l * l.transpose();
  }
  moment /= static_cast<double>(samples);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(moment, Eigen::EigenvaluesOnly);
  return std::max(0.0, solver.eigenvalues().minCoeff());
}

void save_model(const std::filesystem::path& path, const LikelihoodModel& model,
                Hypothesis true_theta) {
  nlohmann::json doc;
  doc["n"] = model.agents();
  doc["theta_count"] = model.theta_count();
  std::vector<int> z_counts;
  nlohmann::json beta = nlohmann::json::array();
  for (std::size_t k = 0; k < model.agents(); ++k) {
    z_counts.push_back(model.z_count(k));
    nlohmann::json rows = nlohmann::json::array();
    for (int theta = 0; theta < model.theta_count(); ++theta) {
      std::vector<double> row;
      for (int z = 0; z < model.z_count(k); ++z) row.push_back(model.beta(k, z, theta));
      rows.push_back(row);
    }
    beta.push_back(rows);
  }
  doc["z_counts"] = z_counts;
  doc["true_theta"] = true_theta;
  doc["beta"] = beta;
  doc["b"] = model.bound();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(1) << '\n';
}

ModelRecord load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    const auto doc = nlohmann::json::parse(in);
    const auto beta = doc.at("beta").get<std::vector<std::vector<std::vector<double>>>>();
    std::vector<Matrix> tables;
    for (const auto& rows : beta) {
      if (rows.empty()) throw IoError(path.string() + ": empty likelihood table");
      Matrix t(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
      for (std::size_t theta = 0; theta < rows.size(); ++theta) {
        if (rows[theta].size() != rows[0].size()) throw IoError(path.string() + ": ragged table");
        for (std::size_t z = 0; z < rows[theta].size(); ++z) {
          t(static_cast<Eigen::Index>(theta), static_cast<Eigen::Index>(z)) = rows[theta][z];
        }
      }
      tables.push_back(std::move(t));
    }
    return ModelRecord{LikelihoodModel(std::move(tables)), doc.at("true_theta").get<Hypothesis>()};
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace asl
