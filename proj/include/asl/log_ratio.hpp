#pragma once

#include "asl/types.hpp"

namespace asl {

/// n x (|Theta| - 1) matrix of log ratios against a reference hypothesis.
///
/// Column c holds hypothesis c for c < reference and c + 1 otherwise, so the
/// non-reference hypotheses appear in ascending index order.
struct LogRatioMatrix {
  enum class Kind { BeliefRatio, LikelihoodRatio };

  Matrix values;
  Hypothesis reference = 0;
  Kind kind = Kind::BeliefRatio;

  Eigen::Index agents() const { return values.rows(); }
  Eigen::Index columns() const { return values.cols(); }
};

/// Hypothesis stored in column `column` of a ratio matrix with the given reference.
inline Hypothesis hypothesis_of_column(Eigen::Index column, Hypothesis reference) {
  const auto c = static_cast<Hypothesis>(column);
  return c < reference ? c : c + 1;
}

}  // namespace asl
