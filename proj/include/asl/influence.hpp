#pragma once

#include "asl/graph.hpp"
#include "asl/log_ratio.hpp"
#include "asl/types.hpp"

#include <vector>

namespace asl {

/// A walk from nodes.front() to nodes.back() with its influence score.
struct InfluencePath {
  std::vector<int> nodes;
  double score = 0.0;

  std::size_t length() const { return nodes.empty() ? 0 : nodes.size() - 1; }
};

struct InfluenceEntry {
  int source = 0;
  double raw = 0.0;
  double normalized = 0.0;
};

/// Influence of every other agent on one target.
struct InfluenceMap {
  int target = 0;
  int horizon = 0;
  std::vector<InfluenceEntry> entries;  ///< ascending source, target excluded
  bool normalized = true;               ///< false when every raw value is zero
};

/// (|Theta| - 1) delta (1 - delta)^r times the product of the edge weights.
/// Throws InvalidPath when a consecutive pair is not a positive-weight edge.
double path_influence(const Matrix& a, const std::vector<int>& nodes, double delta,
                      int theta_count);

/// Sum of path_influence over all walks of length 0..d from l to k:
/// (|Theta| - 1) delta sum_r (1 - delta)^r [A^r]_{lk}.
double eta(const Matrix& a, int source, int target, int d, double delta, int theta_count);

/// eta for every source l != target, normalized by the largest value.
InfluenceMap influence_map(const Matrix& a, int target, int d, double delta, int theta_count);

/// Walk of at most d hops maximizing path_influence, via a shortest-path
/// search on the (node, hops) layered graph with edge cost
/// -log a - log(1 - delta). Ties go to fewer hops, then to the
/// lexicographically smaller node sequence. For source == target the single
/// node walk is returned. Throws NoPath when target is out of reach.
InfluencePath most_influential_path(const Matrix& a, int source, int target, int d,
                                    double delta, int theta_count);

/// Most influential paths into `target` from the `m` sources with the largest eta.
std::vector<InfluencePath> top_paths(const Matrix& a, int target, int d, double delta,
                                     int theta_count, std::size_t m = 5);

/// Closed-form and finite-difference sensitivities d[Lambda_i]_{k,j} / d[L_t]_{l,j}.
struct DerivativeCheck {
  Matrix closed_form;  ///< entry (l, k)
  Matrix numerical;    ///< entry (l, k)
};

/// Unrolls recursion_reference from `lambda0` over `lr_sequence` (L_1 .. L_i,
/// i = lr_sequence.size()) and compares with delta (1 - delta)^(i-t) [A^(i-t)]_{lk}.
/// Entries are taken in column `column` of the ratio matrices.
DerivativeCheck influence_derivative_check(const Matrix& a, const Matrix& lambda0,
                                           const std::vector<Matrix>& lr_sequence, std::size_t t,
                                           double delta, Eigen::Index column = 0,
                                           double h = 1e-6);

}  // namespace asl
