#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace asl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Directed support of a graph. Entry (l, k) is set when the edge l -> k exists.
using Adjacency = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Index of a hypothesis in 0..|Theta|-1.
using Hypothesis = int;

/// Base class of every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejection sampling ran out of attempts (strong connectivity or identifiability).
class BudgetExhausted : public Error {
 public:
  using Error::Error;
};

/// An iterative solver hit its iteration cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A node sequence contains a pair that is not an edge of the analyzed matrix.
class InvalidPath : public Error {
 public:
  using Error::Error;
};

/// The target cannot be reached from the source within the hop bound.
class NoPath : public Error {
 public:
  using Error::Error;
};

/// A configuration field is missing, malformed or out of range.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace asl
