#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace hetprobit {

// Thrown when an argument violates an operation's contract
// (dimension mismatch, non-finite input, malformed configuration).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A binary-choice dataset: outcomes y in {0,1}, choice-model design X
// (n x k1) and variance-model design Z (n x k2). k2 == 0 encodes the
// plain probit model, i.e. exp(z'gamma) == 1 for every row.
struct Dataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  Eigen::MatrixXd Z;

  Eigen::Index n() const { return y.size(); }
  Eigen::Index k1() const { return X.cols(); }
  Eigen::Index k2() const { return Z.cols(); }

  void validate() const {
    if (y.size() < 1) throw ContractError("Dataset: needs at least one observation");
    if (X.rows() != y.size() || Z.rows() != y.size())
      throw ContractError("Dataset: row counts of y, X, Z disagree");
    if (X.cols() < 1) throw ContractError("Dataset: X needs at least one column");
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (y[i] != 0.0 && y[i] != 1.0)
        throw ContractError("Dataset: y[" + std::to_string(i) + "] is not 0 or 1");
    }
    if (!X.allFinite() || !Z.allFinite())
      throw ContractError("Dataset: X or Z contains a non-finite entry");
  }
};

// A point (beta, gamma) in parameter space. Optimizers work on the flat
// concatenation [beta; gamma]; from_flat/to_flat convert between the two.
struct ParamVector {
  Eigen::VectorXd beta;
  Eigen::VectorXd gamma;

  Eigen::Index dim() const { return beta.size() + gamma.size(); }

  Eigen::VectorXd to_flat() const {
    Eigen::VectorXd flat(dim());
    flat << beta, gamma;
    return flat;
  }

  static ParamVector from_flat(const Eigen::VectorXd& flat, Eigen::Index k1, Eigen::Index k2) {
    if (flat.size() != k1 + k2)
      throw ContractError("ParamVector::from_flat: length " + std::to_string(flat.size()) +
                          " does not split into " + std::to_string(k1) + "+" + std::to_string(k2));
    return ParamVector{flat.head(k1), flat.tail(k2)};
  }

  void require_match(const Dataset& d) const {
    if (beta.size() != d.k1() || gamma.size() != d.k2())
      throw ContractError("ParamVector: dimensions (" + std::to_string(beta.size()) + "," +
                          std::to_string(gamma.size()) + ") do not match dataset (" +
                          std::to_string(d.k1()) + "," + std::to_string(d.k2()) + ")");
    if (!beta.allFinite() || !gamma.allFinite())
      throw ContractError("ParamVector: non-finite component");
  }
};

// Value of the log likelihood at one point. `degenerate` marks evaluations
// where at least one term hit the underflow floor; the value is then the
// saturated finite sentinel rather than a faithful sum.
struct LikelihoodEval {
  double value = 0.0;
  double normalized = 0.0;
  bool degenerate = false;
};

}  // namespace hetprobit
