#pragma once

// Heteroskedastic probit log likelihood
//
//   l(beta, gamma | y, X, Z) = sum_i [ y_i ln Phi(a_i) + (1-y_i) ln(1 - Phi(a_i)) ],
//   a_i = x_i'beta / exp(z_i'gamma),
//
// its analytic gradient, the large-gamma plateau approximation, the
// -n ln 2 benchmark and the crossover count used by the data generator.

#include <cmath>
#include <cstdint>

#include "hetprobit/normal.hpp"
#include "hetprobit/types.hpp"

namespace hetprobit {

// Finite stand-in for -inf. Terms and sums saturate here instead of
// overflowing so that optimizers always see an orderable objective.
inline constexpr double kDegenerateFloor = -1.0e300;

// exp(z'gamma) is clamped into this range before dividing; plateau-region
// evaluations intentionally probe gammas far beyond any sane scale.
inline constexpr double kScaleMin = 1.0e-300;
inline constexpr double kScaleMax = 1.0e300;

namespace detail {

inline double clamp_scale(double zg) {
  double s = std::exp(zg);
  if (s < kScaleMin) return kScaleMin;
  if (s > kScaleMax) return kScaleMax;
  return s;
}

// One summand: y ln Phi(a) + (1-y) ln(1 - Phi(a)) with y in {0,1}.
inline double loglik_term(double y, double a) {
  return y == 1.0 ? log_norm_cdf(a) : log_norm_cdf(-a);
}

}  // namespace detail

inline LikelihoodEval log_likelihood(const Dataset& d, const ParamVector& p) {
  p.require_match(d);
  const Eigen::Index n = d.n();
  const Eigen::VectorXd xb = d.X * p.beta;
  const Eigen::VectorXd zg = d.k2() > 0 ? Eigen::VectorXd(d.Z * p.gamma)
                                        : Eigen::VectorXd::Zero(n);
  LikelihoodEval out;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = xb[i] / detail::clamp_scale(zg[i]);
    double t = detail::loglik_term(d.y[i], a);
    if (!(t > kDegenerateFloor)) {  // catches -inf, NaN and values past the floor
      t = kDegenerateFloor;
      out.degenerate = true;
    }
    sum += t;
    if (sum < kDegenerateFloor) {
      sum = kDegenerateFloor;
      out.degenerate = true;
    }
  }
  out.value = sum;
  out.normalized = sum / static_cast<double>(n);
  return out;
}

// Analytic gradient (d l/d beta, d l/d gamma). With s_i = exp(z_i'gamma)
// and w_i = phi(a_i) (y_i - Phi(a_i)) / (Phi(a_i)(1 - Phi(a_i))):
//
//   d l/d beta  =  sum_i (w_i / s_i) x_i
//   d l/d gamma = -sum_i  w_i a_i    z_i
//
// w_i is evaluated through the normal hazard rate, which keeps it finite
// and accurate deep in the tails where Phi and 1-Phi underflow.
inline Eigen::VectorXd gradient(const Dataset& d, const ParamVector& p) {
  p.require_match(d);
  const Eigen::Index n = d.n();
  const Eigen::Index k1 = d.k1(), k2 = d.k2();
  const Eigen::VectorXd xb = d.X * p.beta;
  const Eigen::VectorXd zg = k2 > 0 ? Eigen::VectorXd(d.Z * p.gamma)
                                    : Eigen::VectorXd::Zero(n);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(k1 + k2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = detail::clamp_scale(zg[i]);
    const double a = xb[i] / s;
    // y=1: w = phi(a)/Phi(a) = hazard(-a);  y=0: w = -phi(a)/(1-Phi(a)) = -hazard(a)
    const double w = d.y[i] == 1.0 ? norm_hazard(-a) : -norm_hazard(a);
    g.head(k1) += (w / s) * d.X.row(i).transpose();
    if (k2 > 0) g.tail(k2) -= (w * a) * d.Z.row(i).transpose();
  }
  return g;
}

// Value of the plateau approximation, plus a warning flag raised when Z has
// a negative entry (the approximation's derivation assumes Z >= 0).
struct PlateauApprox {
  double value = 0.0;
  bool z_negative_warning = false;
};

// Large-gamma limit of the log likelihood:
//
//   sum_{i: z_i = 0} [ y_i ln Phi(x_i'beta) + (1-y_i) ln(1 - Phi(x_i'beta)) ]
//   - ln 2 * |{ i : z_i != 0 }|
//
// Rows with z_i = 0 keep their probit term; every other row collapses to
// ln(1/2) once all gamma components are large and positive.
inline PlateauApprox plateau_approximation(const Dataset& d, const Eigen::VectorXd& beta) {
  if (beta.size() != d.k1())
    throw ContractError("plateau_approximation: beta length does not match X");
  if (!beta.allFinite())
    throw ContractError("plateau_approximation: non-finite beta component");
  PlateauApprox out;
  Eigen::Index nonzero_rows = 0;
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    bool zero_row = true;
    for (Eigen::Index j = 0; j < d.k2(); ++j) {
      const double zij = d.Z(i, j);
      if (zij < 0.0) out.z_negative_warning = true;
      if (zij != 0.0) zero_row = false;
    }
    if (zero_row) {
      out.value += detail::loglik_term(d.y[i], d.X.row(i).dot(beta));
    } else {
      ++nonzero_rows;
    }
  }
  out.value -= kLn2 * static_cast<double>(nonzero_rows);
  return out;
}

// The plateau benchmark -n ln 2: the log likelihood attained when every
// fitted probability equals 1/2. Normalized form is -ln 2 ~ -0.693.
inline double benchmark_value(std::int64_t n) {
  return -static_cast<double>(n) * kLn2;
}

inline double benchmark_value(const Dataset& d) {
  return benchmark_value(static_cast<std::int64_t>(d.n()));
}

// Fraction of observations whose outcome disagrees with the sign of the
// linear index: y_i != 1(x_i'beta0 >= 0).
inline double crossover_fraction(const Dataset& d, const Eigen::VectorXd& beta0) {
  if (beta0.size() != d.k1())
    throw ContractError("crossover_fraction: beta length does not match X");
  const Eigen::VectorXd xb = d.X * beta0;
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    const double predicted = xb[i] >= 0.0 ? 1.0 : 0.0;
    if (d.y[i] != predicted) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(d.n());
}

}  // namespace hetprobit
