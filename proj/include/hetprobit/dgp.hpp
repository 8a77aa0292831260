#pragma once

// Seeded data generating processes for the simulation experiments, plus
// the dataset/parameter transformation that moves the likelihood plateau
// away from the search region.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "hetprobit/model.hpp"
#include "hetprobit/rng.hpp"
#include "hetprobit/types.hpp"

namespace hetprobit {

enum class ZKind { BernoulliHalf, ContinuousNonneg };

struct DgpConfig {
  int n = 1000;
  int k1 = 3;
  int k2 = 2;
  double param_box = 5.0;        // model parameters drawn from U[-box, box]
  double crossover_lo = 0.20;
  double crossover_hi = 0.30;
  ZKind z_kind = ZKind::BernoulliHalf;
  int max_resamples = 10000;
  std::uint64_t seed = 0;
  // When set, gamma0 is pinned instead of sampled (k2 must match).
  std::optional<Eigen::VectorXd> fixed_gamma0;

  void validate() const {
    if (n < 1) throw ContractError("DgpConfig: n must be >= 1");
    if (k1 < 1) throw ContractError("DgpConfig: k1 must be >= 1");
    if (k2 < 0) throw ContractError("DgpConfig: k2 must be >= 0");
    if (max_resamples < 1) throw ContractError("DgpConfig: max_resamples must be >= 1");
    if (!(param_box > 0.0)) throw ContractError("DgpConfig: param_box must be > 0");
    if (!(0.0 <= crossover_lo && crossover_lo <= crossover_hi && crossover_hi <= 1.0))
      throw ContractError("DgpConfig: need 0 <= crossover_lo <= crossover_hi <= 1");
    if (fixed_gamma0 && fixed_gamma0->size() != k2)
      throw ContractError("DgpConfig: fixed_gamma0 length does not match k2");
  }

  // n=1000, dim(x)=3, dim(z)=2, Bernoulli(1/2) covariates, crossover in [0.20, 0.30]
  static DgpConfig het_paper(std::uint64_t seed) {
    DgpConfig cfg;
    cfg.seed = seed;
    return cfg;
  }

  // Heteroskedastic run with dim(gamma)=6 pinned to the published values.
  static DgpConfig het_gamma6(std::uint64_t seed) {
    DgpConfig cfg;
    cfg.k2 = 6;
    cfg.seed = seed;
    Eigen::VectorXd g(6);
    g << -0.6, 0.84, -0.69, -0.15, -0.16, 0.42;
    cfg.fixed_gamma0 = g;
    return cfg;
  }

  // Plain probit control: dim(beta)=5, no variance model, no crossover band.
  static DgpConfig probit_paper(std::uint64_t seed) {
    DgpConfig cfg;
    cfg.k1 = 5;
    cfg.k2 = 0;
    cfg.seed = seed;
    return cfg;
  }
};

struct SimulatedDataset {
  Dataset data;
  Eigen::VectorXd beta0;
  Eigen::VectorXd gamma0;
  double crossover = 0.0;
  int resamples_used = 0;  // rejected parameter/disturbance draws before acceptance

  ParamVector params() const { return ParamVector{beta0, gamma0}; }
};

namespace detail {

// Substream layout under one seed. Covariates use one stream per
// observation; each rejection attempt gets fresh parameter and
// per-observation disturbance streams.
inline constexpr std::uint64_t kCovStream = 0;
inline constexpr std::uint64_t kParamStream = std::uint64_t(1) << 40;
inline constexpr std::uint64_t kEpsStream = std::uint64_t(1) << 41;

inline Eigen::MatrixXd draw_covariates(const DgpConfig& cfg) {
  // Row i: k1-1 x-draws then k2 z-draws, all from substream i.
  Eigen::MatrixXd XZ(cfg.n, cfg.k1 + cfg.k2);
  for (int i = 0; i < cfg.n; ++i) {
    Rng rng = Rng::substream(cfg.seed, kCovStream + static_cast<std::uint64_t>(i));
    XZ(i, 0) = 1.0;
    for (int j = 1; j < cfg.k1; ++j) XZ(i, j) = rng.bernoulli_half() ? 1.0 : 0.0;
    for (int j = 0; j < cfg.k2; ++j) {
      XZ(i, cfg.k1 + j) = cfg.z_kind == ZKind::BernoulliHalf
                              ? (rng.bernoulli_half() ? 1.0 : 0.0)
                              : rng.uniform01();
    }
  }
  return XZ;
}

struct ParamDraw {
  Eigen::VectorXd beta0;
  Eigen::VectorXd gamma0;
};

// beta0 tail and gamma0 are U[-box, box]; the intercept is then solved so
// that the sample mean of x_i'beta0 is exactly zero.
inline ParamDraw draw_params(const DgpConfig& cfg, const Eigen::MatrixXd& X, int attempt) {
  Rng rng = Rng::substream(cfg.seed, kParamStream + static_cast<std::uint64_t>(attempt));
  ParamDraw out;
  out.beta0.resize(cfg.k1);
  out.beta0[0] = 0.0;
  for (int j = 1; j < cfg.k1; ++j)
    out.beta0[j] = rng.uniform(-cfg.param_box, cfg.param_box);
  out.beta0[0] = -(X * out.beta0).mean();
  if (cfg.fixed_gamma0) {
    out.gamma0 = *cfg.fixed_gamma0;
  } else {
    out.gamma0.resize(cfg.k2);
    for (int j = 0; j < cfg.k2; ++j)
      out.gamma0[j] = rng.uniform(-cfg.param_box, cfg.param_box);
  }
  return out;
}

}  // namespace detail

// One attempt of the simulation protocol: X has a leading column of ones
// and Bernoulli(1/2) columns; Z is Bernoulli(1/2) or U[0,1] per z_kind;
// eps_i ~ N(0, sd = exp(z_i'gamma0)); y_i = 1(x_i'beta0 + eps_i >= 0).
// The disturbance scale exp(z'gamma0) is the standard deviation, matching
// the likelihood being maximized. Parameters and disturbances are redrawn
// jointly until the crossover fraction lands in [crossover_lo, crossover_hi].
inline SimulatedDataset simulate_het(const DgpConfig& cfg) {
  cfg.validate();
  if (cfg.k2 < 1) throw ContractError("simulate_het: k2 must be >= 1");

  const Eigen::MatrixXd XZ = detail::draw_covariates(cfg);
  SimulatedDataset out;
  out.data.X = XZ.leftCols(cfg.k1);
  out.data.Z = XZ.rightCols(cfg.k2);
  out.data.y.resize(cfg.n);

  double lo_seen = 1.0, hi_seen = 0.0;
  for (int attempt = 0; attempt <= cfg.max_resamples; ++attempt) {
    const detail::ParamDraw draw = detail::draw_params(cfg, out.data.X, attempt);
    const Eigen::VectorXd xb = out.data.X * draw.beta0;
    const Eigen::VectorXd zg = out.data.Z * draw.gamma0;
    for (int i = 0; i < cfg.n; ++i) {
      Rng eps_rng = Rng::substream(
          cfg.seed, detail::kEpsStream +
                        static_cast<std::uint64_t>(attempt) * static_cast<std::uint64_t>(cfg.n) +
                        static_cast<std::uint64_t>(i));
      const double eps = eps_rng.normal() * std::exp(zg[i]);
      out.data.y[i] = (xb[i] + eps >= 0.0) ? 1.0 : 0.0;
    }
    const double c = crossover_fraction(out.data, draw.beta0);
    lo_seen = std::min(lo_seen, c);
    hi_seen = std::max(hi_seen, c);
    if (c >= cfg.crossover_lo && c <= cfg.crossover_hi) {
      out.beta0 = draw.beta0;
      out.gamma0 = draw.gamma0;
      out.crossover = c;
      out.resamples_used = attempt;
      return out;
    }
  }
  throw std::runtime_error(
      "simulate_het: crossover band [" + std::to_string(cfg.crossover_lo) + ", " +
      std::to_string(cfg.crossover_hi) + "] not reached after " +
      std::to_string(cfg.max_resamples + 1) + " draws (realized crossover ranged [" +
      std::to_string(lo_seen) + ", " + std::to_string(hi_seen) + "])");
}

// Probit control experiment: same X construction and intercept centering,
// eps ~ N(0,1), Z empty, no crossover rejection.
inline SimulatedDataset simulate_probit(const DgpConfig& cfg) {
  cfg.validate();
  if (cfg.k2 != 0) throw ContractError("simulate_probit: k2 must be 0");

  const Eigen::MatrixXd XZ = detail::draw_covariates(cfg);
  SimulatedDataset out;
  out.data.X = XZ;
  out.data.Z.resize(cfg.n, 0);
  out.data.y.resize(cfg.n);

  const detail::ParamDraw draw = detail::draw_params(cfg, out.data.X, 0);
  const Eigen::VectorXd xb = out.data.X * draw.beta0;
  for (int i = 0; i < cfg.n; ++i) {
    Rng eps_rng = Rng::substream(cfg.seed, detail::kEpsStream + static_cast<std::uint64_t>(i));
    out.data.y[i] = (xb[i] + eps_rng.normal() >= 0.0) ? 1.0 : 0.0;
  }
  out.beta0 = draw.beta0;
  out.gamma0.resize(0);
  out.crossover = crossover_fraction(out.data, out.beta0);
  out.resamples_used = 0;
  return out;
}

// Parameter leg of the transformation: T(beta, gamma) =
// (exp(-sum_j gamma_j / 2) * beta, gamma).
inline ParamVector transform_point(const ParamVector& p) {
  const double scale = std::exp(-0.5 * p.gamma.sum());
  return ParamVector{scale * p.beta, p.gamma};
}

// Dataset leg: y and X unchanged, every z_i shifted by -1/2 in each
// component. Together with transform_point this leaves every likelihood
// term unchanged: the 1/2 * 1'gamma factors cancel inside each a_i.
inline std::pair<Dataset, ParamVector> transform(const Dataset& d, const ParamVector& p0) {
  p0.require_match(d);
  if (d.k2() < 1) throw ContractError("transform: dataset has no variance model (k2 = 0)");
  Dataset td;
  td.y = d.y;
  td.X = d.X;
  td.Z = d.Z.array() - 0.5;
  return {std::move(td), transform_point(p0)};
}

}  // namespace hetprobit
