#pragma once

// Multi-start experiment runner: shared start sets across methods, distance
// and value-gap diagnostics against a reference point, log-scale histogram
// summaries, plateau detection, profile grids, original-vs-transformed
// comparison runs, terminal-point clustering, and the two-stage refit.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <map>
#include <numeric>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hetprobit/dgp.hpp"
#include "hetprobit/model.hpp"
#include "hetprobit/optimize.hpp"
#include "hetprobit/rng.hpp"
#include "hetprobit/types.hpp"

namespace hetprobit {

// Objective view of a dataset's log-likelihood. Captures `d` by reference;
// the dataset must outlive the returned object.
inline Objective make_likelihood_objective(const Dataset& d) {
  Objective obj;
  obj.value = [&d](const Eigen::VectorXd& v) {
    const LikelihoodEval e = log_likelihood(d, ParamVector::from_flat(v, d.k1(), d.k2()));
    return ObjectiveEval{e.value, e.degenerate};
  };
  obj.gradient = [&d](const Eigen::VectorXd& v) {
    return gradient(d, ParamVector::from_flat(v, d.k1(), d.k2()));
  };
  return obj;
}

// Thread count resolution order: explicit request, HETPROBIT_THREADS, then
// hardware concurrency. Always at least 1.
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("HETPROBIT_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

struct MultiStartConfig {
  int num_starts = 100;
  double start_box = 5.0;  // starts sampled coordinate-wise uniform on [-box, box]
  std::uint64_t seed = 0;
  std::vector<OptimizerSpec> methods;
  ParamVector reference;
  int threads = 0;  // 0 = resolve_threads fallback chain
  double plateau_delta = 0.05;
  double plateau_tau = 2.0;
  double cluster_radius = 0.5;

  void validate(const Dataset& d) const {
    if (num_starts < 1) throw ContractError("MultiStartConfig: num_starts must be >= 1");
    if (!(start_box > 0.0)) throw ContractError("MultiStartConfig: start_box must be > 0");
    if (methods.empty()) throw ContractError("MultiStartConfig: no methods given");
    for (const auto& m : methods) m.validate();
    reference.require_match(d);
  }
};

struct RunRecord {
  int start_index = 0;
  ParamVector start;
  OptimResult result;
  double normalized = 0.0;  // result.value / n
  double distance = 0.0;    // Euclidean distance of estimate to reference
  double value_gap = 0.0;   // [l(reference) - l(estimate)] / n
  bool better_than_reference = false;
  bool plateau = false;
};

// Sparse histogram over decadic log-scale bins: bin k covers
// [10^(k*step), 10^((k+1)*step)). Nonpositive or subnormal inputs are
// clamped to 1e-300 before binning; negative value gaps never reach the
// bins, they are pooled in the better-than-reference count.
struct LogHistogram {
  double step = 0.05;
  std::map<long, long> bins;
  long better_than_reference = 0;

  void add(double v, bool better) {
    if (better) {
      ++better_than_reference;
      return;
    }
    const double c = std::max(v, 1e-300);
    ++bins[static_cast<long>(std::floor(std::log10(c) / step))];
  }

  double bin_left(long k) const { return std::pow(10.0, static_cast<double>(k) * step); }
  double bin_right(long k) const { return std::pow(10.0, static_cast<double>(k + 1) * step); }

  long total() const {
    long t = better_than_reference;
    for (const auto& [k, c] : bins) t += c;
    return t;
  }
};

struct Quantiles {
  double min = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, max = 0.0;
};

struct StabilitySummary {
  int cluster_count = 0;
  std::vector<long> cluster_sizes;  // descending
  bool warning = false;             // >= 5% of runs end outside the largest cluster
};

struct MethodSummary {
  std::string method;
  Quantiles distance;
  Quantiles value_gap;
  long plateau_count = 0;
  long better_count = 0;
  long converged_count = 0;
  long degenerate_count = 0;
  StabilitySummary stability;
};

struct MethodReport {
  OptimizerSpec spec;
  std::vector<RunRecord> records;
  LogHistogram distance_hist{0.05, {}, 0};
  LogHistogram value_gap_hist{0.1, {}, 0};
  MethodSummary summary;
};

struct MultiStartReport {
  int num_starts = 0;
  double start_box = 0.0;
  std::uint64_t seed = 0;
  ParamVector reference;
  double reference_value = 0.0;
  double normalized_reference = 0.0;
  std::vector<Eigen::VectorXd> starts;  // shared by every method
  std::vector<MethodReport> methods;
};

// True iff the run sits on the likelihood plateau: normalized value within
// delta of -ln 2 and every variance coefficient above tau.
inline bool plateau_detect(const Dataset& d, const OptimResult& r, double delta = 0.05,
                           double tau = 2.0) {
  if (d.k2() < 1) throw ContractError("plateau_detect: dataset has no variance model (k2 = 0)");
  const double normalized = r.value / static_cast<double>(d.n());
  if (!(std::abs(normalized + kLn2) < delta)) return false;
  const Eigen::VectorXd gamma_hat = r.point.tail(d.k2());
  return gamma_hat.minCoeff() > tau;
}

namespace detail {

// Stream id bases for the harness's use of the master seed; disjoint from
// the generator's covariate/parameter/noise streams so a seed shared
// between `simulate` and `multistart` cannot alias.
inline constexpr std::uint64_t kStartStream = std::uint64_t(1) << 42;
inline constexpr std::uint64_t kRunSeedStream = std::uint64_t(1) << 43;

inline Quantiles quantiles(std::vector<double> v) {
  Quantiles q;
  if (v.empty()) return q;
  std::sort(v.begin(), v.end());
  const auto at = [&](double p) {
    const double idx = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(idx));
    const auto hi = std::min(lo + 1, v.size() - 1);
    const double frac = idx - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
  };
  q.min = v.front();
  q.q25 = at(0.25);
  q.median = at(0.50);
  q.q75 = at(0.75);
  q.max = v.back();
  return q;
}

// Single-linkage clusters of the records' terminal points.
inline StabilitySummary cluster_terminal_points(const std::vector<RunRecord>& records,
                                                double radius) {
  StabilitySummary s;
  const std::size_t n = records.size();
  if (n == 0) return s;
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  const auto find = [&](std::size_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  };
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((records[i].result.point - records[j].result.point).squaredNorm() <= r2) {
        const std::size_t a = find(i), b = find(j);
        if (a != b) parent[a] = b;
      }
    }
  std::map<std::size_t, long> sizes;
  for (std::size_t i = 0; i < n; ++i) ++sizes[find(i)];
  for (const auto& [root, count] : sizes) s.cluster_sizes.push_back(count);
  std::sort(s.cluster_sizes.begin(), s.cluster_sizes.end(), std::greater<>());
  s.cluster_count = static_cast<int>(s.cluster_sizes.size());
  // Instability warning: a non-trivial share of runs disagrees with the
  // dominant terminal cluster. A mass threshold (rather than a bare count
  // of clusters) keeps a single stray run from tripping the flag, while
  // still firing when the strays scatter instead of forming a second tight
  // cluster, which is how near-flat regions actually lose runs.
  const long outside = static_cast<long>(n) - s.cluster_sizes.front();
  s.warning = static_cast<double>(outside) >= 0.05 * static_cast<double>(n);
  return s;
}

inline std::vector<Eigen::VectorXd> sample_starts(const MultiStartConfig& cfg, Eigen::Index dim) {
  std::vector<Eigen::VectorXd> starts(static_cast<std::size_t>(cfg.num_starts));
  for (int i = 0; i < cfg.num_starts; ++i) {
    Rng rng = Rng::substream(cfg.seed, kStartStream + static_cast<std::uint64_t>(i));
    Eigen::VectorXd s(dim);
    for (Eigen::Index c = 0; c < dim; ++c) s[c] = rng.uniform(-cfg.start_box, cfg.start_box);
    starts[static_cast<std::size_t>(i)] = std::move(s);
  }
  return starts;
}

inline MultiStartReport run_multistart_impl(const Dataset& d, const MultiStartConfig& cfg,
                                            const std::vector<Eigen::VectorXd>* start_override) {
  cfg.validate(d);
  const Eigen::Index dim = d.k1() + d.k2();
  const auto n = static_cast<double>(d.n());

  MultiStartReport report;
  report.num_starts = cfg.num_starts;
  report.start_box = cfg.start_box;
  report.seed = cfg.seed;
  report.reference = cfg.reference;
  report.reference_value = log_likelihood(d, cfg.reference).value;
  report.normalized_reference = report.reference_value / n;
  report.starts = start_override ? *start_override : sample_starts(cfg, dim);
  if (static_cast<int>(report.starts.size()) != cfg.num_starts)
    throw ContractError("run_multistart: start set size does not match num_starts");
  for (const auto& s : report.starts)
    if (s.size() != dim) throw ContractError("run_multistart: start dimension mismatch");

  const Eigen::VectorXd ref_flat = cfg.reference.to_flat();
  const Objective objective = make_likelihood_objective(d);
  const std::size_t n_methods = cfg.methods.size();
  const std::size_t total = n_methods * static_cast<std::size_t>(cfg.num_starts);

  report.methods.resize(n_methods);
  for (std::size_t m = 0; m < n_methods; ++m) {
    report.methods[m].spec = cfg.methods[m];
    report.methods[m].records.resize(static_cast<std::size_t>(cfg.num_starts));
  }

  // Tasks are independent; records land in per-index slots so the outcome
  // does not depend on the execution schedule.
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  const auto worker = [&] {
    try {
      for (;;) {
        const std::size_t t = next.fetch_add(1);
        if (t >= total || failed.load()) return;
        const std::size_t m = t / static_cast<std::size_t>(cfg.num_starts);
        const std::size_t i = t % static_cast<std::size_t>(cfg.num_starts);
        OptimizerSpec spec = cfg.methods[m];
        spec.seed = derive_seed(cfg.seed, kRunSeedStream + t);
        RunRecord rec;
        rec.start_index = static_cast<int>(i);
        rec.start = ParamVector::from_flat(report.starts[i], d.k1(), d.k2());
        rec.result = maximize(objective, spec, report.starts[i]);
        rec.normalized = rec.result.value / n;
        rec.distance = (rec.result.point - ref_flat).norm();
        rec.value_gap = (report.reference_value - rec.result.value) / n;
        rec.better_than_reference = rec.value_gap < 0.0;
        rec.plateau = d.k2() >= 1 &&
                      plateau_detect(d, rec.result, cfg.plateau_delta, cfg.plateau_tau);
        report.methods[m].records[i] = std::move(rec);
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };

  const int n_threads = std::min<int>(resolve_threads(cfg.threads), static_cast<int>(total));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (auto& mr : report.methods) {
    std::vector<double> distances, gaps;
    distances.reserve(mr.records.size());
    gaps.reserve(mr.records.size());
    for (const auto& rec : mr.records) {
      mr.distance_hist.add(rec.distance, false);
      mr.value_gap_hist.add(rec.value_gap, rec.better_than_reference);
      distances.push_back(rec.distance);
      gaps.push_back(rec.value_gap);
      if (rec.plateau) ++mr.summary.plateau_count;
      if (rec.better_than_reference) ++mr.summary.better_count;
      if (rec.result.terminated == Termination::Converged) ++mr.summary.converged_count;
      if (rec.result.terminated == Termination::Degenerate) ++mr.summary.degenerate_count;
    }
    mr.summary.method = to_string(mr.spec.method);
    mr.summary.distance = quantiles(std::move(distances));
    mr.summary.value_gap = quantiles(std::move(gaps));
    mr.summary.stability = cluster_terminal_points(mr.records, cfg.cluster_radius);
  }
  return report;
}

}  // namespace detail

inline MultiStartReport run_multistart(const Dataset& d, const MultiStartConfig& cfg) {
  return detail::run_multistart_impl(d, cfg, nullptr);
}

// Terminal-point clustering per method; the warning mirrors the advice to
// distrust a fit whose restarts scatter across distant optima.
inline std::vector<StabilitySummary> stability_check(const Dataset& d, const MultiStartConfig& cfg,
                                                     double cluster_radius = 0.5) {
  if (cfg.num_starts < 2) throw ContractError("stability_check: needs num_starts >= 2");
  MultiStartConfig c = cfg;
  c.cluster_radius = cluster_radius;
  const MultiStartReport report = detail::run_multistart_impl(d, c, nullptr);
  std::vector<StabilitySummary> out;
  out.reserve(report.methods.size());
  for (const auto& mr : report.methods) out.push_back(mr.summary.stability);
  return out;
}

struct ProfileGrid {
  int j1 = 0, j2 = 1;  // indices into gamma
  Eigen::VectorXd axis1, axis2;
  Eigen::MatrixXd values;  // axis1.size() x axis2.size(), floored at clip_floor
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> clipped;
  double clip_floor = -10000.0;
  ParamVector base;
};

// Log-likelihood over a 2-D slice of the variance coefficients, all other
// coordinates pinned at `base`. Cells whose true value falls below
// `clip_floor` are stored at the floor and masked.
inline ProfileGrid profile_grid(const Dataset& d, const ParamVector& base, int j1, int j2,
                                std::pair<double, double> range1, std::pair<double, double> range2,
                                int resolution, double clip_floor = -10000.0) {
  base.require_match(d);
  if (j1 == j2 || j1 < 0 || j2 < 0 || j1 >= d.k2() || j2 >= d.k2())
    throw ContractError("profile_grid: bad gamma index pair");
  if (resolution < 2) throw ContractError("profile_grid: resolution must be >= 2");
  if (!(range1.second > range1.first) || !(range2.second > range2.first))
    throw ContractError("profile_grid: empty axis range");

  ProfileGrid grid;
  grid.j1 = j1;
  grid.j2 = j2;
  grid.clip_floor = clip_floor;
  grid.base = base;
  grid.axis1 = Eigen::VectorXd::LinSpaced(resolution, range1.first, range1.second);
  grid.axis2 = Eigen::VectorXd::LinSpaced(resolution, range2.first, range2.second);
  grid.values.resize(resolution, resolution);
  grid.clipped.resize(resolution, resolution);

  ParamVector p = base;
  for (int a = 0; a < resolution; ++a) {
    p.gamma[j1] = grid.axis1[a];
    for (int b = 0; b < resolution; ++b) {
      p.gamma[j2] = grid.axis2[b];
      const double v = log_likelihood(d, p).value;
      const bool clip = v < clip_floor;
      grid.values(a, b) = clip ? clip_floor : v;
      grid.clipped(a, b) = clip;
    }
  }
  return grid;
}

struct CompareReport {
  MultiStartReport original;
  MultiStartReport transformed;
};

// Same multi-start protocol on the original dataset and on its transformed
// twin; leg-2 reference and start points are the leg-1 ones pushed through
// transform_point, so the runs pair off one-to-one.
inline CompareReport compare_transformed(const SimulatedDataset& sim,
                                         const MultiStartConfig& cfg) {
  if (sim.data.k2() < 1)
    throw ContractError("compare_transformed: dataset has no variance model (k2 = 0)");
  MultiStartConfig cfg1 = cfg;
  cfg1.reference = sim.params();

  CompareReport pair;
  pair.original = detail::run_multistart_impl(sim.data, cfg1, nullptr);

  auto [td, tref] = transform(sim.data, sim.params());
  MultiStartConfig cfg2 = cfg;
  cfg2.reference = tref;
  std::vector<Eigen::VectorXd> tstarts;
  tstarts.reserve(pair.original.starts.size());
  for (const auto& s : pair.original.starts)
    tstarts.push_back(
        transform_point(ParamVector::from_flat(s, td.k1(), td.k2())).to_flat());
  pair.transformed = detail::run_multistart_impl(td, cfg2, &tstarts);
  return pair;
}

struct TwoStageResult {
  OptimResult stage1;
  bool triggered = false;  // stage 2 ran because stage 1 was plateau-flagged
  OptimResult final;       // the better stage by objective value
};

// Joint fit, then, when the joint estimate is plateau-flagged, a refit of
// the variance coefficients alone with the location part frozen at the
// stage-1 estimate and gamma restarted at zero.
inline TwoStageResult two_stage_fit(const Dataset& d, const OptimizerSpec& spec,
                                    const Eigen::VectorXd& start, double delta = 0.05,
                                    double tau = 2.0) {
  if (d.k2() < 1) throw ContractError("two_stage_fit: dataset has no variance model (k2 = 0)");
  const Objective joint = make_likelihood_objective(d);

  TwoStageResult out;
  out.stage1 = maximize(joint, spec, start);
  out.final = out.stage1;
  if (!plateau_detect(d, out.stage1, delta, tau)) return out;

  out.triggered = true;
  const Eigen::VectorXd beta_hat = out.stage1.point.head(d.k1());
  Objective gamma_only;
  gamma_only.value = [&d, &beta_hat](const Eigen::VectorXd& g) {
    ParamVector p{beta_hat, g};
    const LikelihoodEval e = log_likelihood(d, p);
    return ObjectiveEval{e.value, e.degenerate};
  };
  gamma_only.gradient = [&d, &beta_hat](const Eigen::VectorXd& g) {
    ParamVector p{beta_hat, g};
    return Eigen::VectorXd(gradient(d, p).tail(d.k2()));
  };
  OptimizerSpec spec2 = spec;
  spec2.seed = derive_seed(spec.seed, 1);
  const OptimResult stage2 = maximize(gamma_only, spec2, Eigen::VectorXd::Zero(d.k2()));

  if (stage2.value > out.stage1.value) {
    out.final = stage2;
    out.final.point.resize(d.k1() + d.k2());
    out.final.point << beta_hat, stage2.point;
  }
  out.final.iterations = out.stage1.iterations + stage2.iterations;
  out.final.evals = out.stage1.evals + stage2.evals;
  out.final.grad_evals = out.stage1.grad_evals + stage2.grad_evals;
  return out;
}

}  // namespace hetprobit
