#pragma once

// Four maximizers over one objective contract: BFGS and Fletcher-Reeves
// conjugate gradients (both with a strong-Wolfe line search), Nelder-Mead,
// and simulated annealing. Maximization runs as minimization of the
// negated objective. Degenerate evaluations (the likelihood's underflow
// sentinel, or any non-finite value) are mapped to a huge finite penalty
// so they are orderable but never accepted over a finite incumbent.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hetprobit/rng.hpp"
#include "hetprobit/types.hpp"

namespace hetprobit {

enum class Method { BFGS, CG, NelderMead, SANN };

enum class Termination { Converged, MaxIter, Budget, Degenerate };

struct SannSettings {
  double initial_temp = 10.0;
  double proposal_scale = 1.0;
  int eval_budget = 10000;
};

struct OptimizerSpec {
  Method method = Method::BFGS;
  int max_iter = 0;  // 0 = method default: 500 for BFGS/CG, 2000 for Nelder-Mead
  double f_tol = 1e-8;
  double g_tol = 1e-6;
  SannSettings sann;
  std::uint64_t seed = 0;  // consumed by SANN only
  bool record_trace = false;

  int resolved_max_iter() const {
    if (max_iter > 0) return max_iter;
    return method == Method::NelderMead ? 2000 : 500;
  }

  void validate() const {
    if (!(f_tol > 0.0) || !(g_tol > 0.0))
      throw ContractError("OptimizerSpec: tolerances must be > 0");
    if (max_iter < 0) throw ContractError("OptimizerSpec: max_iter must be >= 0");
    if (sann.eval_budget < 1) throw ContractError("OptimizerSpec: sann.eval_budget must be >= 1");
    if (!(sann.initial_temp >= 0.0) || !(sann.proposal_scale > 0.0))
      throw ContractError("OptimizerSpec: bad SANN settings");
  }
};

struct ObjectiveEval {
  double value = 0.0;
  bool degenerate = false;
};

// Type-erased objective. `gradient` may be left empty for the
// derivative-free methods (Nelder-Mead, SANN).
struct Objective {
  std::function<ObjectiveEval(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
};

struct OptimResult {
  Eigen::VectorXd point;
  double value = 0.0;  // objective (not negated) at point
  int iterations = 0;
  long evals = 0;
  long grad_evals = 0;
  Termination terminated = Termination::MaxIter;
  bool degenerate_point = false;
  std::vector<std::pair<int, double>> trace;  // (iteration, best value so far)
};

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::MaxIter: return "max_iter";
    case Termination::Budget: return "budget";
    case Termination::Degenerate: return "degenerate";
  }
  return "?";
}

inline const char* to_string(Method m) {
  switch (m) {
    case Method::BFGS: return "bfgs";
    case Method::CG: return "cg";
    case Method::NelderMead: return "neldermead";
    case Method::SANN: return "sann";
  }
  return "?";
}

namespace detail {

inline constexpr double kPenalty = 1.0e300;

struct MinEval {
  double f = kPenalty;  // negated objective, degenerate mapped to +kPenalty
  bool degenerate = true;
};

// Counting adapter presenting the minimization view of the objective.
class Evaluator {
 public:
  explicit Evaluator(const Objective& obj) : obj_(&obj) {}

  MinEval value(const Eigen::VectorXd& x) {
    ++evals;
    const ObjectiveEval e = obj_->value(x);
    if (e.degenerate || !std::isfinite(e.value)) return {kPenalty, true};
    return {-e.value, false};
  }

  Eigen::VectorXd grad(const Eigen::VectorXd& x) {
    ++grad_evals;
    return -obj_->gradient(x);
  }

  bool has_gradient() const { return static_cast<bool>(obj_->gradient); }

  long evals = 0;
  long grad_evals = 0;

 private:
  const Objective* obj_;
};

struct LineSearchOutcome {
  bool ok = false;
  Eigen::VectorXd x;
  MinEval fx;
  Eigen::VectorXd g;
};

// Strong-Wolfe line search (sufficient decrease c1, curvature c2) with a
// doubling bracket phase and bisection zoom. Gradients are only evaluated
// at points that already satisfy sufficient decrease, so degenerate trial
// points never reach the gradient.
inline LineSearchOutcome wolfe_line_search(Evaluator& ev, const Eigen::VectorXd& x0, double f0,
                                           const Eigen::VectorXd& g0, const Eigen::VectorXd& dir,
                                           double c1, double c2) {
  LineSearchOutcome out;
  const double dphi0 = g0.dot(dir);
  if (!(dphi0 < 0.0) || !std::isfinite(dphi0)) return out;

  const auto eval_at = [&](double alpha, MinEval& fe, Eigen::VectorXd& x) {
    x = x0 + alpha * dir;
    fe = ev.value(x);
  };
  const auto armijo_ok = [&](double alpha, double f) { return f <= f0 + c1 * alpha * dphi0; };
  const auto accept = [&](double /*alpha*/, Eigen::VectorXd&& x, MinEval fe, Eigen::VectorXd&& g) {
    out.ok = true;
    out.x = std::move(x);
    out.fx = fe;
    out.g = std::move(g);
  };

  double a_prev = 0.0, f_prev = f0;
  double alpha = 1.0;
  double a_lo = 0.0, f_lo = f0, a_hi = 0.0, f_hi = 0.0;
  bool bracketed = false;

  for (int trial = 0; trial < 25 && !bracketed; ++trial) {
    MinEval fe;
    Eigen::VectorXd x;
    eval_at(alpha, fe, x);
    if (!armijo_ok(alpha, fe.f) || (trial > 0 && fe.f >= f_prev)) {
      a_lo = a_prev;
      f_lo = f_prev;
      a_hi = alpha;
      f_hi = fe.f;
      bracketed = true;
      break;
    }
    Eigen::VectorXd g = ev.grad(x);
    const double dphi = g.dot(dir);
    if (std::abs(dphi) <= -c2 * dphi0) {
      accept(alpha, std::move(x), fe, std::move(g));
      return out;
    }
    if (dphi >= 0.0) {
      a_lo = alpha;
      f_lo = fe.f;
      a_hi = a_prev;
      f_hi = f_prev;
      bracketed = true;
      break;
    }
    a_prev = alpha;
    f_prev = fe.f;
    alpha *= 2.0;
    if (alpha > 1e10) return out;
  }
  if (!bracketed) return out;

  // zoom: a_lo always satisfies sufficient decrease (or is 0)
  for (int trial = 0; trial < 50; ++trial) {
    const double a_mid = 0.5 * (a_lo + a_hi);
    if (std::abs(a_hi - a_lo) <= 1e-14 * std::max(1.0, std::abs(a_lo)) || a_mid == a_lo ||
        a_mid == a_hi)
      break;
    MinEval fe;
    Eigen::VectorXd x;
    eval_at(a_mid, fe, x);
    if (!armijo_ok(a_mid, fe.f) || fe.f >= f_lo) {
      a_hi = a_mid;
      f_hi = fe.f;
      continue;
    }
    Eigen::VectorXd g = ev.grad(x);
    const double dphi = g.dot(dir);
    if (std::abs(dphi) <= -c2 * dphi0) {
      accept(a_mid, std::move(x), fe, std::move(g));
      return out;
    }
    if (dphi * (a_hi - a_lo) >= 0.0) {
      a_hi = a_lo;
      f_hi = f_lo;
    }
    a_lo = a_mid;
    f_lo = fe.f;
  }

  // Interval collapsed without meeting the curvature condition. Settle for
  // the sufficient-decrease point if one was found; the caller skips the
  // quasi-Newton update when curvature is missing.
  if (a_lo > 0.0 && armijo_ok(a_lo, f_lo) && f_lo < f0) {
    MinEval fe;
    Eigen::VectorXd x;
    eval_at(a_lo, fe, x);
    Eigen::VectorXd g = ev.grad(x);
    accept(a_lo, std::move(x), fe, std::move(g));
  }
  return out;
}

struct TraceRecorder {
  bool enabled = false;
  double best = std::numeric_limits<double>::infinity();  // minimization view
  std::vector<std::pair<int, double>>* sink = nullptr;

  void record(int iter, double f) {
    best = std::min(best, f);
    if (enabled) sink->push_back({iter, best == kPenalty ? -kPenalty : -best});
  }
};

inline OptimResult finish(Evaluator& ev, Eigen::VectorXd point, MinEval fe, int iterations,
                          Termination reason, std::vector<std::pair<int, double>> trace) {
  OptimResult r;
  r.point = std::move(point);
  r.value = fe.degenerate ? -kPenalty : -fe.f;
  r.iterations = iterations;
  r.evals = ev.evals;
  r.grad_evals = ev.grad_evals;
  r.degenerate_point = fe.degenerate;
  r.terminated = fe.degenerate ? Termination::Degenerate : reason;
  r.trace = std::move(trace);
  return r;
}

inline OptimResult bfgs_or_cg(const Objective& obj, const OptimizerSpec& spec,
                              const Eigen::VectorXd& start, bool use_bfgs) {
  Evaluator ev(obj);
  if (!ev.has_gradient())
    throw ContractError("maximize: BFGS/CG require an objective gradient");
  const Eigen::Index dim = start.size();
  const double c1 = 1e-4;
  const double c2 = use_bfgs ? 0.9 : 0.1;

  Eigen::VectorXd x = start;
  MinEval fx = ev.value(x);
  if (fx.degenerate) return finish(ev, std::move(x), fx, 0, Termination::Degenerate, {});
  Eigen::VectorXd g = ev.grad(x);

  Eigen::MatrixXd H;  // BFGS inverse-Hessian approximation
  if (use_bfgs) H = Eigen::MatrixXd::Identity(dim, dim);
  Eigen::VectorXd dir = -g;
  int since_restart = 0;

  std::vector<std::pair<int, double>> trace;
  TraceRecorder rec{spec.record_trace, std::numeric_limits<double>::infinity(), &trace};
  rec.record(0, fx.f);

  const int max_iter = spec.resolved_max_iter();
  int iter = 0;
  Termination reason = Termination::MaxIter;
  while (iter < max_iter) {
    ++iter;
    if (g.lpNorm<Eigen::Infinity>() <= spec.g_tol) {
      reason = Termination::Converged;
      --iter;
      break;
    }

    if (use_bfgs) {
      dir = -(H * g);
    } else if (since_restart >= dim || dir.size() == 0) {
      dir = -g;
      since_restart = 0;
    }
    if (g.dot(dir) >= 0.0) {  // not a descent direction for -l: restart
      dir = -g;
      since_restart = 0;
      if (use_bfgs) H.setIdentity();
    }

    LineSearchOutcome ls = wolfe_line_search(ev, x, fx.f, g, dir, c1, c2);
    if (!ls.ok) {
      const bool was_steepest = (dir.array() == (-g).array()).all();
      if (was_steepest) break;  // repeated failure: give up with max_iter reason
      dir = -g;
      since_restart = 0;
      if (use_bfgs) H.setIdentity();
      ls = wolfe_line_search(ev, x, fx.f, g, dir, c1, c2);
      if (!ls.ok) break;
    }

    const Eigen::VectorXd s = ls.x - x;
    const Eigen::VectorXd yv = ls.g - g;
    const double f_old = fx.f;
    x = std::move(ls.x);
    fx = ls.fx;
    const Eigen::VectorXd g_new = std::move(ls.g);

    if (use_bfgs) {
      const double sy = s.dot(yv);
      if (sy > 1e-10 * s.norm() * yv.norm()) {
        const Eigen::VectorXd Hy = H * yv;
        const double rho = 1.0 / sy;
        H.noalias() += (rho * rho * yv.dot(Hy) + rho) * (s * s.transpose());
        H.noalias() -= rho * (Hy * s.transpose() + s * Hy.transpose());
      }
    } else {
      const double beta_fr = g_new.squaredNorm() / g.squaredNorm();
      dir = -g_new + beta_fr * dir;
      ++since_restart;
    }
    g = g_new;
    rec.record(iter, fx.f);

    if (f_old - fx.f <= spec.f_tol * (std::abs(f_old) + spec.f_tol)) {
      reason = Termination::Converged;
      break;
    }
  }
  return finish(ev, std::move(x), fx, iter, reason, std::move(trace));
}

inline OptimResult nelder_mead(const Objective& obj, const OptimizerSpec& spec,
                               const Eigen::VectorXd& start) {
  Evaluator ev(obj);
  const Eigen::Index dim = start.size();
  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;

  MinEval f0 = ev.value(start);
  if (f0.degenerate) return finish(ev, start, f0, 0, Termination::Degenerate, {});

  std::vector<Eigen::VectorXd> v(dim + 1, start);
  std::vector<MinEval> fv(dim + 1);
  fv[0] = f0;
  for (Eigen::Index j = 0; j < dim; ++j) {
    v[j + 1][j] += std::max(0.1, 0.1 * std::abs(start[j]));
    fv[j + 1] = ev.value(v[j + 1]);
  }

  std::vector<std::pair<int, double>> trace;
  TraceRecorder rec{spec.record_trace, std::numeric_limits<double>::infinity(), &trace};

  std::vector<Eigen::Index> order(dim + 1);
  const auto sort_order = [&] {
    for (Eigen::Index i = 0; i <= dim; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return fv[a].f < fv[b].f; });
  };

  const int max_iter = spec.resolved_max_iter();
  int iter = 0;
  Termination reason = Termination::MaxIter;
  while (iter < max_iter) {
    ++iter;
    sort_order();
    const Eigen::Index best = order[0], worst = order[dim], second = order[dim - 1];
    rec.record(iter, fv[best].f);

    if (fv[worst].f - fv[best].f < spec.f_tol * (std::abs(fv[best].f) + 1.0)) {
      reason = Termination::Converged;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index i = 0; i <= dim; ++i)
      if (i != worst) centroid += v[i];
    centroid /= static_cast<double>(dim);

    const Eigen::VectorXd xr = centroid + kReflect * (centroid - v[worst]);
    const MinEval fr = ev.value(xr);

    if (fr.f < fv[best].f) {
      const Eigen::VectorXd xe = centroid + kExpand * (centroid - v[worst]);
      const MinEval fe = ev.value(xe);
      if (fe.f < fr.f) {
        v[worst] = xe;
        fv[worst] = fe;
      } else {
        v[worst] = xr;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr.f < fv[second].f) {
      v[worst] = xr;
      fv[worst] = fr;
      continue;
    }

    bool shrink = false;
    if (fr.f < fv[worst].f) {  // outside contraction
      const Eigen::VectorXd xc = centroid + kContract * (xr - centroid);
      const MinEval fc = ev.value(xc);
      if (fc.f <= fr.f) {
        v[worst] = xc;
        fv[worst] = fc;
      } else {
        shrink = true;
      }
    } else {  // inside contraction
      const Eigen::VectorXd xc = centroid + kContract * (v[worst] - centroid);
      const MinEval fc = ev.value(xc);
      if (fc.f < fv[worst].f) {
        v[worst] = xc;
        fv[worst] = fc;
      } else {
        shrink = true;
      }
    }
    if (shrink) {
      for (Eigen::Index i = 0; i <= dim; ++i) {
        if (i == order[0]) continue;
        v[i] = v[order[0]] + kShrink * (v[i] - v[order[0]]);
        fv[i] = ev.value(v[i]);
      }
    }
  }
  sort_order();
  return finish(ev, v[order[0]], fv[order[0]], iter, reason, std::move(trace));
}

inline OptimResult sann(const Objective& obj, const OptimizerSpec& spec,
                        const Eigen::VectorXd& start) {
  Evaluator ev(obj);
  const Eigen::Index dim = start.size();

  Eigen::VectorXd x = start;
  MinEval fx = ev.value(x);
  if (fx.degenerate) return finish(ev, std::move(x), fx, 0, Termination::Degenerate, {});

  Eigen::VectorXd best = x;
  MinEval fbest = fx;

  std::vector<std::pair<int, double>> trace;
  TraceRecorder rec{spec.record_trace, std::numeric_limits<double>::infinity(), &trace};
  rec.record(0, fx.f);

  Rng rng(spec.seed);
  Eigen::VectorXd proposal(dim);
  int steps = 0;
  // Logarithmic cooling schedule T_j = T0 / ln(j + e), Metropolis acceptance.
  for (int j = 1; ev.evals < spec.sann.eval_budget; ++j) {
    ++steps;
    const double temp = spec.sann.initial_temp / std::log(static_cast<double>(j) + std::numbers::e);
    for (Eigen::Index c = 0; c < dim; ++c)
      proposal[c] = x[c] + spec.sann.proposal_scale * rng.normal();
    const MinEval fp = ev.value(proposal);
    const double delta = fx.f - fp.f;  // > 0 means improvement
    bool take = delta > 0.0;
    if (!take && !fp.degenerate) {
      const double u = rng.uniform01();
      take = temp > 0.0 && u < std::exp(delta / temp);
    }
    if (!take && fp.degenerate && fx.degenerate) take = true;  // keep walking off the floor
    if (take) {
      x = proposal;
      fx = fp;
      if (fx.f < fbest.f) {
        best = x;
        fbest = fx;
      }
    }
    rec.record(j, fbest.f);
  }
  return finish(ev, std::move(best), fbest, steps, Termination::Budget, std::move(trace));
}

}  // namespace detail

// Run the method selected by `spec` from `start`. The returned value is the
// objective re-evaluated at the returned point (stored, not recomputed).
inline OptimResult maximize(const Objective& obj, const OptimizerSpec& spec,
                            const Eigen::VectorXd& start) {
  spec.validate();
  if (!obj.value) throw ContractError("maximize: objective has no value function");
  if (start.size() < 1 || !start.allFinite())
    throw ContractError("maximize: start point must be finite and nonempty");
  switch (spec.method) {
    case Method::BFGS: return detail::bfgs_or_cg(obj, spec, start, true);
    case Method::CG: return detail::bfgs_or_cg(obj, spec, start, false);
    case Method::NelderMead: return detail::nelder_mead(obj, spec, start);
    case Method::SANN: return detail::sann(obj, spec, start);
  }
  throw ContractError("maximize: unknown method");
}

}  // namespace hetprobit
