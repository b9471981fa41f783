#ifndef KW_MONOTONE_HPP
#define KW_MONOTONE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kw/error.hpp"
#include "kw/functionals.hpp"
#include "kw/newton.hpp"
#include "kw/solve_report.hpp"
#include "kw/spectral.hpp"

// Sub/super-solution machinery for c < 0.

namespace kw {

namespace detail {

inline void require_negative_regime(const ProblemInstance& p) {
  if (!(p.c < 0.0)) fail(ErrorCode::InvalidArgument, "construction requires c < 0", {{"c", std::to_string(p.c)}});
  const double hbar = p.mean_h();
  if (!(hbar < 0.0))
    fail(ErrorCode::MeanNotNegative, "mean of h must be negative", {{"mean_h", std::to_string(hbar)}});
}

// Lu - h e^u + c, the defect in the lower/upper solution inequalities.
inline VertexFunction defect(const ProblemInstance& p, const VertexFunction& u) { return equation_residual(p, u); }

// Pointwise slack for the defect: rounding in Lu scales with |c| and the size of the terms.
inline double defect_slack(const ProblemInstance& p, const VertexFunction& u) {
  const double terms = std::abs(p.c) + sup_norm(apply_laplacian(p.graph, u)) +
                       sup_norm(VertexFunction(p.h.array() * u.array().exp()));
  return kDefaultCheckTolerance * (1.0 + terms);
}

}  // namespace detail

/// u0 = -alpha L^{-1}(h_- - mean h_-) - beta with alpha = |c| / mean(h_-) and
/// beta = ||alpha L^{-1}(h_- - mean h_-)||_inf - log(alpha) + 1 + extra_shift, so that e^{u0} < alpha.
inline VertexFunction build_lower_solution(const ProblemInstance& p, double extra_shift = 0.0) {
  detail::require_negative_regime(p);
  if (extra_shift < 0.0) fail(ErrorCode::InvalidArgument, "extra_shift must be nonnegative");
  const WeightedGraph& g = p.graph;
  const VertexFunction hneg = neg_part(p.h);
  const double hneg_bar = mean(g, hneg);
  const double alpha = std::abs(p.c) / hneg_bar;
  const VertexFunction v = -alpha * ComplementSolver(g).solve_projected(hneg);
  const double beta = sup_norm(v) - std::log(alpha) + 1.0 + extra_shift;
  VertexFunction u0 = v.array() - beta;

  const VertexFunction d = detail::defect(p, u0);
  if (!(d.maxCoeff() <= detail::defect_slack(p, u0)))
    fail(ErrorCode::ConstructionFailed, "lower-solution inequality violated",
         {{"max_defect", std::to_string(d.maxCoeff())}});
  return u0;
}

/// Largest guaranteed |c| of the upper-solution construction for h with a positive part:
/// h_N = max(h, -N), C = ||L^{-1}(h_N - mean h_N)||_inf, C1(alpha) = -2 alpha^2 e^{2 alpha C} C N - alpha mean(h_N).
struct ConstructiveBound {
  double truncation = 0.0;  // N
  double potential_sup = 0.0;  // C
  double alpha = 0.0;  // maximizer alpha*
  double value = 0.0;  // C1(alpha*)
  VertexFunction potential;  // L^{-1}(h_N - mean h_N)
};

inline ConstructiveBound constructive_bound(const WeightedGraph& g, const VertexFunction& h) {
  check_aligned(g, h);
  const double hbar = mean(g, h);
  if (!(hbar < 0.0)) fail(ErrorCode::MeanNotNegative, "mean of h must be negative", {{"mean_h", std::to_string(hbar)}});
  if (!(h.maxCoeff() > 0.0)) fail(ErrorCode::InvalidArgument, "constructive bound needs h positive somewhere");

  ConstructiveBound out;
  double n_trunc = 1.0;
  for (int k = 0; k < 2000; ++k, n_trunc *= 2.0) {
    if (mean(g, VertexFunction(h.cwiseMax(-n_trunc))) < 0.0) break;
  }
  const VertexFunction hn = h.cwiseMax(-n_trunc);
  const double hn_bar = mean(g, hn);
  out.truncation = n_trunc;
  out.potential = ComplementSolver(g).solve_projected(hn);
  out.potential_sup = sup_norm(out.potential);
  const double cc = out.potential_sup;

  auto c1 = [&](double a) { return -2.0 * a * a * std::exp(2.0 * a * cc) * cc * n_trunc - a * hn_bar; };

  // C1 is concave with C1(0) = 0 and C1'(0) = -mean(h_N) > 0; bracket its sign change.
  double hi = 1.0;
  while (c1(hi) >= 0.0 && hi < 1e300) hi *= 2.0;
  double lo = 0.0;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  double f1 = c1(x1);
  double f2 = c1(x2);
  for (int it = 0; it < 300 && (hi - lo) > 1e-15 * hi; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = c1(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = c1(x1);
    }
  }
  out.alpha = 0.5 * (lo + hi);
  out.value = c1(out.alpha);
  return out;
}

/// Result of the upper-solution construction. `u1` is empty when the construction does not cover c
/// (callers fall back to Newton); `bound` then carries C1(alpha*).
struct UpperSolution {
  std::optional<VertexFunction> u1;
  bool nonpositive_branch = false;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double truncation = std::numeric_limits<double>::quiet_NaN();
  double potential_sup = std::numeric_limits<double>::quiet_NaN();
  double bound = std::numeric_limits<double>::infinity();
  std::string note;

  bool guaranteed() const { return u1.has_value(); }
};

inline UpperSolution build_upper_solution(const ProblemInstance& p) {
  detail::require_negative_regime(p);
  const WeightedGraph& g = p.graph;
  UpperSolution out;

  if (!p.h_positive_somewhere()) {
    // h <= 0: with w = L^{-1}(h - mean h) and alpha = c / mean h, u1 = alpha (w - min_{h<0} w) + log alpha
    // has e^{u1} >= alpha wherever h < 0, hence L u1 - h e^{u1} = alpha (1 - e^{u1}/alpha) h - alpha mean h >= -c.
    out.nonpositive_branch = true;
    const VertexFunction w = ComplementSolver(g).solve_projected(p.h);
    const double alpha = p.c / p.mean_h();
    double wmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index x = 0; x < w.size(); ++x)
      if (p.h[x] < 0.0) wmin = std::min(wmin, w[x]);
    VertexFunction u1 = alpha * (w.array() - wmin) + std::log(alpha);
    if (p.h.maxCoeff() < 0.0) {
      // Strictly negative h also admits the constant upper solution log(c / max h); keep the pointwise minimum.
      u1 = u1.cwiseMin(std::log(p.c / p.h.maxCoeff()));
    }
    out.alpha = alpha;
    out.potential_sup = sup_norm(w);
    if (u1.maxCoeff() > detail::kMaxExponent) {
      out.note = "upper solution overflows double precision";
      return out;
    }
    const VertexFunction d = detail::defect(p, u1);
    if (!(d.minCoeff() >= -detail::defect_slack(p, u1)))
      fail(ErrorCode::ConstructionFailed, "upper-solution inequality violated",
           {{"min_defect", std::to_string(d.minCoeff())}});
    out.u1 = std::move(u1);
    return out;
  }

  const ConstructiveBound cb = constructive_bound(g, p.h);
  out.alpha = cb.alpha;
  out.truncation = cb.truncation;
  out.potential_sup = cb.potential_sup;
  out.bound = cb.value;
  if (!(std::abs(p.c) <= cb.value)) {
    out.note = "|c| exceeds the constructive bound C1(alpha*)";
    return out;
  }
  VertexFunction u1 = cb.alpha * (cb.potential.array() - cb.potential_sup) + std::log(cb.alpha);
  const VertexFunction d = detail::defect(p, u1);
  if (!(d.minCoeff() >= -detail::defect_slack(p, u1)))
    fail(ErrorCode::ConstructionFailed, "upper-solution inequality violated",
         {{"min_defect", std::to_string(d.minCoeff())}});
  out.u1 = std::move(u1);
  return out;
}

/// Ordered lower/upper solutions with the shift k = max(1, -h) e^{u1} of the monotone scheme.
struct SubSuperPair {
  VertexFunction lower;
  VertexFunction upper;
  VertexFunction shift;
  double lower_alpha = 0.0;
  double lower_extra_shift = 0.0;
  UpperSolution upper_info;
};

inline VertexFunction monotone_shift(const VertexFunction& h, const VertexFunction& upper) {
  return (-h).cwiseMax(1.0).cwiseProduct(upper.array().exp().matrix());
}

/// Smallest admissible shift for an upper solution u: max(-h e^u, e^{min u}). It satisfies both
/// k >= -h e^u and k >= e^{min u} and is pointwise below monotone_shift(h, u).
inline VertexFunction refreshed_shift(const VertexFunction& h, const VertexFunction& upper) {
  const VertexFunction e = upper.array().exp();
  return (-h).cwiseProduct(e).cwiseMax(std::exp(upper.minCoeff()));
}

/// Checks every SubSuperPair invariant; returns a description of the first violation.
inline std::optional<std::string> pair_violation(const ProblemInstance& p, const SubSuperPair& pair) {
  check_aligned(p.graph, pair.lower);
  check_aligned(p.graph, pair.upper);
  check_aligned(p.graph, pair.shift);
  if ((pair.lower - pair.upper).maxCoeff() > 0.0) return "lower solution exceeds upper solution";
  if (detail::defect(p, pair.lower).maxCoeff() > detail::defect_slack(p, pair.lower))
    return "lower-solution inequality violated";
  if (detail::defect(p, pair.upper).minCoeff() < -detail::defect_slack(p, pair.upper))
    return "upper-solution inequality violated";
  const VertexFunction eu1 = pair.upper.array().exp();
  const double rel = 1e-12;
  for (Eigen::Index x = 0; x < pair.shift.size(); ++x) {
    if (!(pair.shift[x] > 0.0)) return "shift is not positive";
    if (pair.shift[x] < eu1.minCoeff() * (1.0 - rel)) return "shift below e^{min u1}";
    if (pair.shift[x] < -p.h[x] * eu1[x] * (1.0 - rel)) return "shift below -h e^{u1}";
  }
  return std::nullopt;
}

/// Empty when the upper-solution construction does not cover c.
inline std::optional<SubSuperPair> build_sub_super_pair(const ProblemInstance& p) {
  UpperSolution upper = build_upper_solution(p);
  if (!upper.guaranteed()) return std::nullopt;
  SubSuperPair pair;
  pair.upper = *upper.u1;
  pair.lower = build_lower_solution(p);
  // Raising beta keeps u0 a lower solution, so shift it below u1.
  const double gap = (pair.lower - pair.upper).maxCoeff();
  if (gap > 0.0) {
    pair.lower_extra_shift = gap;
    pair.lower = build_lower_solution(p, gap);
    const double residual_gap = (pair.lower - pair.upper).maxCoeff();
    if (residual_gap > 0.0) {
      pair.lower_extra_shift += residual_gap;
      pair.lower.array() -= residual_gap;
    }
  }
  pair.lower_alpha = std::abs(p.c) / mean(p.graph, neg_part(p.h));
  pair.shift = monotone_shift(p.h, pair.upper);
  pair.upper_info = std::move(upper);
  if (auto why = pair_violation(p, pair)) fail(ErrorCode::ConstructionFailed, *why);
  return pair;
}

/// Called with (j, u_j) for every iterate, starting from u_1 = upper.
using IterateObserver = std::function<void(int, const VertexFunction&)>;

/// u_{j+1} = (L + k)^{-1}(h e^{u_j} - c + k u_j) from the upper solution. The increment form
/// u_{j+1} - u_j = (L + k)^{-1}(h e^{u_j} - c - L u_j) is used; it is the same iteration.
inline SolveReport monotone_solve(const ProblemInstance& p, const SubSuperPair& pair, double tol = 1e-10,
                                  int max_iter = 10000, const IterateObserver& observe = {}) {
  if (!(p.c < 0.0)) fail(ErrorCode::InvalidArgument, "monotone_solve requires c < 0");
  if (auto why = pair_violation(p, pair)) fail(ErrorCode::InvalidArgument, "invalid sub/super pair: " + *why);
  const WeightedGraph& g = p.graph;
  // Every iterate is again an upper solution: L u_{j+1} - f(u_{j+1}) = (h e^xi + k)(u_j - u_{j+1}) >= 0.
  // Monotonicity only needs k >= -h e^{u_j} and k > 0, so after the first step the shift is rebuilt from
  // the current iterate as refreshed_shift(h, u_j). Where h = 0 the factor e^{u1} would otherwise freeze
  // the iterate. Rebuilt again whenever u dropped by log 2 somewhere since the last rebuild.
  std::optional<ShiftedSolver> solver;
  solver.emplace(g, pair.shift);
  VertexFunction anchor = pair.upper;
  const double slack = 1e-12 * (1.0 + sup_norm(pair.upper));

  SolveReport report;
  report.method = Method::MonotoneCNeg;
  VertexFunction u = pair.upper;
  if (observe) observe(1, u);
  for (int j = 1; j <= max_iter; ++j) {
    if (j == 2 || (anchor - u).maxCoeff() >= std::log(2.0)) {
      anchor = u;
      solver.emplace(g, refreshed_shift(p.h, anchor));
    }
    const VertexFunction r = p.h.array() * u.array().exp() - p.c - apply_laplacian(g, u).array();
    const VertexFunction d = solver->solve(r);
    const VertexFunction next = u + d;
    const double step = sup_norm(d);
    report.trace.push_back({j, step, sup_norm(r)});
    report.iterations = j;
    if (d.maxCoeff() > slack || (next - pair.lower).minCoeff() < -slack) {
      report.u = next;
      attach_certificate(p, report);
      throw SolveFailure(ErrorCode::MonotonicityViolated, "monotone iteration left the order interval", report,
                         {{"iteration", std::to_string(j)},
                          {"max_increase", std::to_string(d.maxCoeff())},
                          {"min_above_lower", std::to_string((next - pair.lower).minCoeff())}});
    }
    u = next;
    if (observe) observe(j + 1, u);
    if (step <= tol) {
      report.u = u;
      attach_certificate(p, report);
      const double bound = 10.0 * tol * (1.0 + sup_norm(pair.shift));
      if (!(report.residual_inf <= bound))
        throw SolveFailure(ErrorCode::NoConvergence, "monotone limit residual above bound", report,
                           {{"residual_inf", std::to_string(report.residual_inf)}});
      return report;
    }
  }
  report.u = u;
  attach_certificate(p, report);
  throw SolveFailure(ErrorCode::NoConvergence, "monotone iteration hit the iteration limit", report,
                     {{"iterations", std::to_string(max_iter)}});
}

/// Full c < 0 pipeline: constructive pair + monotone iteration when available, otherwise Newton from
/// several starts (warm start, lower solution, zero, seeded random). Any returned report is certified at tol.
inline SolveReport solve_c_negative(const ProblemInstance& p, const SolveOptions& opts = {},
                                    const std::optional<VertexFunction>& warm_start = std::nullopt) {
  if (!(p.c < 0.0)) fail(ErrorCode::InvalidArgument, "solve_c_negative requires c < 0");
  const double hbar = p.mean_h();
  if (!(hbar < 0.0))
    fail(ErrorCode::NotSolvable, "c < 0 needs mean(h) < 0", {{"mean_h", std::to_string(hbar)}});

  if (auto pair = build_sub_super_pair(p)) {
    SolveReport report = monotone_solve(p, *pair, opts.tol, opts.monotone_max_iter);
    report.polish_iterations = detail::polish(p, report, opts.tol);
    return report;
  }

  std::vector<VertexFunction> starts;
  if (warm_start) starts.push_back(*warm_start);
  starts.push_back(build_lower_solution(p));
  starts.push_back(VertexFunction::Zero(p.h.size()));
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int s = 0; s < opts.random_starts; ++s) {
    VertexFunction r(p.h.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = dist(rng);
    starts.push_back(std::move(r));
  }

  std::optional<SolveReport> best;
  for (const auto& start : starts) {
    try {
      return newton_solve(p, start, opts.tol, opts.max_iter);
    } catch (const SolveFailure& failure) {
      if (!best || failure.best().residual_inf < best->residual_inf) best = failure.best();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularJacobian && e.code() != ErrorCode::NonFiniteValue) throw;
    }
  }
  SolveReport fallback = best.value_or(SolveReport{});
  throw SolveFailure(ErrorCode::NoConvergence, "no Newton start reached a certified solution", fallback,
                     {{"starts", std::to_string(starts.size())}});
}

}  // namespace kw

#endif  // KW_MONOTONE_HPP
