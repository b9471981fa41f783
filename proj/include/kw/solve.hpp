#ifndef KW_SOLVE_HPP
#define KW_SOLVE_HPP

#include <algorithm>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include "kw/error.hpp"
#include "kw/monotone.hpp"
#include "kw/newton.hpp"
#include "kw/solvability.hpp"
#include "kw/variational.hpp"

namespace kw {

enum class SolveMethod { Auto, Newton, Variational, Monotone };

inline SolveMethod parse_solve_method(std::string_view s) {
  if (s == "auto") return SolveMethod::Auto;
  if (s == "newton") return SolveMethod::Newton;
  if (s == "variational") return SolveMethod::Variational;
  if (s == "monotone") return SolveMethod::Monotone;
  fail(ErrorCode::InvalidArgument, "unknown method", {{"method", std::string(s)}});
}

/// Newton from the given start, or from 0 and then seeded random starts.
inline SolveReport newton_multistart(const ProblemInstance& p, const SolveOptions& opts,
                                     const std::optional<VertexFunction>& start = std::nullopt) {
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  std::optional<SolveReport> best;
  const int attempts = 1 + std::max(opts.random_starts, 0);
  for (int a = 0; a < attempts; ++a) {
    VertexFunction u0 = VertexFunction::Zero(p.h.size());
    if (a == 0 && start) u0 = *start;
    if (a > 0)
      for (Eigen::Index i = 0; i < u0.size(); ++i) u0[i] = dist(rng);
    try {
      return newton_solve(p, u0, opts.tol, opts.max_iter);
    } catch (const SolveFailure& e) {
      if (!best || e.best().residual_inf < best->residual_inf) best = e.best();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularJacobian && e.code() != ErrorCode::NonFiniteValue) throw;
    }
  }
  throw SolveFailure(ErrorCode::NoConvergence, "Newton did not converge from any start", best.value_or(SolveReport{}),
                     {{"starts", std::to_string(attempts)}});
}

/// Picks the regime's solver: variational for c = 0 and c > 0, sub/super-solutions for c < 0.
/// Instances that fail a necessary condition are rejected with NotSolvable before any iteration.
inline SolveReport solve(const ProblemInstance& p, const SolveOptions& opts = {},
                         SolveMethod method = SolveMethod::Auto) {
  if (!(opts.tol > 0.0)) fail(ErrorCode::InvalidArgument, "tol must be positive");
  if (method == SolveMethod::Newton) return newton_multistart(p, opts);

  const SolvabilityVerdict verdict = classify(p);
  if (verdict.verdict == Verdict::NotSolvable) {
    Error::Context ctx;
    for (const auto& r : verdict.reasons)
      if (!r.passed) ctx.emplace(r.name, std::to_string(r.value));
    fail(ErrorCode::NotSolvable, "a necessary condition for solvability fails", std::move(ctx));
  }

  if (method == SolveMethod::Monotone) {
    if (!(p.c < 0.0)) fail(ErrorCode::InvalidArgument, "monotone method requires c < 0");
    auto pair = build_sub_super_pair(p);
    if (!pair) fail(ErrorCode::ConstructionFailed, "c lies outside the constructive range");
    SolveReport report = monotone_solve(p, *pair, opts.tol, opts.monotone_max_iter);
    report.polish_iterations = detail::polish(p, report, opts.tol);
    return report;
  }
  if (p.c == 0.0) return solve_c_zero(p, opts.tol);
  if (p.c > 0.0) return solve_c_positive(p, opts.tol);
  if (method == SolveMethod::Variational) fail(ErrorCode::InvalidArgument, "variational method requires c >= 0");
  return solve_c_negative(p, opts);
}

}  // namespace kw

#endif  // KW_SOLVE_HPP
