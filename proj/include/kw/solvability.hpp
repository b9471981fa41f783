#ifndef KW_SOLVABILITY_HPP
#define KW_SOLVABILITY_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kw/error.hpp"
#include "kw/monotone.hpp"
#include "kw/problem.hpp"
#include "kw/solve_report.hpp"

namespace kw {

enum class Verdict { Solvable, NotSolvable, GuaranteedRange, Unknown };

constexpr std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Solvable: return "Solvable";
    case Verdict::NotSolvable: return "NotSolvable";
    case Verdict::GuaranteedRange: return "GuaranteedRange";
    case Verdict::Unknown: return "Unknown";
  }
  return "Unknown";
}

struct ConditionCheck {
  std::string name;
  double value = 0.0;
  bool passed = false;
};

/// Closed interval [lo, hi] of c values. Success was observed (or is guaranteed) at hi;
/// at lo no solution was found, which is weaker than nonexistence.
struct ThresholdBracket {
  double lo = 0.0;
  double hi = 0.0;
};

struct SolvabilityVerdict {
  Verdict verdict = Verdict::Unknown;
  std::vector<ConditionCheck> reasons;
  std::optional<ThresholdBracket> threshold_bracket;

  /// GuaranteedRange carries an existence proof as well.
  bool expects_solution() const { return verdict == Verdict::Solvable || verdict == Verdict::GuaranteedRange; }
};

/// Decides solvability from the sign of c, the sign pattern of h and its mean. For c < 0 with h
/// positive somewhere the answer is only known inside the constructive range |c| <= C1(alpha*).
inline SolvabilityVerdict classify(const ProblemInstance& p) {
  if (p.h.cwiseAbs().maxCoeff() == 0.0) fail(ErrorCode::ZeroH, "h must not vanish identically");
  const double hbar = p.mean_h();
  const double hmax = p.h.maxCoeff();
  const double hmin = p.h.minCoeff();
  SolvabilityVerdict out;
  auto check = [&](std::string name, double value, bool passed) {
    out.reasons.push_back({std::move(name), value, passed});
    return passed;
  };

  if (p.c == 0.0) {
    const bool neg_mean = check("mean_h_negative", hbar, hbar < 0.0);
    const bool pos = check("h_positive_somewhere", hmax, hmax > 0.0);
    const bool neg = check("h_negative_somewhere", hmin, hmin < 0.0);
    out.verdict = (neg_mean && pos && neg) ? Verdict::Solvable : Verdict::NotSolvable;
    return out;
  }
  if (p.c > 0.0) {
    out.verdict = check("h_positive_somewhere", hmax, hmax > 0.0) ? Verdict::Solvable : Verdict::NotSolvable;
    return out;
  }

  if (!check("mean_h_negative", hbar, hbar < 0.0)) {
    out.verdict = Verdict::NotSolvable;
    return out;
  }
  if (check("h_nonpositive", hmax, hmax <= 0.0)) {
    out.verdict = Verdict::Solvable;
    return out;
  }
  const ConstructiveBound cb = constructive_bound(p.graph, p.h);
  if (check("within_constructive_bound", cb.value, std::abs(p.c) <= cb.value)) {
    out.verdict = Verdict::GuaranteedRange;
    return out;
  }
  out.verdict = Verdict::Unknown;
  out.threshold_bracket = ThresholdBracket{p.c, -cb.value};
  return out;
}

struct ThresholdOptions {
  int max_probes = 40;
  double resolution = 1e-3;  // relative to |c_hi|
  double c_min = -1e4;       // the search never probes below this
  double certificate_tol = 1e-8;
  SolveOptions solve;
};

struct ThresholdProbe {
  double c = 0.0;
  bool success = false;
  double residual_inf = 0.0;
  std::string failure;  // error code of a failed probe
};

struct ThresholdReport {
  /// hi is the smallest c with a certified solution; lo is the largest c probed below it where none was found.
  /// lo is empty when every probe down to c_min succeeded.
  double c_hi = 0.0;
  std::optional<double> c_lo;
  bool truncated = false;  // the search reached c_min without a failure
  bool monotone = true;    // every success lies above every failure
  std::vector<ThresholdProbe> probes;  // sorted by c
  double constructive_bound = 0.0;

  static constexpr std::string_view lo_label = "no solution found";
};

namespace detail {

inline ThresholdProbe probe_threshold(const ProblemInstance& base, double c, const ThresholdOptions& opts,
                                      const std::optional<VertexFunction>& warm, VertexFunction* solution) {
  ThresholdProbe probe;
  probe.c = c;
  const ProblemInstance p = with_c(base, c);
  try {
    SolveOptions so = opts.solve;
    so.tol = std::min(so.tol, opts.certificate_tol);
    const SolveReport r = solve_c_negative(p, so, warm);
    const Certificate cert = verify_solution(p, r.u);
    probe.residual_inf = cert.residual_inf;
    probe.success = cert.passes(opts.certificate_tol);
    if (probe.success && solution) *solution = r.u;
    if (!probe.success) probe.failure = std::string(to_string(ErrorCode::NoConvergence));
  } catch (const SolveFailure& e) {
    probe.residual_inf = e.best().residual_inf;
    probe.failure = std::string(to_string(e.code()));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::DimensionMismatch) throw;
    probe.residual_inf = std::numeric_limits<double>::infinity();
    probe.failure = std::string(to_string(e.code()));
  }
  return probe;
}

}  // namespace detail

/// Brackets c_-(h) from above by probing the c < 0 pipeline: expand downward by doubling from a
/// successful probe, then bisect until the bracket width is at most resolution * |c_hi|.
inline ThresholdReport estimate_threshold(const WeightedGraph& g, const VertexFunction& h,
                                          const ThresholdOptions& opts = {}) {
  check_aligned(g, h);
  if (!(opts.max_probes > 0) || !(opts.resolution > 0.0) || !(opts.c_min < 0.0))
    fail(ErrorCode::InvalidArgument, "threshold options out of range");
  if (!(mean(g, h) < 0.0)) fail(ErrorCode::MeanNotNegative, "threshold needs mean(h) < 0");
  if (!(h.maxCoeff() > 0.0))
    fail(ErrorCode::InvalidArgument, "h <= 0 has no finite threshold; use classify");

  const ProblemInstance base = make_problem(g, h, -1.0);
  ThresholdReport out;
  out.constructive_bound = constructive_bound(g, h).value;
  int budget = opts.max_probes;
  std::vector<std::pair<double, VertexFunction>> successes;

  auto nearest_warm = [&](double c) -> std::optional<VertexFunction> {
    if (successes.empty()) return std::nullopt;
    auto best = std::min_element(successes.begin(), successes.end(), [&](const auto& a, const auto& b) {
      return std::abs(a.first - c) < std::abs(b.first - c);
    });
    return best->second;
  };
  auto run = [&](double c) {
    --budget;
    VertexFunction u;
    ThresholdProbe probe = detail::probe_threshold(base, c, opts, nearest_warm(c), &u);
    if (probe.success) successes.emplace_back(c, std::move(u));
    out.probes.push_back(probe);
    return probe.success;
  };

  // First success: start inside the guaranteed range, then move toward 0.
  std::optional<double> hi;
  std::vector<double> seeds;
  if (out.constructive_bound > 0.0) seeds.push_back(std::max(-0.5 * out.constructive_bound, opts.c_min));
  for (double c = -1e-2; c > -1e-300 && seeds.size() < 12; c *= 1e-2) seeds.push_back(c);
  for (double c : seeds) {
    if (budget <= 0) break;
    if (run(c)) {
      hi = c;
      break;
    }
  }
  if (!hi) {
    std::sort(out.probes.begin(), out.probes.end(), [](const auto& a, const auto& b) { return a.c < b.c; });
    fail(ErrorCode::NoSuccessfulProbe, "no probe near 0 produced a certified solution",
         {{"probes", std::to_string(out.probes.size())}, {"closest_c", std::to_string(seeds.back())}});
  }

  // Expand downward.
  std::optional<double> lo;
  while (budget > 0 && !lo) {
    if (*hi <= opts.c_min) {
      out.truncated = true;
      break;
    }
    const double c = std::max(2.0 * *hi, opts.c_min);
    if (run(c)) hi = c;
    else lo = c;
  }

  // Bisect.
  while (budget > 0 && lo && (*hi - *lo) > opts.resolution * std::abs(*hi)) {
    const double c = 0.5 * (*lo + *hi);
    if (run(c)) hi = c;
    else lo = c;
  }

  out.c_hi = *hi;
  out.c_lo = lo;
  std::sort(out.probes.begin(), out.probes.end(), [](const auto& a, const auto& b) { return a.c < b.c; });
  bool seen_success = false;
  for (const auto& probe : out.probes) {
    if (probe.success) seen_success = true;
    else if (seen_success) out.monotone = false;
  }
  return out;
}

}  // namespace kw

#endif  // KW_SOLVABILITY_HPP
