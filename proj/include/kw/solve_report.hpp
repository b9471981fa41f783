#ifndef KW_SOLVE_REPORT_HPP
#define KW_SOLVE_REPORT_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kw/error.hpp"
#include "kw/functionals.hpp"
#include "kw/problem.hpp"

namespace kw {

enum class Method { VariationalC0, VariationalCPos, MonotoneCNeg, Newton };

constexpr std::string_view to_string(Method m) {
  switch (m) {
    case Method::VariationalC0: return "VariationalC0";
    case Method::VariationalCPos: return "VariationalCPos";
    case Method::MonotoneCNeg: return "MonotoneCNeg";
    case Method::Newton: return "Newton";
  }
  return "Unknown";
}

/// One iteration of a solver. Fields that a method does not track are NaN.
struct TraceEntry {
  int iteration = 0;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
  double energy = std::numeric_limits<double>::quiet_NaN();
  double step = std::numeric_limits<double>::quiet_NaN();
};

/// Lagrange multipliers of the variational methods; sigma is the shift with u = w + sigma.
struct Multipliers {
  std::optional<double> lambda;
  std::optional<double> mu;
  std::optional<double> sigma;
};

/// Numbers certifying a candidate solution.
struct Certificate {
  double residual_inf = 0.0;           // ||Lu + c - h e^u||_inf
  double integral_identity_gap = 0.0;  // |<h e^u, 1> - c m(X)|
  /// residual_inf / max(|c|, ||h e^u||_inf, ||Lu||_inf). Rejects the spurious near-roots that appear
  /// when u drifts to -infinity with c = 0. When that scale is at least 1e3 times the evaluation
  /// roundoff floor, the part of the residual below the floor is not counted: Lu is a difference of
  /// O(|u|) terms. Near-roots from drift have residual comparable to the scale and stay rejected.
  double relative_residual = 0.0;

  bool passes(double tol) const { return residual_inf <= tol && relative_residual <= tol; }
};

/// Estimate of the floating-point error of evaluating F(u): 8 eps max_x (|c| + |h e^u| + (|L||u|)(x)).
inline double residual_roundoff_floor(const ProblemInstance& p, const VertexFunction& u, const VertexFunction& heu) {
  const WeightedGraph& g = p.graph;
  double worst = 0.0;
  for (std::size_t x = 0; x < g.size(); ++x) {
    const auto xi = static_cast<Eigen::Index>(x);
    double acc = 0.0;
    for (const auto& nb : g.neighbors(x))
      acc += nb.weight * (std::abs(u[xi]) + std::abs(u[static_cast<Eigen::Index>(nb.index)]));
    worst = std::max(worst, std::abs(p.c) + std::abs(heu[xi]) + acc / g.measure()[xi]);
  }
  return 8.0 * std::numeric_limits<double>::epsilon() * worst;
}

inline Certificate verify_solution(const ProblemInstance& p, const VertexFunction& u) {
  check_aligned(p.graph, u);
  Certificate cert;
  const VertexFunction lu = apply_laplacian(p.graph, u);
  const VertexFunction heu = p.h.array() * u.array().exp();
  const VertexFunction f = lu.array() + p.c - heu.array();
  cert.residual_inf = sup_norm(f);
  cert.integral_identity_gap = std::abs(heu.dot(p.graph.measure()) - p.c * p.graph.total_measure());
  const double scale = std::max({std::abs(p.c), sup_norm(heu), sup_norm(lu)});
  const double floor = residual_roundoff_floor(p, u, heu);
  const double counted = scale >= 1e3 * floor ? std::max(0.0, cert.residual_inf - floor) : cert.residual_inf;
  cert.relative_residual = scale > 0.0 ? counted / scale : std::numeric_limits<double>::infinity();
  if (!f.allFinite()) {
    cert.residual_inf = cert.relative_residual = std::numeric_limits<double>::infinity();
  }
  return cert;
}

struct SolveReport {
  VertexFunction u;
  double residual_inf = 0.0;
  double relative_residual = 0.0;
  double integral_identity_gap = 0.0;
  Method method = Method::Newton;
  int iterations = 0;
  /// Newton steps applied after the main method to tighten the residual.
  int polish_iterations = 0;
  Multipliers multipliers;
  std::vector<TraceEntry> trace;
  /// Constant C_w of the a-posteriori coercivity witness (c > 0 only).
  std::optional<double> coercivity_constant;

  Certificate certificate() const { return {residual_inf, integral_identity_gap, relative_residual}; }
  bool certified(double tol) const { return certificate().passes(tol); }
};

inline void attach_certificate(const ProblemInstance& p, SolveReport& report) {
  const Certificate cert = verify_solution(p, report.u);
  report.residual_inf = cert.residual_inf;
  report.relative_residual = cert.relative_residual;
  report.integral_identity_gap = cert.integral_identity_gap;
}

/// A solver gave up; carries the best iterate it reached.
class SolveFailure : public Error {
 public:
  SolveFailure(ErrorCode code, const std::string& message, SolveReport best, Context context = {})
      : Error(code, message, std::move(context)), best_(std::move(best)) {}

  const SolveReport& best() const noexcept { return best_; }

 private:
  SolveReport best_;
};

/// Defaults shared by the solvers.
struct SolveOptions {
  double tol = 1e-10;
  int max_iter = 200;
  int monotone_max_iter = 10000;
  unsigned long long seed = 0;
  int random_starts = 4;
};

}  // namespace kw

#endif  // KW_SOLVE_REPORT_HPP
