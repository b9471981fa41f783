#ifndef KW_NEWTON_HPP
#define KW_NEWTON_HPP

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "kw/error.hpp"
#include "kw/functionals.hpp"
#include "kw/solve_report.hpp"
#include "kw/spectral.hpp"

namespace kw {

namespace detail {

// Exponents above this overflow e^u in double precision.
inline constexpr double kMaxExponent = 700.0;

inline double weighted_norm(const VertexFunction& m, const VertexFunction& f) {
  return std::sqrt((f.array().square() * m.array()).sum());
}

// Solves (A - M diag(h e^u) + eps M) d = rhs, escalating eps from 0 to 1e-12, 1e-11, ...
inline Eigen::VectorXd regularized_newton_step(const Eigen::MatrixXd& jac, const VertexFunction& m,
                                               const Eigen::VectorXd& rhs) {
  double eps = 0.0;
  while (eps <= 1e6) {
    Eigen::MatrixXd k = jac;
    k.diagonal() += eps * m;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(k);
    if (ldlt.info() == Eigen::Success && ldlt.rcond() > 1e-14) {
      Eigen::VectorXd d = ldlt.solve(rhs);
      if (d.allFinite() && (k * d - rhs).norm() <= 1e-8 * (rhs.norm() + 1e-300) + 1e-14) return d;
    }
    eps = (eps == 0.0) ? 1e-12 : eps * 10.0;
  }
  fail(ErrorCode::SingularJacobian, "Jacobian singular even after regularization");
}

}  // namespace detail

/// Damped Newton for F(u) = Lu + c - h e^u with Jacobian L - diag(h e^u).
inline SolveReport newton_solve(const ProblemInstance& p, const VertexFunction& u_init, double tol = 1e-10,
                                int max_iter = 200) {
  check_aligned(p.graph, u_init);
  if (!(tol > 0.0)) fail(ErrorCode::InvalidArgument, "tol must be positive");
  const WeightedGraph& g = p.graph;
  const VertexFunction& m = g.measure();
  const Eigen::MatrixXd a = laplacian_matrix(g);

  SolveReport report;
  report.method = Method::Newton;
  report.u = u_init;
  VertexFunction f = equation_residual(p, report.u);
  double merit = detail::weighted_norm(m, f);
  if (!std::isfinite(merit)) fail(ErrorCode::NonFiniteValue, "initial guess overflows e^u");

  SolveReport best = report;
  double best_merit = merit;

  for (int it = 0;; ++it) {
    attach_certificate(p, report);
    report.iterations = it;
    report.trace.push_back({it, merit, report.residual_inf});
    if (merit < best_merit || it == 0) {
      best = report;
      best_merit = merit;
    }
    if (report.certified(tol)) return report;
    if (it >= max_iter) break;

    // Symmetric form: (A - M diag(h e^u)) d = -M F.
    Eigen::MatrixXd jac = a;
    jac.diagonal() -= m.cwiseProduct(p.h).cwiseProduct(report.u.array().exp().matrix());
    const Eigen::VectorXd d = detail::regularized_newton_step(jac, m, -m.cwiseProduct(f));

    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
      const VertexFunction trial = report.u + t * d;
      if (trial.maxCoeff() > detail::kMaxExponent) continue;
      const VertexFunction ft = equation_residual(p, trial);
      const double mt = detail::weighted_norm(m, ft);
      if (std::isfinite(mt) && mt <= (1.0 - 1e-4 * t) * merit) {
        report.u = trial;
        f = ft;
        merit = mt;
        accepted = true;
        break;
      }
    }
    report.trace.back().step = accepted ? t : 0.0;
    if (!accepted) break;
    if (sup_norm(report.u) > detail::kMaxExponent) break;
  }
  throw SolveFailure(ErrorCode::NoConvergence, "Newton did not reach the residual tolerance", best,
                     {{"best_residual_inf", std::to_string(best.residual_inf)}});
}

namespace detail {

/// Newton polish of a nearly converged iterate. Returns the number of steps taken.
inline int polish(const ProblemInstance& p, SolveReport& report, double tol) {
  attach_certificate(p, report);
  if (report.certified(tol)) return 0;
  try {
    SolveReport refined = newton_solve(p, report.u, tol, 50);
    report.u = refined.u;
    attach_certificate(p, report);
    return refined.iterations;
  } catch (const SolveFailure&) {
    throw SolveFailure(ErrorCode::NoConvergence, "result could not be polished to tolerance", report,
                       {{"residual_inf", std::to_string(report.residual_inf)}});
  }
}

}  // namespace detail

}  // namespace kw

#endif  // KW_NEWTON_HPP
