#ifndef KW_VARIATIONAL_HPP
#define KW_VARIATIONAL_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "kw/error.hpp"
#include "kw/functionals.hpp"
#include "kw/newton.hpp"
#include "kw/solve_report.hpp"
#include "kw/spectral.hpp"

namespace kw {

namespace detail {

/// Orthonormal (Euclidean) basis of {v : <v, 1>_m = 0}, as columns.
inline Eigen::MatrixXd mean_zero_basis(const VertexFunction& m) {
  const Eigen::Index n = m.size();
  if (n <= 1) return Eigen::MatrixXd(n, 0);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr{Eigen::MatrixXd(m)};
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  return q.rightCols(n - 1);
}

struct LocalModel {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

struct MinimizeResult {
  VertexFunction v;
  int iterations = 0;
  bool converged = false;
};

/// Minimizes a smooth function over v0 + range(z) by Newton steps on a shifted Hessian with
/// Armijo backtracking. `value` may return +inf outside the domain.
template <class Value, class Model, class OnIterate>
MinimizeResult damped_newton_minimize(const Eigen::MatrixXd& z, VertexFunction v, Value&& value, Model&& model,
                                      double grad_tol, int max_iter, OnIterate&& on_iterate) {
  if (z.cols() == 0) return {v, 0, true};
  for (int it = 0; it < max_iter; ++it) {
    const LocalModel q = model(v);
    const Eigen::VectorXd gy = z.transpose() * q.gradient;
    if (gy.lpNorm<Eigen::Infinity>() <= grad_tol) return {v, it, true};

    const Eigen::MatrixXd hy = z.transpose() * q.hessian * z;
    const double hscale = 1.0 + hy.diagonal().cwiseAbs().maxCoeff();
    double tau = 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt;
    for (;;) {
      Eigen::MatrixXd k = hy;
      k.diagonal().array() += tau;
      llt.compute(k);
      if (llt.info() == Eigen::Success) break;
      tau = (tau == 0.0) ? 1e-10 * hscale : tau * 4.0;
      if (tau > 1e20 * hscale) fail(ErrorCode::NumericalFailure, "could not regularize Hessian");
    }
    Eigen::VectorXd dy = -llt.solve(gy);
    double slope = gy.dot(dy);
    if (!(slope < 0.0)) {
      dy = -gy;
      slope = -gy.squaredNorm();
    }

    // Inside the quadratic region the decrease is below rounding of the value; take the full step.
    if (tau == 0.0 && -slope <= 1e-13 * (1.0 + std::abs(q.value))) {
      v += z * dy;
      on_iterate(it + 1, v, 1.0);
      if (dy.lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + v.cwiseAbs().maxCoeff())) return {v, it + 1, true};
      continue;
    }

    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      const VertexFunction trial = v + t * (z * dy);
      const double val = value(trial);
      if (std::isfinite(val) && val <= q.value + 1e-4 * t * slope) {
        v = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) return {v, it, false};
    on_iterate(it + 1, v, t);
  }
  return {v, max_iter, false};
}

/// Least-squares multiplier: argmin_l || 2Lw - l h e^w ||_m, i.e. 2<Lw, h e^w>_m / ||h e^w||_m^2.
inline double recover_c_zero_multiplier(const ProblemInstance& p, const VertexFunction& w) {
  const VertexFunction hew = p.h.array() * w.array().exp();
  return 2.0 * inner_m(p.graph, apply_laplacian(p.graph, w), hew) / inner_m(p.graph, hew, hew);
}

}  // namespace detail

/// Feasible point of {<h e^v, 1> = <v, 1> = 0}: a bump at a vertex with h > 0, recentered.
inline VertexFunction c_zero_feasible_start(const ProblemInstance& p) {
  const WeightedGraph& g = p.graph;
  const VertexFunction hm = p.h.cwiseProduct(g.measure());
  Eigen::Index x0 = 0;
  if (!(hm.maxCoeff(&x0) > 0.0)) fail(ErrorCode::NotSolvable, "h is nowhere positive");
  const double h_total = hm.sum();
  if (!(h_total < 0.0)) fail(ErrorCode::NotSolvable, "mean of h is not negative");
  const double t0 = std::log(1.0 - h_total / hm[x0]);
  VertexFunction v = VertexFunction::Constant(hm.size(), -t0 * g.measure()[x0] / g.total_measure());
  v[x0] += t0;
  return v;
}

/// c = 0: minimize Q on {<h e^v,1> = <v,1> = 0} by augmented Lagrangian, then u = w + log(lambda/2).
inline SolveReport solve_c_zero(const ProblemInstance& p, double tol = 1e-10, int max_outer = 60) {
  if (p.c != 0.0) fail(ErrorCode::InvalidArgument, "solve_c_zero requires c = 0");
  const double hbar = p.mean_h();
  if (!(hbar < 0.0) || !p.h_positive_somewhere() || !p.h_negative_somewhere())
    fail(ErrorCode::NotSolvable, "c = 0 needs mean(h) < 0 and h changing sign",
         {{"mean_h", std::to_string(hbar)}});

  const WeightedGraph& g = p.graph;
  const VertexFunction& m = g.measure();
  const Eigen::MatrixXd a = laplacian_matrix(g);
  const Eigen::MatrixXd z = detail::mean_zero_basis(m);
  const VertexFunction mh = m.cwiseProduct(p.h);
  const double h_scale = mh.cwiseAbs().sum();  // constraint is normalized by <|h|, 1>
  const double grad_tol = 0.1 * tol * m.minCoeff();

  SolveReport report;
  report.method = Method::VariationalC0;
  VertexFunction v = c_zero_feasible_start(p);

  auto constraint = [&](const VertexFunction& x) { return mh.dot(x.array().exp().matrix()) / h_scale; };
  double rho = 10.0;
  double lambda = 0.0;
  {
    const Eigen::VectorXd zp = z.transpose() * (mh.cwiseProduct(v.array().exp().matrix()) / h_scale);
    const Eigen::VectorXd zq = z.transpose() * (2.0 * a * v);
    if (zp.squaredNorm() > 0.0) lambda = zq.dot(zp) / zp.squaredNorm();
  }

  double prev_violation = std::numeric_limits<double>::infinity();
  bool done = false;
  for (int outer = 0; outer < max_outer && !done; ++outer) {
    auto value = [&](const VertexFunction& x) {
      if (x.maxCoeff() > detail::kMaxExponent) return std::numeric_limits<double>::infinity();
      const double gx = constraint(x);
      return x.dot(a * x) - lambda * gx + 0.5 * rho * gx * gx;
    };
    auto model = [&](const VertexFunction& x) {
      const VertexFunction pe = mh.cwiseProduct(x.array().exp().matrix()) / h_scale;
      const double gx = pe.sum();
      detail::LocalModel q;
      q.value = x.dot(a * x) - lambda * gx + 0.5 * rho * gx * gx;
      q.gradient = 2.0 * a * x + (rho * gx - lambda) * pe;
      q.hessian = 2.0 * a + rho * pe * pe.transpose();
      q.hessian.diagonal() += (rho * gx - lambda) * pe;
      return q;
    };
    const auto inner = detail::damped_newton_minimize(z, v, value, model, grad_tol, 200,
                                                      [](int, const VertexFunction&, double) {});
    v = inner.v;

    const double violation = constraint(v);
    lambda -= rho * violation;
    report.trace.push_back({outer, energy(g, v), std::abs(violation) * h_scale, std::numeric_limits<double>::quiet_NaN(),
                            rho});

    const double lam = detail::recover_c_zero_multiplier(p, v);
    if (lam > 0.0) {
      SolveReport candidate;
      candidate.u = v.array() + std::log(lam / 2.0);
      attach_certificate(p, candidate);
      if (candidate.certified(tol)) done = true;
    }
    if (std::abs(violation) > 0.25 * prev_violation) rho = std::min(rho * 10.0, 1e12);
    prev_violation = std::abs(violation);
    report.iterations = outer + 1;
  }

  const double lam = detail::recover_c_zero_multiplier(p, v);
  report.u = v;
  if (!(lam > 0.0))
    throw SolveFailure(ErrorCode::MultiplierSignError, "recovered multiplier lambda is not positive", report,
                       {{"lambda", std::to_string(lam)}});
  const double sigma = std::log(lam / 2.0);
  const VertexFunction heu = p.h.array() * v.array().exp();
  const double mu = (2.0 * apply_laplacian(g, v) - lam * heu).dot(m) / g.total_measure();
  report.multipliers = {lam, mu, sigma};
  report.u = v.array() + sigma;
  report.polish_iterations = detail::polish(p, report, tol);
  return report;
}

/// Point of {<h e^v, 1> = c m(X)} of the form t 1_{x0} - l, with h(x0) > 0 (c > 0).
inline VertexFunction c_positive_feasible_start(const ProblemInstance& p) {
  if (!(p.c > 0.0)) fail(ErrorCode::InvalidArgument, "c_positive_feasible_start requires c > 0");
  const WeightedGraph& g = p.graph;
  const VertexFunction hm = p.h.cwiseProduct(g.measure());
  Eigen::Index x0 = 0;
  if (!(hm.maxCoeff(&x0) > 0.0)) fail(ErrorCode::NotSolvable, "h is nowhere positive");
  const double h_total = hm.sum();
  // Pick t so that (e^t - 1) h(x0) m(x0) + <h, 1> > 0, then solve e^{-l} [ ... ] = c m(X) for l.
  const double t = h_total > 0.0 ? 0.0 : std::log(1.0 - h_total / hm[x0]) + 1.0;
  const double bracket = std::expm1(t) * hm[x0] + h_total;
  const double l = std::log(bracket / (p.c * g.total_measure()));
  VertexFunction v = VertexFunction::Constant(hm.size(), -l);
  v[x0] += t;
  return v;
}

/// c > 0: minimize J(v) = Q(v)/2 + c m(X) mean(v) on {<h e^v, 1> = c m(X)}.
/// The constraint fixes the mean of v given its mean-zero part w, e^{mean v} = c m(X) / <h e^w, 1>,
/// so the minimization runs over w with that shift eliminated exactly.
inline SolveReport solve_c_positive(const ProblemInstance& p, double tol = 1e-10, int max_iter = 500) {
  if (!(p.c > 0.0)) fail(ErrorCode::InvalidArgument, "solve_c_positive requires c > 0");
  if (!p.h_positive_somewhere()) fail(ErrorCode::NotSolvable, "c > 0 needs h positive somewhere");

  const WeightedGraph& g = p.graph;
  const VertexFunction& m = g.measure();
  const Eigen::MatrixXd a = laplacian_matrix(g);
  const Eigen::MatrixXd z = detail::mean_zero_basis(m);
  const VertexFunction mh = m.cwiseProduct(p.h);
  const double cm = p.c * g.total_measure();
  const double grad_tol = 0.1 * tol * m.minCoeff();

  auto shift_of = [&](const VertexFunction& w) { return std::log(cm / mh.dot(w.array().exp().matrix())); };
  auto value = [&](const VertexFunction& w) {
    if (w.maxCoeff() > detail::kMaxExponent) return std::numeric_limits<double>::infinity();
    const double pw = mh.dot(w.array().exp().matrix());
    if (!(pw > 0.0)) return std::numeric_limits<double>::infinity();
    return 0.5 * w.dot(a * w) - cm * std::log(pw);
  };
  auto model = [&](const VertexFunction& w) {
    const VertexFunction pe = mh.cwiseProduct(w.array().exp().matrix());
    const double pw = pe.sum();
    detail::LocalModel q;
    q.value = 0.5 * w.dot(a * w) - cm * std::log(pw);
    q.gradient = a * w - (cm / pw) * pe;
    q.hessian = a + (cm / (pw * pw)) * pe * pe.transpose();
    q.hessian.diagonal() -= (cm / pw) * pe;
    return q;
  };

  SolveReport report;
  report.method = Method::VariationalCPos;
  const SpectralReport spectrum = eigen_decompose(g);
  report.coercivity_constant = coercivity_constant(g, p.h, p.c, spectrum.trudinger_moser_constant);

  auto record = [&](int it, const VertexFunction& w, double step) {
    const VertexFunction v = w.array() + shift_of(w);
    report.trace.push_back({it, positive_c_objective(g, p.c, v), sup_norm(equation_residual(p, v)), energy(g, v), step});
  };

  const VertexFunction start = c_positive_feasible_start(p);
  VertexFunction w = start.array() - mean(g, start);
  record(0, w, std::numeric_limits<double>::quiet_NaN());
  const auto result = detail::damped_newton_minimize(z, w, value, model, grad_tol, max_iter, record);
  w = result.v;
  report.iterations = result.iterations;

  const VertexFunction v = w.array() + shift_of(w);
  const VertexFunction hev = p.h.array() * v.array().exp();
  const VertexFunction lhs = apply_laplacian(g, v).array() + p.c;
  const double lam = inner_m(g, lhs, hev) / inner_m(g, hev, hev);
  report.multipliers.lambda = lam;
  report.u = v;
  attach_certificate(p, report);
  if (!(std::abs(lam - 1.0) <= 1e-6))
    throw SolveFailure(ErrorCode::MultiplierValueError, "multiplier at the minimizer differs from 1", report,
                       {{"lambda", std::to_string(lam)}});
  report.polish_iterations = detail::polish(p, report, tol);
  return report;
}

}  // namespace kw

#endif  // KW_VARIATIONAL_HPP
