#ifndef KW_SPECTRAL_HPP
#define KW_SPECTRAL_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "kw/error.hpp"
#include "kw/graph.hpp"

namespace kw {

/// Dense factorizations are limited to this many vertices.
inline constexpr std::size_t kMaxDenseVertices = 2000;

inline void check_dense_size(const WeightedGraph& g) {
  if (g.size() > kMaxDenseVertices)
    fail(ErrorCode::GraphTooLarge,
         "graph has " + std::to_string(g.size()) + " vertices; dense spectral routines support at most " +
             std::to_string(kMaxDenseVertices),
         {{"vertices", std::to_string(g.size())}});
}

/// Unnormalized Laplacian matrix A = D - B. L corresponds to M^{-1} A with M = diag(m).
inline Eigen::MatrixXd laplacian_matrix(const WeightedGraph& g) {
  check_dense_size(g);
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t x = 0; x < g.size(); ++x) {
    const auto xi = static_cast<Eigen::Index>(x);
    for (const auto& nb : g.neighbors(x)) {
      a(xi, static_cast<Eigen::Index>(nb.index)) -= nb.weight;
      a(xi, xi) += nb.weight;
    }
  }
  return a;
}

/// Spectrum of L as a self-adjoint operator on l2(X, m).
struct SpectralReport {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // columns, m-orthonormal
  double poincare_constant = 0.0;
  double embedding_constant = 0.0;
  /// C' with (u(x) - mean u)^2 <= C' Q(u); the Trudinger-Moser exponent constant.
  double trudinger_moser_constant = 0.0;

  double spectral_gap() const {
    return eigenvalues.size() > 1 ? eigenvalues[1] : std::numeric_limits<double>::infinity();
  }
};

namespace detail {

// max_x sum_{i >= first} phi_i(x)^2 / (1 + lambda_i)
inline double max_evaluation_norm_sq(const Eigen::VectorXd& lambda, const Eigen::MatrixXd& phi, Eigen::Index first) {
  double best = 0.0;
  for (Eigen::Index x = 0; x < phi.rows(); ++x) {
    double acc = 0.0;
    for (Eigen::Index i = first; i < phi.cols(); ++i) acc += phi(x, i) * phi(x, i) / (1.0 + lambda[i]);
    best = std::max(best, acc);
  }
  return best;
}

}  // namespace detail

inline SpectralReport eigen_decompose(const WeightedGraph& g) {
  const Eigen::MatrixXd a = laplacian_matrix(g);
  const Eigen::VectorXd inv_sqrt_m = g.measure().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd s = inv_sqrt_m.asDiagonal() * a * inv_sqrt_m.asDiagonal();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s);
  if (solver.info() != Eigen::Success) fail(ErrorCode::NumericalFailure, "symmetric eigensolver did not converge");

  SpectralReport report;
  report.eigenvalues = solver.eigenvalues();
  report.eigenvectors = inv_sqrt_m.asDiagonal() * solver.eigenvectors();

  const double scale = 1.0 + report.eigenvalues.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < report.eigenvalues.size(); ++i)
    if (report.eigenvalues[i] < 0.0 && report.eigenvalues[i] > -1e-12 * scale) report.eigenvalues[i] = 0.0;

  // Deterministic signs: the ground state is positive, the rest have a positive largest entry.
  for (Eigen::Index i = 0; i < report.eigenvectors.cols(); ++i) {
    auto col = report.eigenvectors.col(i);
    Eigen::Index arg = 0;
    col.cwiseAbs().maxCoeff(&arg);
    const double ref = (i == 0) ? col.sum() : col[arg];
    if (ref < 0.0) col = -col;
  }

  const double gap = report.spectral_gap();
  if (g.size() > 1 && !(gap > 0.0)) fail(ErrorCode::NumericalFailure, "second eigenvalue is not positive");
  report.poincare_constant = g.size() > 1 ? 1.0 / gap : 0.0;
  report.embedding_constant = std::sqrt(detail::max_evaluation_norm_sq(report.eigenvalues, report.eigenvectors, 0));
  report.trudinger_moser_constant =
      g.size() > 1 ? detail::max_evaluation_norm_sq(report.eigenvalues, report.eigenvectors, 1) * (1.0 + 1.0 / gap)
                   : 0.0;
  return report;
}

/// Sharp constant C in ||u||_inf <= C (Q(u) + ||u||_2^2)^{1/2}: the largest diagonal entry of (A + M)^{-1}.
inline double embedding_constant(const WeightedGraph& g) {
  Eigen::MatrixXd k = laplacian_matrix(g);
  k.diagonal() += g.measure();
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) fail(ErrorCode::NumericalFailure, "L + I is not positive definite");
  const auto n = k.rows();
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  return std::sqrt(inv.diagonal().maxCoeff());
}

/// ||u - mean u||_2^2 <= (1/lambda_2) Q(u).
inline bool poincare_check(const WeightedGraph& g, const SpectralReport& report, const VertexFunction& u,
                           double tol = kDefaultCheckTolerance) {
  check_aligned(g, u);
  const VertexFunction centered = u.array() - mean(g, u);
  const double lhs = inner_m(g, centered, centered);
  const double rhs = report.poincare_constant * energy(g, u);
  return lhs <= rhs + tol * (1.0 + rhs);
}

/// <exp(beta (u - mean u)^2), 1> <= m(X) exp(C' |beta| Q(u)), compared in log space.
inline bool trudinger_moser_check(const WeightedGraph& g, const SpectralReport& report, const VertexFunction& u,
                                  double beta, double tol = 1e-12) {
  check_aligned(g, u);
  const VertexFunction centered = u.array() - mean(g, u);
  const Eigen::ArrayXd expo = beta * centered.array().square() + g.measure().array().log();
  const double top = expo.maxCoeff();
  const double log_lhs = top + std::log((expo - top).exp().sum());
  const double log_rhs = std::log(g.total_measure()) + report.trudinger_moser_constant * std::abs(beta) * energy(g, u);
  return log_lhs <= log_rhs + tol * (1.0 + std::abs(log_rhs));
}

/// Inverse of L on the m-orthogonal complement of the constants, factored once.
class ComplementSolver {
 public:
  explicit ComplementSolver(const WeightedGraph& g) : graph_(&g) {
    // A + (M1)(M1)^T / m(X) is positive definite and agrees with A on mean-zero functions.
    Eigen::MatrixXd k = laplacian_matrix(g);
    k += g.measure() * g.measure().transpose() / g.total_measure();
    llt_.compute(k);
    if (llt_.info() != Eigen::Success) fail(ErrorCode::NumericalFailure, "deflated Laplacian factorization failed");
  }

  /// Unique u with Lu = f and mean u = 0; f must be mean-zero.
  VertexFunction solve(const VertexFunction& f) const {
    const WeightedGraph& g = *graph_;
    check_aligned(g, f);
    const double norm_f = norm_m(g, f);
    const double pairing = f.dot(g.measure());
    if (std::abs(pairing) > 1e-10 * norm_f * std::max(1.0, std::sqrt(g.total_measure())))
      fail(ErrorCode::NotMeanZero, "right-hand side is not orthogonal to constants",
           {{"pairing", std::to_string(pairing)}});
    return solve_projected(f);
  }

  /// L^{-1}(f - mean f).
  VertexFunction solve_projected(const VertexFunction& f) const {
    const WeightedGraph& g = *graph_;
    check_aligned(g, f);
    const VertexFunction centered = f.array() - mean(g, f);
    VertexFunction u = llt_.solve(g.measure().cwiseProduct(centered));
    u.array() -= mean(g, u);
    const double res = norm_m(g, apply_laplacian(g, u) - centered);
    // Relative to f: centering a near-constant f leaves only roundoff, which must not count as failure.
    if (!u.allFinite() || res > 1e-9 * norm_m(g, f))
      fail(ErrorCode::NumericalFailure, "complement solve residual too large", {{"residual", std::to_string(res)}});
    return u;
  }

 private:
  const WeightedGraph* graph_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

inline VertexFunction solve_on_complement(const WeightedGraph& g, const VertexFunction& f) {
  return ComplementSolver(g).solve(f);
}

/// (L + k)^{-1} for a pointwise positive k, factored once.
class ShiftedSolver {
 public:
  ShiftedSolver(const WeightedGraph& g, const VertexFunction& k) : graph_(&g), k_(k) {
    check_aligned(g, k);
    if (k.size() > 0 && !(k.minCoeff() > 0.0))
      fail(ErrorCode::NonPositiveShift, "shift k must be positive at every vertex",
           {{"min_k", std::to_string(k.minCoeff())}});
    // (L + k)u = f  <=>  (A + M diag(k)) u = M f, a symmetric positive definite system.
    Eigen::MatrixXd a = laplacian_matrix(g);
    a.diagonal() += g.measure().cwiseProduct(k);
    llt_.compute(a);
    if (llt_.info() != Eigen::Success) fail(ErrorCode::NumericalFailure, "L + k factorization failed");
  }

  VertexFunction apply(const VertexFunction& u) const {
    return apply_laplacian(*graph_, u) + k_.cwiseProduct(u);
  }

  VertexFunction solve(const VertexFunction& f) const {
    const WeightedGraph& g = *graph_;
    check_aligned(g, f);
    VertexFunction u = llt_.solve(g.measure().cwiseProduct(f));
    const double res = norm_m(g, apply(u) - f);
    if (!u.allFinite() || res > 1e-9 * (norm_m(g, f) + 1.0))
      fail(ErrorCode::NumericalFailure, "shifted solve residual too large", {{"residual", std::to_string(res)}});
    return u;
  }

  const VertexFunction& shift() const noexcept { return k_; }

 private:
  const WeightedGraph* graph_;
  VertexFunction k_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

inline VertexFunction solve_shifted(const WeightedGraph& g, const VertexFunction& k, const VertexFunction& f) {
  return ShiftedSolver(g, k).solve(f);
}

/// (L + k + 1)^{-1} f; with k = 0 this is (L + 1)^{-1} f.
inline VertexFunction resolvent(const WeightedGraph& g, const VertexFunction& k, const VertexFunction& f) {
  return solve_shifted(g, k.array() + 1.0, f);
}

/// If (L + k)u <= 0 pointwise then u <= 0 pointwise. Returns false only on a counterexample.
inline bool maximum_principle_check(const WeightedGraph& g, const VertexFunction& k, const VertexFunction& u,
                                    double premise_tol = 1e-12, double conclusion_tol = 1e-9) {
  check_aligned(g, k);
  check_aligned(g, u);
  if (k.size() > 0 && !(k.minCoeff() > 0.0)) fail(ErrorCode::NonPositiveShift, "shift k must be positive");
  const VertexFunction lhs = apply_laplacian(g, u) + k.cwiseProduct(u);
  if (lhs.maxCoeff() > premise_tol) return true;
  return u.maxCoeff() <= conclusion_tol;
}

}  // namespace kw

#endif  // KW_SPECTRAL_HPP
