#ifndef KW_FUNCTIONALS_HPP
#define KW_FUNCTIONALS_HPP

#include <cmath>

#include "kw/graph.hpp"
#include "kw/problem.hpp"

// Nonlinear maps built on the problem data and their derivatives.

namespace kw {

/// F(u) = Lu + c - h e^u.
inline VertexFunction equation_residual(const ProblemInstance& p, const VertexFunction& u) {
  return apply_laplacian(p.graph, u).array() + p.c - p.h.array() * u.array().exp();
}

/// F'(u) d = Ld - h e^u d.
inline VertexFunction jacobian_apply(const ProblemInstance& p, const VertexFunction& u, const VertexFunction& d) {
  return apply_laplacian(p.graph, d).array() - p.h.array() * u.array().exp() * d.array();
}

/// H(v) = <h e^v, 1>.
inline double exp_moment(const WeightedGraph& g, const VertexFunction& h, const VertexFunction& v) {
  check_aligned(g, v);
  return (h.array() * v.array().exp() * g.measure().array()).sum();
}

/// DH[v](d) = <d h e^v, 1>.
inline double exp_moment_derivative(const WeightedGraph& g, const VertexFunction& h, const VertexFunction& v,
                                    const VertexFunction& d) {
  check_aligned(g, d);
  return (d.array() * h.array() * v.array().exp() * g.measure().array()).sum();
}

/// J(v) = Q(v)/2 + c m(X) mean(v).
inline double positive_c_objective(const WeightedGraph& g, double c, const VertexFunction& v) {
  return 0.5 * energy(g, v) + c * v.dot(g.measure());
}

/// DJ[v](d) = Q(v, d) + c <d, 1>.
inline double positive_c_objective_derivative(const WeightedGraph& g, double c, const VertexFunction& v,
                                              const VertexFunction& d) {
  return energy_bilinear(g, v, d) + c * d.dot(g.measure());
}

/// Lower-bound constant C_w with J(v) >= Q(v)/4 + C_w on the constraint set <h e^v, 1> = c m(X),
/// given the Trudinger-Moser constant C' of the graph (c > 0).
inline double coercivity_constant(const WeightedGraph& g, const VertexFunction& h, double c, double tm_constant) {
  const double cm = c * g.total_measure();
  const double h2 = norm_m(g, h);
  return cm * std::log(cm / (h2 * std::sqrt(g.total_measure()))) - 4.0 * cm * cm * tm_constant;
}

}  // namespace kw

#endif  // KW_FUNCTIONALS_HPP
