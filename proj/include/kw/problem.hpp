#ifndef KW_PROBLEM_HPP
#define KW_PROBLEM_HPP

#include <cmath>
#include <utility>

#include "kw/error.hpp"
#include "kw/graph.hpp"

namespace kw {

/// Lu = h e^u - c on a validated graph.
struct ProblemInstance {
  WeightedGraph graph;
  VertexFunction h;
  double c = 0.0;

  double mean_h() const { return mean(graph, h); }
  bool h_positive_somewhere() const { return h.maxCoeff() > 0.0; }
  bool h_negative_somewhere() const { return h.minCoeff() < 0.0; }
};

inline ProblemInstance make_problem(WeightedGraph graph, VertexFunction h, double c) {
  check_aligned(graph, h);
  if (!std::isfinite(c)) fail(ErrorCode::NonFiniteValue, "c must be finite");
  if (h.isZero(0.0)) fail(ErrorCode::ZeroH, "coefficient h vanishes identically");
  return ProblemInstance{std::move(graph), std::move(h), c};
}

/// Same graph and h, different constant c.
inline ProblemInstance with_c(const ProblemInstance& p, double c) {
  ProblemInstance q = p;
  q.c = c;
  return q;
}

}  // namespace kw

#endif  // KW_PROBLEM_HPP
