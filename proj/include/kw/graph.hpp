#ifndef KW_GRAPH_HPP
#define KW_GRAPH_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kw/error.hpp"

namespace kw {

/// A real value per vertex, aligned with the owning graph's vertex order.
using VertexFunction = Eigen::VectorXd;

/// Absolute slack used by the invariant self-checks on unit-scale data.
inline constexpr double kDefaultCheckTolerance = 1e-10;

struct RawEdge {
  std::string u;
  std::string v;
  double w = 0.0;
};

/// Unvalidated graph description, as read from a file.
struct RawGraph {
  std::vector<std::string> vertices;
  std::map<std::string, double> measure;
  std::vector<RawEdge> edges;
};

struct Neighbor {
  std::size_t index;
  double weight;
};

/// Connected, symmetric, loop-free weighted graph over a finite vertex measure.
/// Only obtainable through validate_graph(); immutable afterwards.
class WeightedGraph {
 public:
  std::size_t size() const noexcept { return vertices_.size(); }
  const std::vector<std::string>& vertices() const noexcept { return vertices_; }
  const std::vector<Neighbor>& neighbors(std::size_t x) const { return adjacency_.at(x); }
  const VertexFunction& measure() const noexcept { return measure_; }
  double total_measure() const noexcept { return total_measure_; }
  std::size_t edge_count() const noexcept { return edge_count_; }

  std::optional<std::size_t> index_of(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// b(x, y); zero for absent pairs and on the diagonal.
  double weight(std::size_t x, std::size_t y) const {
    for (const auto& nb : adjacency_.at(x))
      if (nb.index == y) return nb.weight;
    return 0.0;
  }

  /// Weighted degree sum_y b(x, y).
  double degree(std::size_t x) const {
    double d = 0.0;
    for (const auto& nb : adjacency_.at(x)) d += nb.weight;
    return d;
  }

 private:
  friend WeightedGraph validate_graph(const RawGraph& raw);

  std::vector<std::string> vertices_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<Neighbor>> adjacency_;
  VertexFunction measure_;
  double total_measure_ = 0.0;
  std::size_t edge_count_ = 0;
};

inline WeightedGraph validate_graph(const RawGraph& raw) {
  const std::size_t n = raw.vertices.size();
  if (n == 0) fail(ErrorCode::InvalidInput, "graph has no vertices");

  WeightedGraph g;
  g.vertices_ = raw.vertices;
  for (std::size_t i = 0; i < n; ++i) {
    if (!g.index_.emplace(raw.vertices[i], i).second)
      fail(ErrorCode::DuplicateVertex, "vertex '" + raw.vertices[i] + "' listed twice",
           {{"vertex", raw.vertices[i]}});
  }

  g.measure_ = VertexFunction::Zero(static_cast<Eigen::Index>(n));
  for (const auto& [name, value] : raw.measure) {
    if (!g.index_.count(name))
      fail(ErrorCode::UnknownVertex, "measure given for unknown vertex '" + name + "'", {{"vertex", name}});
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto it = raw.measure.find(raw.vertices[i]);
    if (it == raw.measure.end())
      fail(ErrorCode::InvalidInput, "no measure for vertex '" + raw.vertices[i] + "'", {{"vertex", raw.vertices[i]}});
    if (!std::isfinite(it->second) || it->second <= 0.0)
      fail(ErrorCode::NonPositiveMeasure, "measure of vertex '" + raw.vertices[i] + "' must be positive and finite",
           {{"vertex", raw.vertices[i]}, {"value", std::to_string(it->second)}});
    g.measure_[static_cast<Eigen::Index>(i)] = it->second;
  }
  g.total_measure_ = g.measure_.sum();

  // Each undirected pair is stored once, keyed by (min, max).
  std::map<std::pair<std::size_t, std::size_t>, double> pairs;
  for (const auto& e : raw.edges) {
    auto iu = g.index_of(e.u);
    auto iv = g.index_of(e.v);
    if (!iu) fail(ErrorCode::UnknownVertex, "edge references unknown vertex '" + e.u + "'", {{"vertex", e.u}});
    if (!iv) fail(ErrorCode::UnknownVertex, "edge references unknown vertex '" + e.v + "'", {{"vertex", e.v}});
    if (*iu == *iv) fail(ErrorCode::SelfLoop, "self-loop at vertex '" + e.u + "'", {{"vertex", e.u}});
    if (!std::isfinite(e.w) || e.w <= 0.0)
      fail(ErrorCode::NonPositiveWeight, "edge (" + e.u + ", " + e.v + ") has non-positive weight",
           {{"u", e.u}, {"v", e.v}, {"w", std::to_string(e.w)}});
    auto key = std::minmax(*iu, *iv);
    auto [it, inserted] = pairs.emplace(key, e.w);
    if (!inserted && it->second != e.w)
      fail(ErrorCode::SymmetryViolation, "edge (" + e.u + ", " + e.v + ") listed with conflicting weights",
           {{"u", e.u}, {"v", e.v}});
  }

  g.adjacency_.assign(n, {});
  for (const auto& [key, w] : pairs) {
    g.adjacency_[key.first].push_back({key.second, w});
    g.adjacency_[key.second].push_back({key.first, w});
  }
  g.edge_count_ = pairs.size();

  std::vector<char> seen(n, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    std::size_t x = stack.back();
    stack.pop_back();
    for (const auto& nb : g.adjacency_[x]) {
      if (!seen[nb.index]) {
        seen[nb.index] = 1;
        ++reached;
        stack.push_back(nb.index);
      }
    }
  }
  if (reached != n)
    fail(ErrorCode::Disconnected, "graph is not connected",
         {{"reached", std::to_string(reached)}, {"vertices", std::to_string(n)}});
  return g;
}

/// Builds a graph from a dense weight matrix; vertices are named "0".."n-1".
/// The matrix must be symmetric with zero diagonal and nonnegative entries.
inline WeightedGraph graph_from_matrix(const Eigen::MatrixXd& b, const VertexFunction& m) {
  const Eigen::Index n = b.rows();
  if (b.cols() != n || m.size() != n)
    fail(ErrorCode::DimensionMismatch, "weight matrix and measure sizes disagree");
  RawGraph raw;
  for (Eigen::Index i = 0; i < n; ++i) {
    raw.vertices.push_back(std::to_string(i));
    raw.measure[std::to_string(i)] = m[i];
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (b(i, i) != 0.0) fail(ErrorCode::SelfLoop, "nonzero diagonal entry", {{"vertex", std::to_string(i)}});
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (b(i, j) != b(j, i))
        fail(ErrorCode::SymmetryViolation, "b(x,y) != b(y,x)", {{"u", std::to_string(i)}, {"v", std::to_string(j)}});
      if (b(i, j) < 0.0)
        fail(ErrorCode::NonPositiveWeight, "negative weight", {{"u", std::to_string(i)}, {"v", std::to_string(j)}});
      if (b(i, j) > 0.0) raw.edges.push_back({std::to_string(i), std::to_string(j), b(i, j)});
    }
  }
  return validate_graph(raw);
}

/// Throws DimensionMismatch / NonFiniteValue unless u is a valid function on g.
inline void check_aligned(const WeightedGraph& g, const VertexFunction& u) {
  if (static_cast<std::size_t>(u.size()) != g.size())
    fail(ErrorCode::DimensionMismatch, "vertex function has wrong length",
         {{"expected", std::to_string(g.size())}, {"actual", std::to_string(u.size())}});
  if (!u.allFinite()) fail(ErrorCode::NonFiniteValue, "vertex function has non-finite entries");
}

/// Lu(x) = (1/m(x)) sum_y b(x,y) (u(x) - u(y)).
inline VertexFunction apply_laplacian(const WeightedGraph& g, const VertexFunction& u) {
  check_aligned(g, u);
  VertexFunction out(u.size());
  for (std::size_t x = 0; x < g.size(); ++x) {
    const auto xi = static_cast<Eigen::Index>(x);
    double acc = 0.0;
    for (const auto& nb : g.neighbors(x)) acc += nb.weight * (u[xi] - u[static_cast<Eigen::Index>(nb.index)]);
    out[xi] = acc / g.measure()[xi];
  }
  return out;
}

/// Q(u, v) = 1/2 sum_{x,y} b(x,y) (u(x)-u(y)) (v(x)-v(y)).
inline double energy_bilinear(const WeightedGraph& g, const VertexFunction& u, const VertexFunction& v) {
  check_aligned(g, u);
  check_aligned(g, v);
  double acc = 0.0;
  for (std::size_t x = 0; x < g.size(); ++x) {
    const auto xi = static_cast<Eigen::Index>(x);
    for (const auto& nb : g.neighbors(x)) {
      const auto yi = static_cast<Eigen::Index>(nb.index);
      if (yi > xi) acc += nb.weight * (u[xi] - u[yi]) * (v[xi] - v[yi]);
    }
  }
  return acc;
}

inline double energy(const WeightedGraph& g, const VertexFunction& u) { return energy_bilinear(g, u, u); }

/// <u, v> = sum_x u(x) v(x) m(x).
inline double inner_m(const WeightedGraph& g, const VertexFunction& u, const VertexFunction& v) {
  check_aligned(g, u);
  check_aligned(g, v);
  return (u.array() * v.array() * g.measure().array()).sum();
}

/// m-weighted l2 norm.
inline double norm_m(const WeightedGraph& g, const VertexFunction& u) { return std::sqrt(inner_m(g, u, u)); }

/// <u, 1> / m(X).
inline double mean(const WeightedGraph& g, const VertexFunction& u) {
  check_aligned(g, u);
  return u.dot(g.measure()) / g.total_measure();
}

inline double sup_norm(const VertexFunction& u) { return u.size() == 0 ? 0.0 : u.cwiseAbs().maxCoeff(); }

inline VertexFunction pos_part(const VertexFunction& u) { return u.cwiseMax(0.0); }
inline VertexFunction neg_part(const VertexFunction& u) { return (-u).cwiseMax(0.0); }

inline VertexFunction constant_function(const WeightedGraph& g, double value) {
  return VertexFunction::Constant(static_cast<Eigen::Index>(g.size()), value);
}

inline VertexFunction indicator(const WeightedGraph& g, std::size_t x) {
  VertexFunction e = VertexFunction::Zero(static_cast<Eigen::Index>(g.size()));
  e[static_cast<Eigen::Index>(x)] = 1.0;
  return e;
}

template <class Fn>
VertexFunction compose(const VertexFunction& u, Fn&& f) {
  VertexFunction out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) out[i] = f(u[i]);
  return out;
}

/// Checks Q(f o u) <= lip * Q(u), where lip bounds sup |f'|^2 on [min u, max u].
template <class Fn>
bool chain_energy_bound(const WeightedGraph& g, const VertexFunction& u, Fn&& f, double lip,
                        double tol = kDefaultCheckTolerance) {
  check_aligned(g, u);
  const double lhs = energy(g, compose(u, f));
  const double rhs = lip * energy(g, u);
  return lhs <= rhs + tol * (1.0 + std::abs(rhs));
}

}  // namespace kw

#endif  // KW_GRAPH_HPP
