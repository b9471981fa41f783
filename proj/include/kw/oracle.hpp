#ifndef KW_ORACLE_HPP
#define KW_ORACLE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kw/error.hpp"
#include "kw/problem.hpp"

// Brute-force reference solver for tiny instances. It shares only the graph and problem types with
// the main solvers; the operator, residual and Newton step are rebuilt here from the edge list.

namespace kw {

inline constexpr std::size_t kOracleMaxVertices = 3;

struct OracleBox {
  VertexFunction lo;
  VertexFunction hi;
};

struct OracleResult {
  std::vector<VertexFunction> roots;  // lexicographic order
  OracleBox search_box;
  int grid_resolution = 0;  // points per axis
};

namespace oracle_detail {

struct DenseSystem {
  Eigen::MatrixXd lap;  // M^{-1}(D - B)
  Eigen::VectorXd h;
  double c = 0.0;

  Eigen::VectorXd residual(const Eigen::VectorXd& u) const {
    return lap * u + Eigen::VectorXd::Constant(u.size(), c) - (h.array() * u.array().exp()).matrix();
  }
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& u) const {
    Eigen::MatrixXd j = lap;
    j.diagonal() -= (h.array() * u.array().exp()).matrix();
    return j;
  }
};

inline DenseSystem dense_system(const ProblemInstance& p) {
  const auto n = static_cast<Eigen::Index>(p.graph.size());
  DenseSystem s;
  s.lap = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    for (const auto& nb : p.graph.neighbors(static_cast<std::size_t>(x))) {
      const auto y = static_cast<Eigen::Index>(nb.index);
      s.lap(x, x) += nb.weight;
      s.lap(x, y) -= nb.weight;
    }
    s.lap.row(x) /= p.graph.measure()[x];
  }
  s.h = p.h;
  s.c = p.c;
  return s;
}

inline std::optional<Eigen::VectorXd> polish(const DenseSystem& s, Eigen::VectorXd u, const OracleBox& box) {
  Eigen::VectorXd f = s.residual(u);
  double merit = f.norm();
  const Eigen::VectorXd width = box.hi - box.lo;
  // Runs to stagnation: at a degenerate root Newton is only linear, so stopping early leaves the
  // polished points of neighbouring cells visibly apart.
  for (int it = 0; it < 200; ++it) {
    if (merit == 0.0) break;
    const Eigen::VectorXd d = s.jacobian(u).fullPivLu().solve(-f);
    if (!d.allFinite()) return std::nullopt;
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 50; ++ls, t *= 0.5) {
      const Eigen::VectorXd trial = u + t * d;
      if (trial.maxCoeff() > 700.0) continue;
      const Eigen::VectorXd ft = s.residual(trial);
      const double mt = ft.norm();
      if (std::isfinite(mt) && mt < merit) {
        u = trial;
        f = ft;
        merit = mt;
        moved = true;
        break;
      }
    }
    if (!moved) break;
    // Roots outside a generous margin of the box are not this scan's business.
    if (((u - box.lo).array() < -width.array()).any() || ((u - box.hi).array() > width.array()).any())
      return std::nullopt;
  }
  const double res = f.cwiseAbs().maxCoeff();
  const double scale = std::max({std::abs(s.c), (s.h.array() * u.array().exp()).abs().maxCoeff(),
                                 (s.lap * u).cwiseAbs().maxCoeff()});
  if (!(res <= 1e-10) || !(scale > 0.0) || !(res <= 1e-8 * scale)) return std::nullopt;
  if ((u.array() < box.lo.array()).any() || (u.array() > box.hi.array()).any()) return std::nullopt;
  return u;
}

/// Two polished points are one root if they are within 1e-6, or if F stays below 1e-10 along the
/// segment between them (a degenerate root is only resolved to about sqrt of the residual).
inline bool same_root(const DenseSystem& s, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if ((a - b).cwiseAbs().maxCoeff() <= 1e-6) return true;
  for (int i = 1; i <= 9; ++i) {
    const Eigen::VectorXd x = a + (b - a) * (i / 10.0);
    if (!(s.residual(x).cwiseAbs().maxCoeff() <= 1e-10)) return false;
  }
  return true;
}

}  // namespace oracle_detail

/// Scans the box on a grid with `grid` points per axis. Cells in which every component of F takes
/// both signs at the corners are polished by damped Newton; roots are merged by same_root.
inline OracleResult brute_force_solve(const ProblemInstance& p, const OracleBox& box, int grid = 200) {
  const std::size_t n = p.graph.size();
  if (n > kOracleMaxVertices)
    fail(ErrorCode::TooManyVertices, "oracle handles at most 3 vertices", {{"n", std::to_string(n)}});
  check_aligned(p.graph, box.lo);
  check_aligned(p.graph, box.hi);
  if (!((box.hi - box.lo).array() > 0.0).all()) fail(ErrorCode::InvalidArgument, "box must have positive width");
  if (grid < 2) fail(ErrorCode::InvalidArgument, "grid needs at least 2 points per axis");

  const oracle_detail::DenseSystem sys = oracle_detail::dense_system(p);
  const auto ni = static_cast<Eigen::Index>(n);
  const Eigen::VectorXd step = (box.hi - box.lo) / static_cast<double>(grid - 1);
  auto coord = [&](Eigen::Index axis, int i) { return box.lo[axis] + step[axis] * i; };

  // Axes beyond n are collapsed to a single point so one loop nest serves n = 1, 2, 3.
  std::array<int, 3> pts{1, 1, 1};
  for (std::size_t a = 0; a < n; ++a) pts[a] = grid;
  const int cells0 = std::max(pts[0] - 1, 1);
  const int cells1 = std::max(pts[1] - 1, 1);

  // Sign bit masks of F on two consecutive slabs along the last axis; slab index is (i, j).
  const std::size_t slab_size = static_cast<std::size_t>(pts[0]) * static_cast<std::size_t>(pts[1]);
  std::vector<unsigned> prev(slab_size), cur(slab_size);
  Eigen::VectorXd u(ni);
  auto fill = [&](std::vector<unsigned>& slab, int k) {
    for (int j = 0; j < pts[1]; ++j) {
      for (int i = 0; i < pts[0]; ++i) {
        u[0] = coord(0, i);
        if (n > 1) u[1] = coord(1, j);
        if (n > 2) u[2] = coord(2, k);
        const Eigen::VectorXd f = sys.residual(u);
        unsigned mask = 0;  // bit 2a: F_a <= 0, bit 2a+1: F_a >= 0
        for (Eigen::Index a = 0; a < ni; ++a) {
          if (f[a] <= 0.0) mask |= 1u << (2 * a);
          if (f[a] >= 0.0) mask |= 1u << (2 * a + 1);
        }
        slab[static_cast<std::size_t>(j) * pts[0] + i] = mask;
      }
    }
  };
  const unsigned full = (1u << (2 * n)) - 1u;

  std::vector<Eigen::VectorXd> candidates;
  auto scan_cells = [&](int k) {
    for (int j = 0; j < cells1; ++j) {
      for (int i = 0; i < cells0; ++i) {
        unsigned mask = 0;
        for (int dj = 0; dj <= (n > 1 ? 1 : 0); ++dj)
          for (int di = 0; di <= 1; ++di) {
            const std::size_t idx = static_cast<std::size_t>(j + dj) * pts[0] + (i + di);
            mask |= cur[idx];
            if (n > 2) mask |= prev[idx];
          }
        if (mask != full) continue;
        Eigen::VectorXd centre(ni);
        centre[0] = coord(0, i) + 0.5 * step[0];
        if (n > 1) centre[1] = coord(1, j) + 0.5 * step[1];
        if (n > 2) centre[2] = coord(2, k - 1) + 0.5 * step[2];
        candidates.push_back(centre);
      }
    }
  };

  if (n <= 2) {
    fill(cur, 0);
    scan_cells(0);
  } else {
    fill(prev, 0);
    for (int k = 1; k < pts[2]; ++k) {
      fill(cur, k);
      scan_cells(k);
      std::swap(prev, cur);
    }
  }

  OracleResult out;
  out.search_box = box;
  out.grid_resolution = grid;
  for (const auto& start : candidates) {
    const auto root = oracle_detail::polish(sys, start, box);
    if (!root) continue;
    const double root_res = sys.residual(*root).cwiseAbs().maxCoeff();
    const auto same = std::find_if(out.roots.begin(), out.roots.end(), [&](const VertexFunction& r) {
      return oracle_detail::same_root(sys, r, *root);
    });
    if (same == out.roots.end()) {
      out.roots.push_back(*root);
    } else if (root_res < sys.residual(*same).cwiseAbs().maxCoeff()) {
      *same = *root;
    }
  }
  for (const auto& r : out.roots) {
    const Eigen::VectorXd margin = ((r - box.lo).cwiseMin(box.hi - r)).cwiseQuotient(step);
    if (margin.minCoeff() < 0.5)
      fail(ErrorCode::BoxTooSmall, "a root lies on the boundary of the search box",
           {{"min_margin_cells", std::to_string(margin.minCoeff())}});
  }
  std::sort(out.roots.begin(), out.roots.end(), [](const VertexFunction& a, const VertexFunction& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  });
  return out;
}

/// Constant solutions: 0 = h e^u - c has the root log(c / h) when c / h > 0.
inline std::optional<double> reduced_constant_solve(double h, double c) {
  if (h == 0.0 || !(c / h > 0.0) || !std::isfinite(c / h)) return std::nullopt;
  return std::log(c / h);
}

}  // namespace kw

#endif  // KW_ORACLE_HPP
