#include <gtest/gtest.h>

#include <cmath>

#include "kw/graph.hpp"
#include "support/instances.hpp"

using namespace kw;

namespace {

ErrorCode code_of(const RawGraph& raw) {
  try {
    validate_graph(raw);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "graph was accepted";
  return ErrorCode::InvalidInput;
}

RawGraph triangle() {
  return {{"a", "b", "c"}, {{"a", 1.0}, {"b", 2.0}, {"c", 0.5}}, {{"a", "b", 1.0}, {"b", "c", 2.0}, {"a", "c", 3.0}}};
}

}  // namespace

TEST(Validation, AcceptsTriangle) {
  const WeightedGraph g = validate_graph(triangle());
  EXPECT_EQ(g.size(), 3u);
  EXPECT_EQ(g.edge_count(), 3u);
  EXPECT_DOUBLE_EQ(g.total_measure(), 3.5);
  EXPECT_DOUBLE_EQ(g.weight(0, 2), 3.0);
  EXPECT_DOUBLE_EQ(g.weight(2, 0), 3.0);
  EXPECT_DOUBLE_EQ(g.degree(1), 3.0);
  EXPECT_EQ(g.index_of("c"), 2u);
  EXPECT_FALSE(g.index_of("z").has_value());
}

TEST(Validation, RejectsEachDefect) {
  RawGraph r = triangle();
  r.vertices.clear();
  r.measure.clear();
  r.edges.clear();
  EXPECT_EQ(code_of(r), ErrorCode::InvalidInput);

  r = triangle();
  r.vertices.push_back("a");
  EXPECT_EQ(code_of(r), ErrorCode::DuplicateVertex);

  r = triangle();
  r.measure["z"] = 1.0;
  EXPECT_EQ(code_of(r), ErrorCode::UnknownVertex);

  r = triangle();
  r.measure.erase("b");
  EXPECT_EQ(code_of(r), ErrorCode::InvalidInput);

  r = triangle();
  r.measure["b"] = 0.0;
  EXPECT_EQ(code_of(r), ErrorCode::NonPositiveMeasure);

  r = triangle();
  r.edges.push_back({"a", "z", 1.0});
  EXPECT_EQ(code_of(r), ErrorCode::UnknownVertex);

  r = triangle();
  r.edges.push_back({"a", "a", 1.0});
  EXPECT_EQ(code_of(r), ErrorCode::SelfLoop);

  r = triangle();
  r.edges[0].w = -1.0;
  EXPECT_EQ(code_of(r), ErrorCode::NonPositiveWeight);

  r = triangle();
  r.edges[0].w = std::nan("");
  EXPECT_EQ(code_of(r), ErrorCode::NonPositiveWeight);

  r = triangle();
  r.edges.push_back({"b", "a", 5.0});
  EXPECT_EQ(code_of(r), ErrorCode::SymmetryViolation);

  r = triangle();
  r.vertices.push_back("d");
  r.measure["d"] = 1.0;
  EXPECT_EQ(code_of(r), ErrorCode::Disconnected);
}

TEST(Validation, MergesIdenticalDuplicateEdges) {
  RawGraph r = triangle();
  r.edges.push_back({"b", "a", 1.0});
  EXPECT_EQ(validate_graph(r).edge_count(), 3u);
}

TEST(Validation, MatrixConstructorChecks) {
  Eigen::MatrixXd b(2, 2);
  b << 0, 1, 2, 0;
  EXPECT_THROW(graph_from_matrix(b, VertexFunction::Ones(2)), Error);
  b << 1, 1, 1, 0;
  EXPECT_THROW(graph_from_matrix(b, VertexFunction::Ones(2)), Error);
  b << 0, 1, 1, 0;
  EXPECT_THROW(graph_from_matrix(b, VertexFunction::Ones(3)), Error);
}

TEST(Laplacian, MatchesDenseAssembly) {
  kwtest::Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const WeightedGraph g = kwtest::random_graph(rng, kwtest::uniform_int(rng, 1, 20));
    const VertexFunction u = kwtest::uniform_vector(rng, static_cast<Eigen::Index>(g.size()), -3, 3);
    const VertexFunction expected = kwtest::dense_laplacian(g) * u;
    EXPECT_LE((apply_laplacian(g, u) - expected).cwiseAbs().maxCoeff(), 1e-12 * (1 + expected.norm()));
    EXPECT_NEAR(energy(g, u), kwtest::dense_energy(g, u), 1e-10 * (1 + energy(g, u)));
  }
}

TEST(Laplacian, GreenFormulaAndKernel) {
  kwtest::Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const WeightedGraph g = kwtest::random_graph(rng, kwtest::uniform_int(rng, 2, 20));
    const auto n = static_cast<Eigen::Index>(g.size());
    const VertexFunction u = kwtest::uniform_vector(rng, n, -3, 3);
    const VertexFunction v = kwtest::uniform_vector(rng, n, -3, 3);
    const double q = energy_bilinear(g, u, v);
    EXPECT_NEAR(inner_m(g, apply_laplacian(g, u), v), q, 1e-10 * (1 + std::abs(q)));
    EXPECT_NEAR(inner_m(g, u, apply_laplacian(g, v)), q, 1e-10 * (1 + std::abs(q)));
    // <Lu, 1> = 0 and constants are harmonic.
    EXPECT_NEAR(apply_laplacian(g, u).dot(g.measure()), 0.0, 1e-10 * (1 + u.norm()));
    EXPECT_LE(sup_norm(apply_laplacian(g, constant_function(g, 2.5))), 1e-12);
  }
}

TEST(Laplacian, EnergyZeroOnlyOnConstants) {
  kwtest::Rng rng(13);
  const WeightedGraph g = kwtest::random_graph(rng, 8);
  EXPECT_NEAR(energy(g, constant_function(g, -1.0)), 0.0, 1e-14);
  EXPECT_GT(energy(g, indicator(g, 3)), 0.0);
}

TEST(Helpers, PartsMeanAndNorms) {
  const WeightedGraph g = validate_graph(triangle());
  VertexFunction u(3);
  u << 1.0, -2.0, 4.0;
  EXPECT_EQ(pos_part(u) - neg_part(u), u);
  EXPECT_DOUBLE_EQ(mean(g, u), (1.0 - 4.0 + 2.0) / 3.5);
  EXPECT_DOUBLE_EQ(sup_norm(u), 4.0);
  EXPECT_DOUBLE_EQ(norm_m(g, u), std::sqrt(1.0 + 8.0 + 8.0));
  EXPECT_THROW(check_aligned(g, VertexFunction::Ones(2)), Error);
  VertexFunction bad = u;
  bad[1] = std::nan("");
  EXPECT_THROW(check_aligned(g, bad), Error);
}

TEST(Helpers, ChainEnergyBoundForLipschitzMaps) {
  kwtest::Rng rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    const WeightedGraph g = kwtest::random_graph(rng, kwtest::uniform_int(rng, 2, 12));
    const VertexFunction u = kwtest::uniform_vector(rng, static_cast<Eigen::Index>(g.size()), -2, 2);
    EXPECT_TRUE(chain_energy_bound(g, u, [](double t) { return std::max(t, 0.0); }, 1.0));
    EXPECT_TRUE(chain_energy_bound(g, u, [](double t) { return std::sin(t); }, 1.0));
    EXPECT_TRUE(chain_energy_bound(g, u, [](double t) { return std::exp(t); }, std::exp(2.0 * u.maxCoeff())));
  }
}
