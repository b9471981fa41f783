#include <gtest/gtest.h>

#include <cmath>

#include "kw/oracle.hpp"
#include "support/instances.hpp"

using namespace kw;

TEST(Oracle, ClosedFormRootOnK2) {
  const ProblemInstance p = make_problem(kwtest::k2(), Eigen::Vector2d(1, -2), 0.0);
  const OracleResult r = brute_force_solve(p, {Eigen::Vector2d(-5, -5), Eigen::Vector2d(2, 2)});
  ASSERT_EQ(r.roots.size(), 1u);
  EXPECT_NEAR(r.roots[0][0], std::log(std::log(2.0)), 1e-10);
  EXPECT_NEAR(r.roots[0][1], std::log(std::log(2.0) / 2.0), 1e-10);
  EXPECT_EQ(r.grid_resolution, 200);
}

TEST(Oracle, ConstantRoot) {
  // h e^u = c = 1 stays below lambda_2 = 2, so the constant root is the only one.
  const ProblemInstance p = make_problem(kwtest::k2(), Eigen::Vector2d(2, 2), 1.0);
  const OracleResult r = brute_force_solve(p, {Eigen::Vector2d(-5, -5), Eigen::Vector2d(2, 2)});
  ASSERT_EQ(r.roots.size(), 1u);
  EXPECT_LE((r.roots[0].array() - std::log(0.5)).abs().maxCoeff(), 1e-10);
}

TEST(Oracle, DegenerateRootIsReportedOnce) {
  // c = lambda_2 = 2: with s = u_0 - u_1 the system reduces to log((2+s)/(2-s)) = s, so |F| ~ |s|^3/12
  // and the root is only resolvable to about the cube root of machine precision.
  const ProblemInstance p = make_problem(kwtest::k2(), Eigen::Vector2d(1, 1), 2.0);
  const OracleResult r = brute_force_solve(p, {Eigen::Vector2d(-5, -5), Eigen::Vector2d(2, 2)});
  ASSERT_EQ(r.roots.size(), 1u);
  EXPECT_LE((r.roots[0].array() - std::log(2.0)).abs().maxCoeff(), 1e-4);
}

TEST(Oracle, NoRootWithoutSignChange) {
  const ProblemInstance p = make_problem(kwtest::k2(), Eigen::Vector2d(1, 1), 0.0);
  for (double lo : {-5.0, -20.0}) {
    const OracleResult r = brute_force_solve(p, {Eigen::Vector2d(lo, lo), Eigen::Vector2d(2, 2)});
    EXPECT_TRUE(r.roots.empty());
  }
}

TEST(Oracle, TwoRootsForSmallNegativeC) {
  const ProblemInstance p = make_problem(kwtest::k2(), Eigen::Vector2d(1, -2), -0.01);
  const OracleResult r = brute_force_solve(p, {Eigen::Vector2d(-8, -8), Eigen::Vector2d(2, 2)});
  ASSERT_EQ(r.roots.size(), 2u);
  EXPECT_LT(r.roots[0][0], r.roots[1][0]);
}

TEST(Oracle, ThreeVertices) {
  const ProblemInstance p = make_problem(kwtest::path(3), Eigen::Vector3d(1, -1, -2), 0.0);
  const OracleResult r = brute_force_solve(p, {Eigen::Vector3d(-6, -6, -6), Eigen::Vector3d(2, 2, 2)}, 80);
  ASSERT_EQ(r.roots.size(), 1u);
  const VertexFunction f = apply_laplacian(p.graph, r.roots[0]).array() - p.h.array() * r.roots[0].array().exp();
  EXPECT_LE(sup_norm(f), 1e-10);
}

TEST(Oracle, SingleVertex) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(1, 1);
  const ProblemInstance p = make_problem(graph_from_matrix(b, VertexFunction::Ones(1)), VertexFunction::Constant(1, -1), -2);
  const OracleResult r = brute_force_solve(p, {VertexFunction::Constant(1, -5), VertexFunction::Constant(1, 5)});
  ASSERT_EQ(r.roots.size(), 1u);
  EXPECT_NEAR(r.roots[0][0], std::log(2.0), 1e-10);
}

TEST(Oracle, BoxTooSmall) {
  // The root (log log 2, log(log 2 / 2)) sits on the upper face u_0 = log log 2.
  const ProblemInstance p = make_problem(kwtest::k2(), Eigen::Vector2d(1, -2), 0.0);
  const double edge = std::log(std::log(2.0));
  try {
    brute_force_solve(p, {Eigen::Vector2d(-5, -5), Eigen::Vector2d(edge + 1e-9, 2)});
    FAIL() << "expected BoxTooSmall";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BoxTooSmall);
  }
}

TEST(Oracle, Preconditions) {
  const ProblemInstance p = make_problem(kwtest::path(4), VertexFunction::Constant(4, 1), 1);
  try {
    brute_force_solve(p, {VertexFunction::Zero(4), VertexFunction::Ones(4)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooManyVertices);
  }
  const ProblemInstance q = make_problem(kwtest::k2(), Eigen::Vector2d(1, 1), 1);
  EXPECT_THROW(brute_force_solve(q, {Eigen::Vector2d(1, 1), Eigen::Vector2d(0, 2)}), Error);
}

TEST(ReducedConstant, Examples) {
  EXPECT_NEAR(*reduced_constant_solve(1, 2), std::log(2.0), 1e-15);
  EXPECT_NEAR(*reduced_constant_solve(-1, -2), std::log(2.0), 1e-15);
  EXPECT_FALSE(reduced_constant_solve(1, -1).has_value());
  EXPECT_FALSE(reduced_constant_solve(0, 1).has_value());
  EXPECT_FALSE(reduced_constant_solve(1, 0).has_value());
}
