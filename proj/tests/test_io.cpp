#include <gtest/gtest.h>

#include <cmath>

#include "kw/io.hpp"
#include "support/instances.hpp"

using namespace kw;

namespace {

ErrorCode graph_error(const std::string& text) {
  try {
    parse_graph(Json::parse(text));
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "accepted: " << text;
  return ErrorCode::InvalidInput;
}

const char* kK2 = R"({"vertices":["a","b"],"measure":{"a":1,"b":2},"edges":[{"u":"a","v":"b","w":0.5}]})";

}  // namespace

TEST(Io, ParsesGraph) {
  const WeightedGraph g = parse_graph(Json::parse(kK2));
  EXPECT_EQ(g.size(), 2u);
  EXPECT_DOUBLE_EQ(g.measure()[1], 2.0);
  EXPECT_DOUBLE_EQ(g.weight(0, 1), 0.5);
}

TEST(Io, GraphErrors) {
  EXPECT_EQ(graph_error(R"({"vertices":["a","b"],"measure":{"a":1,"b":1},"edges":[{"u":"a","v":"b","w":-1}]})"),
            ErrorCode::NonPositiveWeight);
  EXPECT_EQ(graph_error(R"({"vertices":["a","b"],"measure":{"a":1,"b":1},"edges":[{"u":"a","v":"b","w":"x"}]})"),
            ErrorCode::InvalidInput);
  EXPECT_EQ(graph_error(R"({"vertices":["a","b"],"measure":{"a":1,"b":1}})"), ErrorCode::InvalidInput);
  EXPECT_EQ(graph_error(R"({"vertices":["a","a"],"measure":{"a":1},"edges":[]})"), ErrorCode::DuplicateVertex);
  EXPECT_EQ(graph_error(R"({"vertices":["a","b"],"measure":{"a":1,"b":1},"edges":[]})"), ErrorCode::Disconnected);
  EXPECT_EQ(graph_error(R"([1,2])"), ErrorCode::InvalidInput);
  EXPECT_EQ(graph_error(R"({"vertices":["a",3],"measure":{"a":1},"edges":[]})"), ErrorCode::InvalidInput);
}

TEST(Io, ParsesProblem) {
  const WeightedGraph g = parse_graph(Json::parse(kK2));
  const ProblemInstance p = parse_problem(Json::parse(R"({"h":{"b":-2,"a":1},"c":0.25})"), g);
  EXPECT_DOUBLE_EQ(p.h[0], 1.0);
  EXPECT_DOUBLE_EQ(p.h[1], -2.0);
  EXPECT_DOUBLE_EQ(p.c, 0.25);
}

TEST(Io, ProblemErrors) {
  const WeightedGraph g = parse_graph(Json::parse(kK2));
  auto code = [&](const char* text) {
    try {
      parse_problem(Json::parse(text), g);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::NumericalFailure;
  };
  EXPECT_EQ(code(R"({"h":{"a":1},"c":0})"), ErrorCode::InvalidInput);
  EXPECT_EQ(code(R"({"h":{"a":1,"b":1,"z":1},"c":0})"), ErrorCode::UnknownVertex);
  EXPECT_EQ(code(R"({"h":{"a":0,"b":0},"c":0})"), ErrorCode::ZeroH);
  EXPECT_EQ(code(R"({"h":{"a":1,"b":1}})"), ErrorCode::InvalidInput);
}

TEST(Io, CanonicalGraphRoundTrip) {
  kwtest::Rng rng(81);
  for (int trial = 0; trial < 20; ++trial) {
    const WeightedGraph g = kwtest::random_graph(rng, kwtest::uniform_int(rng, 1, 12));
    const Json j = to_json(g);
    const WeightedGraph back = parse_graph(Json::parse(dump(j)));
    EXPECT_EQ(dump(to_json(back)), dump(j));
    for (std::size_t x = 0; x < g.size(); ++x)
      for (std::size_t y = 0; y < g.size(); ++y) EXPECT_EQ(back.weight(x, y), g.weight(x, y));
    EXPECT_EQ(back.measure(), g.measure());
  }
}

TEST(Io, DoublesRoundTripExactly) {
  kwtest::Rng rng(82);
  for (int trial = 0; trial < 1000; ++trial) {
    const double x = kwtest::uniform(rng, -1, 1) * std::pow(10.0, kwtest::uniform_int(rng, -300, 300));
    Json j = Json::array({x});
    EXPECT_EQ(Json::parse(dump(j))[0].get<double>(), x);
  }
  EXPECT_EQ(dump(Json(0.1)), "0.1");
  EXPECT_EQ(dump(Json(std::nan(""))), "null");
}

TEST(Io, ReportSerialization) {
  SolveReport r;
  r.u = Eigen::Vector2d(1.5, -0.25);
  r.method = Method::MonotoneCNeg;
  r.multipliers.lambda = 2.0;
  r.trace.push_back({0, 1.0, 2.0});
  const Json j = to_json(r, true);
  EXPECT_EQ(j["method"], "MonotoneCNeg");
  EXPECT_EQ(j["u"][1].get<double>(), -0.25);
  EXPECT_EQ(j["multipliers"]["lambda"].get<double>(), 2.0);
  EXPECT_FALSE(j["multipliers"].contains("mu"));
  EXPECT_TRUE(j["coercivity_constant"].is_null());
  EXPECT_EQ(dump(j["trace"][0]["energy"]), "null");
  EXPECT_FALSE(to_json(r).contains("trace"));

  const Json e = to_json(Error(ErrorCode::NotSolvable, "nope", {{"k", "v"}}));
  EXPECT_EQ(e["error"]["code"], "NotSolvable");
  EXPECT_EQ(e["error"]["context"]["k"], "v");
}

TEST(Io, MissingFile) {
  try {
    read_json_file("/nonexistent/kw.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidInput);
  }
}
