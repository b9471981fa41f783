#ifndef KW_IO_HPP
#define KW_IO_HPP

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kw/error.hpp"
#include "kw/graph.hpp"
#include "kw/oracle.hpp"
#include "kw/problem.hpp"
#include "kw/solvability.hpp"
#include "kw/solve_report.hpp"
#include "kw/spectral.hpp"

// JSON reading and writing. Key order is fixed (ordered_json) and doubles are printed as the
// shortest decimal that round-trips; NaN and infinities become null.

namespace kw {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kSchemaVersion = "kw/1";

namespace io_detail {

inline const Json& member(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key))
    fail(ErrorCode::InvalidInput, where + " is missing \"" + key + "\"", {{"field", key}});
  return obj.at(key);
}

inline double number(const Json& j, const std::string& where) {
  if (!j.is_number()) fail(ErrorCode::InvalidInput, where + " must be a number", {{"field", where}});
  return j.get<double>();
}

inline std::string vertex_name(const Json& j, const std::string& where) {
  if (!j.is_string()) fail(ErrorCode::InvalidInput, where + " must be a vertex name string", {{"field", where}});
  return j.get<std::string>();
}

inline Json vector_json(const VertexFunction& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

}  // namespace io_detail

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::InvalidInput, "cannot open file", {{"path", path}});
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::InvalidInput, "malformed JSON", {{"path", path}, {"detail", e.what()}});
  }
}

/// {"vertices": [...], "measure": {"<v>": m, ...}, "edges": [{"u": "<v>", "v": "<v>", "w": b}, ...]}
inline WeightedGraph parse_graph(const Json& j) {
  RawGraph raw;
  const Json& vertices = io_detail::member(j, "vertices", "graph");
  if (!vertices.is_array()) fail(ErrorCode::InvalidInput, "\"vertices\" must be an array");
  for (const auto& v : vertices) raw.vertices.push_back(io_detail::vertex_name(v, "vertices[]"));
  const Json& measure = io_detail::member(j, "measure", "graph");
  if (!measure.is_object()) fail(ErrorCode::InvalidInput, "\"measure\" must be an object");
  for (const auto& [name, value] : measure.items()) raw.measure[name] = io_detail::number(value, "measure." + name);
  const Json& edges = io_detail::member(j, "edges", "graph");
  if (!edges.is_array()) fail(ErrorCode::InvalidInput, "\"edges\" must be an array");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string where = "edges[" + std::to_string(i) + "]";
    const Json& e = edges[i];
    raw.edges.push_back({io_detail::vertex_name(io_detail::member(e, "u", where), where + ".u"),
                         io_detail::vertex_name(io_detail::member(e, "v", where), where + ".v"),
                         io_detail::number(io_detail::member(e, "w", where), where + ".w")});
  }
  return validate_graph(raw);
}

/// {"h": {"<v>": value, ...}, "c": value}; the keys of h must be exactly the vertex set.
inline ProblemInstance parse_problem(const Json& j, const WeightedGraph& g) {
  const Json& hj = io_detail::member(j, "h", "problem");
  if (!hj.is_object()) fail(ErrorCode::InvalidInput, "\"h\" must be an object keyed by vertex");
  VertexFunction h = VertexFunction::Zero(static_cast<Eigen::Index>(g.size()));
  std::set<std::size_t> seen;
  for (const auto& [name, value] : hj.items()) {
    const auto idx = g.index_of(name);
    if (!idx) fail(ErrorCode::UnknownVertex, "h names a vertex not in the graph", {{"vertex", name}});
    h[static_cast<Eigen::Index>(*idx)] = io_detail::number(value, "h." + name);
    seen.insert(*idx);
  }
  for (std::size_t x = 0; x < g.size(); ++x)
    if (!seen.count(x)) fail(ErrorCode::InvalidInput, "h is missing a vertex", {{"vertex", g.vertices()[x]}});
  const double c = io_detail::number(io_detail::member(j, "c", "problem"), "c");
  return make_problem(g, std::move(h), c);
}

inline WeightedGraph load_graph(const std::string& path) { return parse_graph(read_json_file(path)); }

inline ProblemInstance load_problem(const std::string& path, const WeightedGraph& g) {
  return parse_problem(read_json_file(path), g);
}

/// Canonical form: vertices in file order, each undirected edge once with its endpoints in vertex order.
inline Json to_json(const WeightedGraph& g) {
  Json out;
  out["vertices"] = g.vertices();
  Json measure = Json::object();
  for (std::size_t x = 0; x < g.size(); ++x) measure[g.vertices()[x]] = g.measure()[static_cast<Eigen::Index>(x)];
  out["measure"] = measure;
  Json edges = Json::array();
  for (std::size_t x = 0; x < g.size(); ++x) {
    std::vector<Neighbor> nbs = g.neighbors(x);
    std::sort(nbs.begin(), nbs.end(), [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
    for (const auto& nb : nbs)
      if (nb.index > x) edges.push_back({{"u", g.vertices()[x]}, {"v", g.vertices()[nb.index]}, {"w", nb.weight}});
  }
  out["edges"] = edges;
  return out;
}

inline Json to_json(const SpectralReport& r, bool with_eigenvectors = false) {
  Json out;
  out["eigenvalues"] = io_detail::vector_json(r.eigenvalues);
  out["spectral_gap"] = r.spectral_gap();
  out["poincare_constant"] = r.poincare_constant;
  out["embedding_constant"] = r.embedding_constant;
  out["trudinger_moser_constant"] = r.trudinger_moser_constant;
  if (with_eigenvectors) {
    Json cols = Json::array();
    for (Eigen::Index i = 0; i < r.eigenvectors.cols(); ++i) cols.push_back(io_detail::vector_json(r.eigenvectors.col(i)));
    out["eigenvectors"] = cols;
  }
  return out;
}

inline Json to_json(const TraceEntry& t) {
  return {{"iteration", t.iteration}, {"objective", t.objective}, {"residual", t.residual},
          {"energy", t.energy}, {"step", t.step}};
}

inline Json to_json(const SolveReport& r, bool with_trace = false) {
  Json out;
  out["method"] = std::string(to_string(r.method));
  out["u"] = io_detail::vector_json(r.u);
  out["residual_inf"] = r.residual_inf;
  out["relative_residual"] = r.relative_residual;
  out["integral_identity_gap"] = r.integral_identity_gap;
  out["iterations"] = r.iterations;
  out["polish_iterations"] = r.polish_iterations;
  Json mult = Json::object();
  if (r.multipliers.lambda) mult["lambda"] = *r.multipliers.lambda;
  if (r.multipliers.mu) mult["mu"] = *r.multipliers.mu;
  if (r.multipliers.sigma) mult["sigma"] = *r.multipliers.sigma;
  out["multipliers"] = mult;
  out["coercivity_constant"] = r.coercivity_constant ? Json(*r.coercivity_constant) : Json(nullptr);
  if (with_trace) {
    Json trace = Json::array();
    for (const auto& t : r.trace) trace.push_back(to_json(t));
    out["trace"] = trace;
  }
  return out;
}

inline Json to_json(const SolvabilityVerdict& v) {
  Json out;
  out["verdict"] = std::string(to_string(v.verdict));
  Json reasons = Json::array();
  for (const auto& r : v.reasons) reasons.push_back({{"name", r.name}, {"value", r.value}, {"passed", r.passed}});
  out["reasons"] = reasons;
  if (v.threshold_bracket) {
    out["threshold_bracket"] = {{"c_lo", v.threshold_bracket->lo}, {"c_hi", v.threshold_bracket->hi}};
  } else {
    out["threshold_bracket"] = nullptr;
  }
  return out;
}

inline Json to_json(const ThresholdReport& r) {
  Json out;
  out["c_hi"] = r.c_hi;
  out["c_lo"] = r.c_lo ? Json(*r.c_lo) : Json(nullptr);
  out["c_lo_label"] = std::string(ThresholdReport::lo_label);
  out["truncated"] = r.truncated;
  out["monotone"] = r.monotone;
  out["constructive_bound"] = r.constructive_bound;
  Json probes = Json::array();
  for (const auto& p : r.probes) {
    Json pj = {{"c", p.c}, {"success", p.success}, {"residual_inf", p.residual_inf}};
    if (!p.success) pj["failure"] = p.failure;
    probes.push_back(pj);
  }
  out["probes"] = probes;
  return out;
}

inline Json to_json(const OracleResult& r) {
  Json out;
  Json roots = Json::array();
  for (const auto& u : r.roots) roots.push_back(io_detail::vector_json(u));
  out["roots"] = roots;
  out["search_box"] = {{"lo", io_detail::vector_json(r.search_box.lo)}, {"hi", io_detail::vector_json(r.search_box.hi)}};
  out["grid_resolution"] = r.grid_resolution;
  return out;
}

inline Json to_json(const Error& e) {
  Json ctx = Json::object();
  for (const auto& [k, v] : e.context()) ctx[k] = v;
  return {{"error", {{"code", std::string(to_string(e.code()))}, {"message", e.what()}, {"context", ctx}}}};
}

/// Serializes with the shortest round-trip representation of every double.
inline std::string dump(const Json& j) { return j.dump(); }

}  // namespace kw

#endif  // KW_IO_HPP
