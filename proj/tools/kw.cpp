#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kw/kw.hpp"

namespace {

enum class LogLevel { Quiet, Info, Debug };

LogLevel log_level() {
  const char* env = std::getenv("KW_LOG");
  if (!env) return LogLevel::Quiet;
  const std::string v(env);
  if (v == "debug") return LogLevel::Debug;
  if (v == "info") return LogLevel::Info;
  return LogLevel::Quiet;
}

void log(LogLevel level, const std::string& msg) {
  if (level != LogLevel::Quiet && log_level() >= level) std::cerr << "kw: " << msg << '\n';
}

struct RunConfig {
  std::string subcommand;
  std::string graph_path;
  std::string problem_path;
  double tol = 1e-10;
  int max_iter = 200;
  std::string method = "auto";
  unsigned long long seed = 0;
  bool trace = false;
  std::string output_path;

  // subcommand-specific
  bool eigenvectors = false;
  int probes = 40;
  double resolution = 1e-3;
  double c_min = -1e4;
  double c_from = -1.0;
  double c_to = 1.0;
  int c_steps = 11;
  double box_lo = -5.0;
  double box_hi = 2.0;
  int grid = 200;
};

kw::Json config_json(const RunConfig& c) {
  kw::Json j;
  j["subcommand"] = c.subcommand;
  j["graph"] = c.graph_path;
  j["problem"] = c.problem_path.empty() ? kw::Json(nullptr) : kw::Json(c.problem_path);
  j["tol"] = c.tol;
  j["max_iter"] = c.max_iter;
  j["method"] = c.method;
  j["seed"] = c.seed;
  j["trace"] = c.trace;
  if (c.subcommand == "spectrum") j["eigenvectors"] = c.eigenvectors;
  if (c.subcommand == "threshold") {
    j["probes"] = c.probes;
    j["resolution"] = c.resolution;
    j["c_min"] = c.c_min;
  }
  if (c.subcommand == "sweep") {
    j["c_from"] = c.c_from;
    j["c_to"] = c.c_to;
    j["c_steps"] = c.c_steps;
  }
  if (c.subcommand == "dev oracle") {
    j["box_lo"] = c.box_lo;
    j["box_hi"] = c.box_hi;
    j["grid"] = c.grid;
  }
  return j;
}

int exit_code(kw::ErrorCode code) {
  using kw::ErrorCode;
  switch (code) {
    case ErrorCode::NotSolvable:
    case ErrorCode::MeanNotNegative:
      return 2;
    case ErrorCode::NoConvergence:
    case ErrorCode::NumericalFailure:
    case ErrorCode::SingularJacobian:
    case ErrorCode::NonFiniteValue:
    case ErrorCode::MultiplierSignError:
    case ErrorCode::MultiplierValueError:
    case ErrorCode::ConstructionFailed:
    case ErrorCode::MonotonicityViolated:
    case ErrorCode::NoSuccessfulProbe:
      return 3;
    default:
      return 1;
  }
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) kw::fail(kw::ErrorCode::InvalidInput, "cannot open output file", {{"path", path}});
    }
  }
  void line(const kw::Json& j) { stream() << kw::dump(j) << '\n'; }

 private:
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  std::ofstream file_;
};

kw::Json document(const RunConfig& cfg) {
  kw::Json j;
  j["schema"] = std::string(kw::kSchemaVersion);
  j["config"] = config_json(cfg);
  return j;
}

kw::SolveOptions solve_options(const RunConfig& cfg) {
  kw::SolveOptions o;
  o.tol = cfg.tol;
  o.max_iter = cfg.max_iter;
  o.seed = cfg.seed;
  return o;
}

void emit_trace(const kw::SolveReport& r) {
  for (const auto& t : r.trace) std::cerr << kw::dump(kw::to_json(t)) << '\n';
}

// Recomputes the certificate so the emitted residual is the one a reader would recompute.
kw::SolveReport reverified(const kw::ProblemInstance& p, kw::SolveReport r, double tol) {
  kw::attach_certificate(p, r);
  if (!r.certified(tol))
    throw kw::SolveFailure(kw::ErrorCode::NoConvergence, "solution failed re-verification", r,
                           {{"residual_inf", std::to_string(r.residual_inf)}});
  return r;
}

int run_validate(const RunConfig& cfg, Output& out) {
  const kw::WeightedGraph g = kw::load_graph(cfg.graph_path);
  kw::Json doc = document(cfg);
  doc["graph"] = kw::to_json(g);
  out.line(doc);
  return 0;
}

int run_spectrum(const RunConfig& cfg, Output& out) {
  const kw::WeightedGraph g = kw::load_graph(cfg.graph_path);
  kw::Json doc = document(cfg);
  doc["spectrum"] = kw::to_json(kw::eigen_decompose(g), cfg.eigenvectors);
  out.line(doc);
  return 0;
}

int run_classify(const RunConfig& cfg, Output& out) {
  const kw::WeightedGraph g = kw::load_graph(cfg.graph_path);
  const kw::ProblemInstance p = kw::load_problem(cfg.problem_path, g);
  const kw::SolvabilityVerdict v = kw::classify(p);
  kw::Json doc = document(cfg);
  doc["verdict"] = kw::to_json(v);
  out.line(doc);
  return v.verdict == kw::Verdict::NotSolvable ? 2 : 0;
}

int run_solve(const RunConfig& cfg, Output& out) {
  const kw::WeightedGraph g = kw::load_graph(cfg.graph_path);
  const kw::ProblemInstance p = kw::load_problem(cfg.problem_path, g);
  kw::SolveReport r = kw::solve(p, solve_options(cfg), kw::parse_solve_method(cfg.method));
  if (cfg.trace) emit_trace(r);
  r = reverified(p, std::move(r), cfg.tol);
  log(LogLevel::Info, "solved with " + std::string(kw::to_string(r.method)) + " in " +
                          std::to_string(r.iterations) + " iterations");
  kw::Json doc = document(cfg);
  doc["report"] = kw::to_json(r, cfg.trace);
  out.line(doc);
  return 0;
}

int run_threshold(const RunConfig& cfg, Output& out) {
  const kw::WeightedGraph g = kw::load_graph(cfg.graph_path);
  const kw::ProblemInstance p = kw::load_problem(cfg.problem_path, g);
  kw::ThresholdOptions opts;
  opts.max_probes = cfg.probes;
  opts.resolution = cfg.resolution;
  opts.c_min = cfg.c_min;
  opts.solve = solve_options(cfg);
  const kw::ThresholdReport r = kw::estimate_threshold(g, p.h, opts);
  kw::Json doc = document(cfg);
  doc["threshold"] = kw::to_json(r);
  out.line(doc);
  return 0;
}

int run_sweep(const RunConfig& cfg, Output& out) {
  const kw::WeightedGraph g = kw::load_graph(cfg.graph_path);
  const kw::ProblemInstance base = kw::load_problem(cfg.problem_path, g);
  if (cfg.c_steps < 1) kw::fail(kw::ErrorCode::InvalidArgument, "c-steps must be at least 1");
  const kw::SolveMethod method = kw::parse_solve_method(cfg.method);
  int worst = 0;
  for (int i = 0; i < cfg.c_steps; ++i) {
    const double c = cfg.c_steps == 1 ? cfg.c_from
                                      : cfg.c_from + (cfg.c_to - cfg.c_from) * i / static_cast<double>(cfg.c_steps - 1);
    const kw::ProblemInstance p = kw::with_c(base, c);
    kw::Json doc = document(cfg);
    doc["c"] = c;
    try {
      kw::SolveReport r = kw::solve(p, solve_options(cfg), method);
      r = reverified(p, std::move(r), cfg.tol);
      doc["report"] = kw::to_json(r, cfg.trace);
    } catch (const kw::Error& e) {
      if (exit_code(e.code()) == 1) throw;
      doc["error"] = kw::to_json(e)["error"];
      worst = std::max(worst, exit_code(e.code()));
    }
    out.line(doc);
  }
  return worst;
}

int run_oracle(const RunConfig& cfg, Output& out) {
  const kw::WeightedGraph g = kw::load_graph(cfg.graph_path);
  const kw::ProblemInstance p = kw::load_problem(cfg.problem_path, g);
  const auto n = static_cast<Eigen::Index>(g.size());
  const kw::OracleBox box{kw::VertexFunction::Constant(n, cfg.box_lo), kw::VertexFunction::Constant(n, cfg.box_hi)};
  kw::Json doc = document(cfg);
  doc["oracle"] = kw::to_json(kw::brute_force_solve(p, box, cfg.grid));
  out.line(doc);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solver for L u = h e^u - c on finite weighted graphs"};
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig cfg;

  app.add_option("--graph", cfg.graph_path, "graph JSON file");
  app.add_option("--problem", cfg.problem_path, "problem JSON file");
  app.add_option("--tol", cfg.tol, "residual tolerance")->check(CLI::PositiveNumber);
  app.add_option("--max-iter", cfg.max_iter, "iteration limit")->check(CLI::PositiveNumber);
  app.add_option("--method", cfg.method, "auto|newton|variational|monotone")
      ->check(CLI::IsMember({"auto", "newton", "variational", "monotone"}));
  app.add_option("--seed", cfg.seed, "seed for random Newton starts");
  app.add_flag("--trace", cfg.trace, "per-iteration JSON lines on stderr");
  app.add_option("--output", cfg.output_path, "write the document here instead of stdout");

  auto* validate = app.add_subcommand("validate", "check a graph and echo its canonical form");
  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues and functional-inequality constants");
  spectrum->add_flag("--eigenvectors", cfg.eigenvectors, "include the eigenvectors");
  auto* classify = app.add_subcommand("classify", "solvability verdict");
  auto* solve = app.add_subcommand("solve", "solve the equation");
  auto* threshold = app.add_subcommand("threshold", "bracket the negative threshold of c");
  threshold->add_option("--probes", cfg.probes, "probe budget")->check(CLI::PositiveNumber);
  threshold->add_option("--resolution", cfg.resolution, "relative bracket width")->check(CLI::PositiveNumber);
  threshold->add_option("--c-min", cfg.c_min, "lowest c probed");
  auto* sweep = app.add_subcommand("sweep", "solve over an even grid of c values");
  sweep->add_option("--c-from", cfg.c_from, "first c");
  sweep->add_option("--c-to", cfg.c_to, "last c");
  sweep->add_option("--c-steps", cfg.c_steps, "number of c values");
  auto* dev = app.add_subcommand("dev", "developer tools");
  dev->require_subcommand(1);
  dev->fallthrough();
  auto* oracle = dev->add_subcommand("oracle", "brute-force roots on a box (n <= 3)");
  oracle->add_option("--box-lo", cfg.box_lo, "lower corner, every coordinate");
  oracle->add_option("--box-hi", cfg.box_hi, "upper corner, every coordinate");
  oracle->add_option("--grid", cfg.grid, "points per axis")->check(CLI::PositiveNumber);
  for (auto* sub : {validate, spectrum, classify, solve, threshold, sweep, oracle}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    kw::Error err(kw::ErrorCode::InvalidArgument, e.what());
    std::cout << kw::dump(kw::to_json(err)) << '\n';
    return 1;
  }

  try {
    Output out(cfg.output_path);
    try {
      if (cfg.graph_path.empty()) kw::fail(kw::ErrorCode::InvalidArgument, "--graph is required");
      const bool needs_problem = !validate->parsed() && !spectrum->parsed();
      if (needs_problem && cfg.problem_path.empty()) kw::fail(kw::ErrorCode::InvalidArgument, "--problem is required");
      if (validate->parsed()) cfg.subcommand = "validate";
      if (spectrum->parsed()) cfg.subcommand = "spectrum";
      if (classify->parsed()) cfg.subcommand = "classify";
      if (solve->parsed()) cfg.subcommand = "solve";
      if (threshold->parsed()) cfg.subcommand = "threshold";
      if (sweep->parsed()) cfg.subcommand = "sweep";
      if (oracle->parsed()) cfg.subcommand = "dev oracle";
      log(LogLevel::Debug, "running " + cfg.subcommand);

      if (validate->parsed()) return run_validate(cfg, out);
      if (spectrum->parsed()) return run_spectrum(cfg, out);
      if (classify->parsed()) return run_classify(cfg, out);
      if (solve->parsed()) return run_solve(cfg, out);
      if (threshold->parsed()) return run_threshold(cfg, out);
      if (sweep->parsed()) return run_sweep(cfg, out);
      return run_oracle(cfg, out);
    } catch (const kw::SolveFailure& e) {
      if (cfg.trace) emit_trace(e.best());
      log(LogLevel::Info, e.what());
      out.line(kw::to_json(e));
      return exit_code(e.code());
    } catch (const kw::Error& e) {
      log(LogLevel::Info, e.what());
      out.line(kw::to_json(e));
      return exit_code(e.code());
    }
  } catch (const kw::Error& e) {
    std::cout << kw::dump(kw::to_json(e)) << '\n';
    return exit_code(e.code());
  }
}
