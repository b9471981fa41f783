#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <string>

#include <json.hpp>

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

std::string data(const std::string& name) { return std::string(KW_TEST_DATA) + "/" + name; }

RunResult run(const std::string& args) {
  const std::string cmd = std::string(KW_CLI_PATH) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

nlohmann::json first_line(const RunResult& r) { return nlohmann::json::parse(r.out.substr(0, r.out.find('\n'))); }

}  // namespace

TEST(Cli, SolveClosedForm) {
  const RunResult r = run("solve --graph " + data("k2.json") + " --problem " + data("k2_c0.json"));
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const auto j = first_line(r);
  EXPECT_EQ(j["schema"], "kw/1");
  EXPECT_EQ(j["config"]["subcommand"], "solve");
  EXPECT_NEAR(j["report"]["u"][0].get<double>(), -0.36651, 1e-5);
  EXPECT_NEAR(j["report"]["u"][1].get<double>(), -1.05966, 1e-5);
  EXPECT_LT(j["report"]["residual_inf"].get<double>(), 1e-10);
}

TEST(Cli, ClassifyNotSolvable) {
  const RunResult r = run("classify --graph " + data("k2.json") + " --problem " + data("k2_cpos_nonpositive_h.json"));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(first_line(r)["verdict"]["verdict"], "NotSolvable");
}

TEST(Cli, SolveNotSolvableExitCode) {
  const RunResult r = run("solve --graph " + data("k2.json") + " --problem " + data("k2_cpos_nonpositive_h.json"));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(first_line(r)["error"]["code"], "NotSolvable");
}

TEST(Cli, NegativeWeightIsInputError) {
  const RunResult r = run("validate --graph " + data("negative_weight.json"));
  EXPECT_EQ(r.exit_code, 1);
  const auto j = first_line(r);
  EXPECT_EQ(j["error"]["code"], "NonPositiveWeight");
  EXPECT_TRUE(j["error"].contains("message"));
  EXPECT_TRUE(j["error"].contains("context"));
}

TEST(Cli, OtherInputErrors) {
  EXPECT_EQ(run("validate --graph " + data("disconnected.json")).exit_code, 1);
  EXPECT_EQ(run("solve --graph " + data("k2.json") + " --problem " + data("missing_vertex_h.json")).exit_code, 1);
  EXPECT_EQ(run("solve --graph " + data("k2.json")).exit_code, 1);
  EXPECT_EQ(run("solve --graph /nonexistent.json --problem " + data("k2_c0.json")).exit_code, 1);
  EXPECT_EQ(run("frobnicate").exit_code, 1);
  EXPECT_EQ(run("solve --graph " + data("k2.json") + " --problem " + data("k2_c0.json") + " --tol -1").exit_code, 1);
}

TEST(Cli, ValidateEchoesCanonicalGraph) {
  const RunResult r = run("validate --graph " + data("star3.json"));
  ASSERT_EQ(r.exit_code, 0);
  const auto g = first_line(r)["graph"];
  EXPECT_EQ(g["edges"].size(), 3u);
  EXPECT_EQ(g["edges"][1]["u"], "hub");
  EXPECT_EQ(g["edges"][1]["v"], "y");
}

TEST(Cli, Spectrum) {
  const RunResult r = run("spectrum --graph " + data("star3.json") + " --eigenvectors");
  ASSERT_EQ(r.exit_code, 0);
  const auto s = first_line(r)["spectrum"];
  const double expected[] = {0, 1, 1, 4};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(s["eigenvalues"][i].get<double>(), expected[i], 1e-9);
  EXPECT_EQ(s["eigenvectors"].size(), 4u);
  EXPECT_FALSE(first_line(run("spectrum --graph " + data("star3.json")))["spectrum"].contains("eigenvectors"));
}

TEST(Cli, ByteIdenticalOutput) {
  const std::string args = "solve --graph " + data("path3.json") + " --problem " + data("path3_cpos.json") +
                           " --method newton --seed 7";
  const RunResult a = run(args);
  const RunResult b = run(args);
  ASSERT_EQ(a.exit_code, 0) << a.out;
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, MethodsAndTrace) {
  for (const char* method : {"auto", "newton", "monotone"}) {
    const RunResult r = run("solve --graph " + data("k2.json") + " --problem " + data("k2_cneg.json") +
                            " --method " + method + " --trace");
    ASSERT_EQ(r.exit_code, 0) << method << r.out;
    EXPECT_TRUE(first_line(r)["report"].contains("trace"));
  }
  EXPECT_EQ(run("solve --graph " + data("k2.json") + " --problem " + data("k2_cneg.json") + " --method variational")
                .exit_code,
            1);
}

TEST(Cli, ThresholdBracket) {
  const RunResult r = run("threshold --graph " + data("k2.json") + " --problem " + data("k2_cneg_mixed.json"));
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const auto t = first_line(r)["threshold"];
  EXPECT_LT(t["c_lo"].get<double>(), t["c_hi"].get<double>());
  EXPECT_EQ(t["c_lo_label"], "no solution found");
  EXPECT_TRUE(t["monotone"].get<bool>());
}

TEST(Cli, SweepWritesOneLinePerC) {
  const RunResult r = run("sweep --graph " + data("k2.json") + " --problem " + data("k2_cpos.json") +
                          " --c-from 0.5 --c-to 2 --c-steps 4");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  int lines = 0;
  double last_c = -1e300;
  std::size_t pos = 0;
  while (pos < r.out.size()) {
    const std::size_t end = r.out.find('\n', pos);
    const auto j = nlohmann::json::parse(r.out.substr(pos, end - pos));
    EXPECT_GT(j["c"].get<double>(), last_c);
    last_c = j["c"].get<double>();
    EXPECT_TRUE(j.contains("report"));
    ++lines;
    pos = end + 1;
  }
  EXPECT_EQ(lines, 4);
}

TEST(Cli, DevOracle) {
  const RunResult r = run("dev oracle --graph " + data("k2.json") + " --problem " + data("k2_c0.json") +
                          " --box-lo -5 --box-hi 2");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const auto roots = first_line(r)["oracle"]["roots"];
  ASSERT_EQ(roots.size(), 1u);
  EXPECT_NEAR(roots[0][0].get<double>(), std::log(std::log(2.0)), 1e-10);
}

TEST(Cli, OutputFile) {
  const std::string path = testing::TempDir() + "kw_cli_output.json";
  const RunResult r = run("classify --graph " + data("k2.json") + " --problem " + data("k2_c0.json") + " --output " + path);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_TRUE(r.out.empty());
  FILE* f = std::fopen(path.c_str(), "r");
  ASSERT_NE(f, nullptr);
  std::fclose(f);
  std::remove(path.c_str());
}
