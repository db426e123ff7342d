#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Sandbox {
  fs::path dir;
  Sandbox() {
    dir = fs::temp_directory_path() / ("pssmp_cli_" + std::to_string(::getpid()) + "_" +
                                       ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }

  std::string file(const std::string& name, const std::string& body) const {
    auto p = dir / name;
    std::ofstream(p) << body;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::string& args) {
  const char* exe = std::getenv("PSSMP_CLI");
  if (!exe) throw std::runtime_error("PSSMP_CLI not set");
  std::string cmd = std::string("'") + exe + "' " + args + " >/dev/null 2>&1";
  int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const char* kMl = R"({"command": "mittag-leffler", "seed": 7, "betas": [0.5], "moments": [1, 2], "n": 20000})";

}  // namespace

TEST(Cli, RunsAndWritesJson) {
  Sandbox sb;
  auto cfg = sb.file("ml.json", kMl);
  auto out = sb.path("out.json");
  ASSERT_EQ(run("mittag-leffler --config " + cfg + " --out " + out), 0);
  auto body = slurp(out);
  for (const char* key : {"\"command\"", "\"config_echo\"", "\"theoretical\"", "\"empirical\"", "\"verdict\"",
                          "\"runtime_s\": null"})
    EXPECT_NE(body.find(key), std::string::npos) << key;
}

TEST(Cli, MissingFieldIsConfigErrorWithoutOutput) {
  Sandbox sb;
  auto cfg = sb.file("p.json", R"({"command": "path", "horizon": 5})");
  auto out = sb.path("never.json");
  EXPECT_EQ(run("path --config " + cfg + " --out " + out), 2);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, UnknownFieldIsConfigError) {
  Sandbox sb;
  auto cfg = sb.file("ml.json", R"({"command": "mittag-leffler", "betas": [0.5], "n": 100, "bogus": 1})");
  EXPECT_EQ(run("mittag-leffler --config " + cfg), 2);
}

TEST(Cli, BadJsonAndBadArgsAreConfigErrors) {
  Sandbox sb;
  auto cfg = sb.file("bad.json", "{\"command\": ");
  EXPECT_EQ(run("mittag-leffler --config " + cfg), 2);
  EXPECT_EQ(run("no-such-command"), 2);
  EXPECT_EQ(run("mittag-leffler --format xml"), 2);
  EXPECT_EQ(run("mittag-leffler --config " + sb.path("missing.json")), 2);
}

TEST(Cli, CommandMismatchIsConfigError) {
  Sandbox sb;
  auto cfg = sb.file("ml.json", kMl);
  EXPECT_EQ(run("round-trip --config " + cfg), 2);
}

TEST(Cli, FailedCheckExitsFourOnlyWithCheck) {
  Sandbox sb;
  auto cfg = sb.file("rt.json", R"({"command": "round-trip", "n_paths": 5, "horizon": 10, "alphas": [1], "tolerance": 1e-300})");
  EXPECT_EQ(run("round-trip --config " + cfg + " --check"), 4);
  EXPECT_EQ(run("round-trip --config " + cfg), 0);
}

TEST(Cli, DeterministicAcrossRunsAndJobs) {
  Sandbox sb;
  auto cfg = sb.file("ml.json", kMl);
  ASSERT_EQ(run("mittag-leffler --config " + cfg + " --out " + sb.path("a.json")), 0);
  ASSERT_EQ(run("mittag-leffler --config " + cfg + " --out " + sb.path("b.json")), 0);
  ASSERT_EQ(run("mittag-leffler --config " + cfg + " --jobs 2 --out " + sb.path("c.json")), 0);
  auto a = slurp(sb.path("a.json"));
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(sb.path("b.json")));
  EXPECT_EQ(a, slurp(sb.path("c.json")));
  ASSERT_EQ(run("mittag-leffler --config " + cfg + " --seed 8 --out " + sb.path("d.json")), 0);
  EXPECT_NE(a, slurp(sb.path("d.json")));
}

TEST(Cli, CsvOutputs) {
  Sandbox sb;
  auto path_cfg = sb.file("p.json", R"({"command": "path", "seed": 9, "horizon": 5,
    "spec": {"kind": "CompoundPoisson", "rate": 2, "drift": 0.5, "jump_law": {"kind": "Exponential", "rate": 1}}})");
  ASSERT_EQ(run("path --config " + path_cfg + " --format csv --out " + sb.path("p.csv")), 0);
  EXPECT_EQ(slurp(sb.path("p.csv")).rfind("jump_time,jump_size,drift\n", 0), 0u);

  auto tv = sb.file("tv.json", R"({"command": "tabulate-v", "alpha": 1, "beta": 0.5, "v_min": 0.01, "v_max": 100, "points": 5})");
  ASSERT_EQ(run("tabulate-v --config " + tv + " --format csv --out " + sb.path("v.csv")), 0);
  auto v = slurp(sb.path("v.csv"));
  EXPECT_EQ(v.rfind("v,pdf,cdf\n", 0), 0u);
  EXPECT_EQ(std::count(v.begin(), v.end(), '\n'), 6);

  auto ml = sb.file("ml.json", kMl);
  ASSERT_EQ(run("mittag-leffler --config " + ml + " --format csv --out " + sb.path("c.csv")), 0);
  EXPECT_EQ(slurp(sb.path("c.csv")).rfind("name,value,op,threshold,pass\n", 0), 0u);
}
