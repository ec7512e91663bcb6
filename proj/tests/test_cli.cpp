#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "odmd/cli.hpp"

using namespace odmd;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    unsetenv("ODMD_SEED");
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("odmd_cli_") + info->name() + "_" +
                                        std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override {
    unsetenv("ODMD_SEED");
    fs::remove_all(dir_);
  }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "odmd");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return cli::run(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST_F(CliTest, GenMatchesInMemoryGenerator) {
  ASSERT_EQ(run({"gen", "periodic", "--n", "32", "--sigma2", "0.01", "--seed", "5", "--out", path("g")}), 0)
      << err_.str();
  ExperimentPlan p;
  p.N = 32;
  p.sigma2 = 0.01;
  const GeneratedData g = generate(p, 5);
  const SnapshotSet noisy = io::read_snapshot_csv(path("g/noisy.csv"));
  const SnapshotSet clean = io::read_snapshot_csv(path("g/clean.csv"));
  EXPECT_EQ(noisy.H, g.noisy.H);
  EXPECT_EQ(noisy.times, g.noisy.times);
  EXPECT_EQ(clean.H, g.clean.H);
  const io::Json meta = io::read_json(path("g/meta.json"));
  EXPECT_EQ(meta["seed"].get<std::uint64_t>(), 5u);
  EXPECT_EQ(io::complex_vector_from_json(meta["alpha_exact"], "meta"), g.alpha_exact);
}

TEST_F(CliTest, GenIsByteReproducible) {
  ASSERT_EQ(run({"gen", "hidden", "--n", "16", "--m", "20", "--seed", "3", "--out", path("a")}), 0);
  ASSERT_EQ(run({"gen", "hidden", "--n", "16", "--m", "20", "--seed", "3", "--out", path("b")}), 0);
  for (const char* f : {"clean.csv", "noisy.csv", "meta.json"})
    EXPECT_EQ(io::read_file(path(std::string("a/") + f)), io::read_file(path(std::string("b/") + f))) << f;
}

TEST_F(CliTest, SolveRecoversCleanEigenvalues) {
  ASSERT_EQ(run({"gen", "periodic", "--n", "64", "--out", path("g")}), 0);
  for (const char* solver : {"proposed", "ak"}) {
    const std::string res = path(std::string("res_") + solver + ".json");
    ASSERT_EQ(run({"solve", "--in", path("g/clean.csv"), "--solver", solver, "--init",
                   "file:" + path("g/meta.json"), "--out", res}),
              0)
        << err_.str();
    const io::Json j = io::read_json(res);
    const EigenvalueVector alpha = io::complex_vector_from_json(j["alpha"], res);
    EigenvalueVector exact(2);
    exact << Complex(0, 1), Complex(0, -1);
    EXPECT_LT(metric_d(alpha, exact), 1e-6) << solver;
    EXPECT_EQ(j["eta"].get<double>(), 1e3);
    EXPECT_EQ(j["rank"].get<int>(), 2);
    const auto& trace = j["energy_trace"];
    for (std::size_t k = 1; k < trace.size(); ++k)
      EXPECT_LE(trace[k].get<double>(), trace[k - 1].get<double>()) << solver;
  }
  EXPECT_TRUE(fs::exists(path("res_proposed.Ht.csv")));
}

TEST_F(CliTest, SolveDefaultsToFullSolveForProposed) {
  ASSERT_EQ(run({"gen", "periodic", "--n", "32", "--sigma2", "0.01", "--out", path("g")}), 0);
  ASSERT_EQ(run({"solve", "--in", path("g/noisy.csv"), "--out", path("r.json")}), 0) << err_.str();
  const io::Json j = io::read_json(path("r.json"));
  EXPECT_EQ(j["init"], "full");
  EXPECT_TRUE(j["chosen_init"] == "fd" || j["chosen_init"] == "ak");
}

TEST_F(CliTest, SweepWritesOneRowPerCellAndIsReproducible) {
  io::write_file(path("plan.json"),
                 R"({"N": 16, "sigma2": 0.01, "solvers": ["AK-i", "Prop-i"], "trials": 2, "base_seed": 9})");
  ASSERT_EQ(run({"sweep", "--plan", path("plan.json"), "--out", path("a.csv")}), 0) << err_.str();
  ASSERT_EQ(run({"sweep", "--plan", path("plan.json"), "--out", path("b.csv"), "--threads", "2"}), 0);
  const std::string a = io::read_file(path("a.csv"));
  EXPECT_EQ(a, io::read_file(path("b.csv")));
  std::istringstream in(a);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "system,N,sigma2,eta,solver,mean,std,trials,failures");
  EXPECT_EQ(lines[1].rfind("periodic,16,0.01,,AK-i,", 0), 0u);
  EXPECT_EQ(lines[2].rfind("periodic,16,0.01,1000,Prop-i,", 0), 0u);
}

TEST_F(CliTest, SweepRejectsUnknownPlanKey) {
  io::write_file(path("plan.json"), R"({"trails": 3})");
  EXPECT_EQ(run({"sweep", "--plan", path("plan.json"), "--out", path("a.csv")}), 3);
  io::write_file(path("plan.json"), R"({"trials": "many"})");
  EXPECT_EQ(run({"sweep", "--plan", path("plan.json"), "--out", path("a.csv")}), 2);
}

TEST_F(CliTest, ConfigFlagAndEnvironmentPrecedence) {
  io::write_file(path("cfg.json"), R"({"n": 16, "seed": 7, "sigma2": 0.01})");
  ASSERT_EQ(run({"gen", "periodic", "--config", path("cfg.json"), "--out", path("a")}), 0) << err_.str();
  io::Json meta = io::read_json(path("a/meta.json"));
  EXPECT_EQ(meta["N"].get<int>(), 16);
  EXPECT_EQ(meta["seed"].get<int>(), 7);

  ASSERT_EQ(run({"gen", "periodic", "--config", path("cfg.json"), "--seed", "8", "--out", path("b")}), 0);
  EXPECT_EQ(io::read_json(path("b/meta.json"))["seed"].get<int>(), 8);

  setenv("ODMD_SEED", "42", 1);
  ASSERT_EQ(run({"gen", "periodic", "--config", path("cfg.json"), "--out", path("c")}), 0);
  EXPECT_EQ(io::read_json(path("c/meta.json"))["seed"].get<int>(), 7);
  ASSERT_EQ(run({"gen", "periodic", "--n", "16", "--out", path("d")}), 0);
  EXPECT_EQ(io::read_json(path("d/meta.json"))["seed"].get<int>(), 42);

  setenv("ODMD_SEED", "x", 1);
  EXPECT_EQ(run({"gen", "periodic", "--n", "16", "--out", path("e")}), 3);
  EXPECT_EQ(run({"gen", "periodic", "--n", "16", "--seed", "1", "--out", path("e")}), 0);
}

TEST_F(CliTest, ExitCodes) {
  ASSERT_EQ(run({"gen", "periodic", "--n", "16", "--out", path("g")}), 0);
  const std::string csv = path("g/noisy.csv");

  EXPECT_EQ(run({"solve", "--in", path("missing.csv"), "--out", path("r.json")}), 1);
  EXPECT_EQ(run({"solve", "--in", csv, "--out", path("nodir/sub/r.json")}), 1);
  EXPECT_EQ(run({"gen", "periodic", "--config", path("missing.json"), "--out", path("x")}), 1);

  EXPECT_EQ(run({"solve", "--in", csv, "--eta", "abc", "--out", path("r.json")}), 2);
  EXPECT_EQ(run({"solve", "--in", csv, "--bogus", "--out", path("r.json")}), 2);
  io::write_file(path("bad.csv"), "t,x1\n0,1\n1,oops\n");
  EXPECT_EQ(run({"solve", "--in", path("bad.csv"), "--out", path("r.json")}), 2);
  io::write_file(path("cfg.json"), R"({"bogus": 1})");
  EXPECT_EQ(run({"gen", "periodic", "--config", path("cfg.json"), "--out", path("x")}), 2);

  EXPECT_EQ(run({"solve", "--in", csv, "--rank", "0", "--out", path("r.json")}), 3);
  EXPECT_EQ(run({"solve", "--in", csv, "--rank", "17", "--out", path("r.json")}), 3);
  EXPECT_EQ(run({"solve", "--in", csv, "--solver", "ak", "--init", "full", "--out", path("r.json")}), 3);

  io::write_file(path("coincident.json"), R"({"alpha": [{"re": 0, "im": 1}, {"re": 0, "im": 1}]})");
  EXPECT_EQ(run({"solve", "--in", csv, "--init", "file:" + path("coincident.json"), "--out", path("r.json")}),
            4);

  EXPECT_EQ(run({"combustor", "--dt", "0.5", "--out", path("comb")}), 5) << err_.str();
}

TEST_F(CliTest, HelpExitsZero) { EXPECT_EQ(run({"--help"}), 0); }
