#include <gtest/gtest.h>

#include <sys/wait.h>

#include <filesystem>

#include <mfldp/config.hpp>
#include <mfldp/io.hpp>
#include <mfldp/mfldp.hpp>

using namespace mfldp;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out, err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mfldp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  static std::string config(const std::string& name) { return std::string(CONFIG_DIR) + "/" + name; }

  CliResult run(const std::string& args) const {
    const std::string o = path("stdout.txt"), e = path("stderr.txt");
    const int status = std::system((std::string(LDP_EXE) + " " + args + " >" + o + " 2>" + e).c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(o), read_file(e)};
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, SimulateIsDeterministicAcrossRunsAndThreads) {
  const std::string base = "simulate --config " + config("glauber_symmetric_3.json") +
                           " --n 60 --start 0.5,0.3,0.2 --horizon 1.5 --seed 11";
  ASSERT_EQ(run(base + " --threads 1 --out " + path("a.csv")).code, 0);
  ASSERT_EQ(run(base + " --threads 4 --out " + path("b.csv")).code, 0);
  EXPECT_EQ(read_file(path("a.csv")), read_file(path("b.csv")));
  const Trajectory tr = parse_trajectory_csv(read_file(path("a.csv")), "a.csv");
  EXPECT_EQ(tr.kind, PathKind::piecewise_constant);
  EXPECT_GT(tr.size(), 10u);
}

TEST_F(Cli, SimulateDefaultsToCentre) {
  const std::string base = "simulate --config " + config("ehrenfest_v0.json") + " --n 100 --seed 7 --out ";
  ASSERT_EQ(run(base + path("a.csv")).code, 0);
  ASSERT_EQ(run(base + path("b.csv")).code, 0);
  EXPECT_EQ(read_file(path("a.csv")), read_file(path("b.csv")));
  EXPECT_EQ(parse_trajectory_csv(read_file(path("a.csv")), "a.csv").states.front()[0], 0.0);
}

TEST_F(Cli, ManifestDescribesTheRun) {
  const CliResult r = run("flow --config " + config("ehrenfest_v0.json") + " --start 0.8 --out " + path("f.csv"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = nlohmann::json::parse(r.out);
  EXPECT_EQ(m["command"], "flow");
  EXPECT_EQ(m["version"], version);
  EXPECT_EQ(m["outputs"][0], path("f.csv"));
  EXPECT_EQ(m["config_hash"].get<std::string>().size(), 16u);
  EXPECT_NE(read_file(path("f.csv")).find("# config="), std::string::npos);
}

TEST_F(Cli, FlowOutputHasNoAction) {
  ASSERT_EQ(run("flow --config " + config("ehrenfest_curie_weiss_2d.json") +
                " --start 0.5,-0.3 --horizon 1 --dt 1e-3 --out " + path("f.csv"))
                .code,
            0);
  const CliResult r = run("action --config " + config("ehrenfest_curie_weiss_2d.json") + " --trajectory " + path("f.csv") +
                          " --i0 point --out " + path("a.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(read_file(path("a.json")));
  EXPECT_LE(j["total"].get<double>(), 1e-6);
}

TEST_F(Cli, ResolventWritesGridAndReport) {
  const CliResult r = run("resolvent --config " + config("ehrenfest_sqrt.json") + " --m 33 --lambda 1 --h cosine:0.5,2 --out " +
                          path("r.csv"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(read_file(path("r.json")));
  EXPECT_LE(j["error_bound"].get<double>(), 1e-10);
  EXPECT_NE(read_file(path("r.csv")).find("# schema=gridfunction.v1"), std::string::npos);
}

TEST_F(Cli, NonConvergenceExitsWithTwo) {
  const CliResult r = run("resolvent --config " + config("ehrenfest_v0.json") +
                          " --m 65 --lambda 5 --h cosine:1,3 --max-iter 2 --out " + path("r.csv"));
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(fs::exists(path("r.csv")));
}

TEST_F(Cli, HamiltonianRowOnStdout) {
  const CliResult r = run("hamiltonian eval --config " + config("ehrenfest_v0.json") + " --x 0.5 --p 0");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("x_1,p_1,H,Hp_1\n0.5,0,0,-1\n"), std::string::npos) << r.out;
  const CliResult l = run("lagrangian eval --config " + config("glauber_symmetric_3.json") + " --x 0.5,0.5,0 --v 0,-0.1,0.1");
  ASSERT_EQ(l.code, 0) << l.err;
  EXPECT_NE(l.out.find("L"), std::string::npos);
}

TEST_F(Cli, UsageErrorsExitWithOne) {
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("flow --start 0.1").code, 1);
  fs::create_directories(dir_);
  write_atomic(path("broken.json"), "{\"model\": \"ehrenfest\",\n \"d\": }\n");
  const CliResult r = run("flow --config " + path("broken.json") + " --start 0.1 --out " + path("f.csv"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("broken.json:2:"), std::string::npos) << r.err;
  const CliResult off = run("flow --config " + config("ehrenfest_v0.json") + " --start 1.5 --out " + path("f.csv"));
  EXPECT_EQ(off.code, 1);
}

TEST_F(Cli, RefusesToOverwriteInputs) {
  fs::copy_file(config("ehrenfest_v0.json"), path("c.json"));
  const std::string before = read_file(path("c.json"));
  const CliResult r = run("flow --config " + path("c.json") + " --start 0.1 --out " + path("c.json"));
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(read_file(path("c.json")), before);
}

TEST_F(Cli, RateEstimateWritesSummary) {
  const CliResult r = run("rate-estimate --config " + config("ehrenfest_v0.json") +
                          " --from 0.6 --to 0.4 --horizon 0.3 --knots 10 --delta 0.2 --n 20,40 --replicas 500 --seed 3 --out " +
                          path("rate.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(read_file(path("rate.json")));
  EXPECT_EQ(j["n_values"].size(), 2u);
  EXPECT_NE(read_file(path("rate.csv")).find("n,p_hat,decay_estimate,reference_action"), std::string::npos);
}
