#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "hamlearn/cli.hpp"
#include "test_util.hpp"

namespace hamlearn {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::size_t count_lines(const fs::path& p) {
  const auto s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override { dir_ = testing::temp_dir("cli"); }
  void TearDown() override { fs::remove_all(dir_); }
  std::string at(const std::string& rel) const { return (dir_ / rel).string(); }

  // The 1000/100-sample fixture.
  void gen_fixture(const std::string& out = "gen") {
    const auto r = run({"gen", "--family", "xy_chain_zfield", "--n", "2", "--s", "25", "--train",
                        "1000", "--test", "100", "--seed", "7", "-o", at(out), "-j", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
  }

  fs::path dir_;
};

TEST_F(CliTest, GenWritesBothFilesWithOneLinePerSample) {
  gen_fixture();
  // one header line, then one line per sample
  EXPECT_EQ(count_lines(at("gen/custom.train")), 1001u);
  EXPECT_EQ(count_lines(at("gen/custom.test")), 101u);
  EXPECT_TRUE(fs::exists(at("gen/effective_config.ini")));
  const auto ds = dataset::load_dataset(at("gen/custom.train"));
  EXPECT_EQ(ds.samples.size(), 1000u);
  EXPECT_EQ(ds.meta.grid.n_points, 25);
}

TEST_F(CliTest, GenIsRepeatable) {
  gen_fixture("a");
  gen_fixture("b");
  for (const char* f : {"custom.train", "custom.test", "effective_config.ini"}) {
    EXPECT_EQ(slurp(at(std::string("a/") + f)), slurp(at(std::string("b/") + f))) << f;
  }
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run({"gen", "--n", "0", "-o", at("x")}).code, cli::kExitUsage);
  EXPECT_EQ(run({"gen", "--family", "ising", "-o", at("x")}).code, cli::kExitUsage);
  EXPECT_EQ(run({"gen", "--n", "two"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"gen", "--bogus"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"gen", "--set", "train.epoch=3"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"gen", "--config", at("missing.ini")}).code, cli::kExitUsage);
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"train", "-o", at("x")}).code, cli::kExitUsage);  // no --data
  EXPECT_FALSE(fs::exists(at("x/custom.train")));
}

TEST_F(CliTest, HelpExitsZero) { EXPECT_EQ(run({"--help"}).code, cli::kExitOk); }

TEST_F(CliTest, TrainWritesCheckpointAndMetrics) {
  gen_fixture();
  const auto r = run({"train", "--data", at("gen/custom.train"), "--epochs", "2", "--hidden", "8",
                      "-o", at("tr")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("final validation F"), std::string::npos);
  EXPECT_TRUE(fs::exists(at("tr/custom.ckpt")));
  EXPECT_TRUE(fs::exists(at("tr/custom.last.ckpt")));
  EXPECT_EQ(count_lines(at("tr/metrics.csv")), 3u);
  const auto ckpt = nn::load_checkpoint(at("tr/custom.ckpt"));
  EXPECT_EQ(ckpt.arch.seq_len, 25);
  EXPECT_EQ(ckpt.arch.hidden, 8);
}

TEST_F(CliTest, ResumeMatchesUninterruptedTraining) {
  gen_fixture();
  const std::string data = at("gen/custom.train");
  ASSERT_EQ(run({"train", "--data", data, "--epochs", "2", "--hidden", "8", "-o", at("p1")}).code, 0);
  ASSERT_EQ(run({"train", "--data", data, "--epochs", "4", "--hidden", "8", "--resume",
                 at("p1/custom.last.ckpt"), "-o", at("p2")})
                .code,
            0);
  ASSERT_EQ(run({"train", "--data", data, "--epochs", "4", "--hidden", "8", "-o", at("full")}).code, 0);
  EXPECT_EQ(slurp(at("p2/custom.last.ckpt")), slurp(at("full/custom.last.ckpt")));
  // a best-only checkpoint carries no optimizer state
  EXPECT_EQ(run({"train", "--data", data, "--epochs", "4", "--hidden", "8", "--resume",
                 at("p1/custom.ckpt"), "-o", at("p3")})
                .code,
            cli::kExitFailure);
}

TEST_F(CliTest, StepMismatchNamesBothValues) {
  gen_fixture();
  const auto r = run({"train", "--data", at("gen/custom.train"), "--s", "50", "-o", at("bad")});
  EXPECT_EQ(r.code, cli::kExitFailure);
  EXPECT_NE(r.err.find("50"), std::string::npos);
  EXPECT_NE(r.err.find("25"), std::string::npos);
}

TEST_F(CliTest, EvalReportAndCorruption) {
  gen_fixture();
  ASSERT_EQ(run({"train", "--data", at("gen/custom.train"), "--epochs", "1", "--hidden", "8",
                 "-o", at("tr")})
                .code,
            0);
  const std::string ck = at("tr/custom.ckpt"), te = at("gen/custom.test");
  ASSERT_EQ(run({"eval", "--checkpoint", ck, "--data", te, "-o", at("plain")}).code, 0);
  ASSERT_EQ(run({"eval", "--checkpoint", ck, "--data", te, "--gauss-eps", "0", "-o", at("zero")}).code, 0);
  ASSERT_EQ(run({"eval", "--checkpoint", ck, "--data", te, "--gauss-eps", "0.05", "--seed", "3",
                 "-o", at("n1")})
                .code,
            0);
  ASSERT_EQ(run({"eval", "--checkpoint", ck, "--data", te, "--gauss-eps", "0.05", "--seed", "3",
                 "-o", at("n2")})
                .code,
            0);
  ASSERT_EQ(run({"eval", "--checkpoint", ck, "--data", te, "--t2", "3.14159", "-o", at("t2")}).code, 0);
  EXPECT_EQ(slurp(at("plain/per_sample.csv")), slurp(at("zero/per_sample.csv")));
  EXPECT_EQ(slurp(at("n1/per_sample.csv")), slurp(at("n2/per_sample.csv")));
  EXPECT_NE(slurp(at("n1/per_sample.csv")), slurp(at("plain/per_sample.csv")));
  EXPECT_NE(slurp(at("t2/per_sample.csv")), slurp(at("plain/per_sample.csv")));
  const auto report = slurp(at("plain/report.csv"));
  EXPECT_EQ(report.rfind("mean_F,mse,", 0), 0u);
  EXPECT_NE(report.find("per_sample.csv"), std::string::npos);
  EXPECT_EQ(count_lines(at("plain/per_sample.csv")), 101u);

  EXPECT_EQ(run({"eval", "--checkpoint", at("nope.ckpt"), "--data", te, "-o", at("e")}).code,
            cli::kExitFailure);
  EXPECT_EQ(run({"eval", "--checkpoint", ck, "--data", te, "--gauss-eps", "-1", "-o", at("e")}).code,
            cli::kExitUsage);
}

TEST_F(CliTest, EffectiveConfigAloneReproducesArtifacts) {
  gen_fixture();
  ASSERT_EQ(run({"train", "--data", at("gen/custom.train"), "--epochs", "2", "--hidden", "8",
                 "--lr", "0.003", "-o", at("tr")})
                .code,
            0);
  ASSERT_EQ(run({"eval", "--checkpoint", at("tr/custom.ckpt"), "--data", at("gen/custom.test"),
                 "--gauss-eps", "0.02", "-o", at("ev")})
                .code,
            0);

  ASSERT_EQ(run({"gen", "--config", at("gen/effective_config.ini"), "-o", at("gen2")}).code, 0);
  ASSERT_EQ(run({"train", "--config", at("tr/effective_config.ini"), "-o", at("tr2")}).code, 0);
  ASSERT_EQ(run({"eval", "--config", at("ev/effective_config.ini"), "-o", at("ev2")}).code, 0);
  EXPECT_EQ(slurp(at("gen/custom.train")), slurp(at("gen2/custom.train")));
  EXPECT_EQ(slurp(at("gen/custom.test")), slurp(at("gen2/custom.test")));
  for (const char* f : {"custom.ckpt", "custom.last.ckpt", "metrics.csv", "effective_config.ini"}) {
    EXPECT_EQ(slurp(at(std::string("tr/") + f)), slurp(at(std::string("tr2/") + f))) << f;
  }
  EXPECT_EQ(slurp(at("ev/per_sample.csv")), slurp(at("ev2/per_sample.csv")));
}

TEST_F(CliTest, OverridesApplyAfterConfigFiles) {
  {
    std::ofstream ini(at("base.ini"));
    ini << "[run]\nname = fromfile\nseed = 3\n[dataset]\nn_qubits = 2\nsteps = 4\ntrain = 10\ntest = 3\n";
  }
  ASSERT_EQ(run({"gen", "-c", at("base.ini"), "--set", "dataset.steps=6", "-o", at("o")}).code, 0);
  const auto ds = dataset::load_dataset(at("o/fromfile.train"));
  EXPECT_EQ(ds.meta.grid.n_points, 6);
  EXPECT_EQ(ds.samples.size(), 10u);
  ASSERT_EQ(run({"gen", "-c", at("base.ini"), "--set", "dataset.steps=6", "--s", "7", "-o",
                 at("p")})
                .code,
            0);
  EXPECT_EQ(dataset::load_dataset(at("p/fromfile.test")).meta.grid.n_points, 7);
}

TEST_F(CliTest, PresetsListAndShow) {
  const auto r = run({"presets"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("ising1_2q"), std::string::npos);
  EXPECT_NE(r.out.find("scaling"), std::string::npos);
  const auto s = run({"presets", "--show", "timedep_3q", "--tier", "paper"});
  ASSERT_EQ(s.code, 0);
  EXPECT_NE(s.out.find("steps = 300"), std::string::npos);
  EXPECT_EQ(run({"presets", "--show", "nope"}).code, cli::kExitUsage);
}

TEST_F(CliTest, UnknownSweepListsPresets) {
  const auto r = run({"sweep", "nope", "--tier", "desk", "-o", at("s")});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("ising1_2q"), std::string::npos);
  EXPECT_NE(r.err.find("decoherence"), std::string::npos);
  EXPECT_EQ(run({"sweep", "noise", "--tier", "lab"}).code, cli::kExitUsage);
}

TEST_F(CliTest, SweepDispatchesWithOverrides) {
  const auto r = run({"sweep", "scaling", "--tier", "desk", "-o", at("sc"), "--set",
                      "sweep.scaling_qubits=1,2", "--set", "sweep.scaling_steps=3,4", "--set",
                      "dataset.train=30", "--set", "dataset.test=5", "--set", "model.hidden=4",
                      "--set", "train.epochs=1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("scaling_matrix.csv"), std::string::npos);
  EXPECT_EQ(count_lines(at("sc/scaling_matrix.csv")), 3u);
  EXPECT_TRUE(fs::exists(at("sc/effective_config.ini")));
}

}  // namespace
}  // namespace hamlearn
