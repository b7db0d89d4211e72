#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "hamlearn/errors.hpp"
#include "hamlearn/experiments.hpp"
#include "test_util.hpp"

namespace hamlearn {
namespace {

using experiments::ExperimentSpec;
using experiments::Kind;
using experiments::Tier;
namespace fs = std::filesystem;
constexpr double kPi = std::numbers::pi;

ExperimentSpec tiny(Kind kind = Kind::kSingle) {
  ExperimentSpec s;
  s.name = "tiny";
  s.kind = kind;
  s.seed = 11;
  s.data.n_qubits = 2;
  s.data.grid.n_points = 5;
  s.data.n_samples = 40;
  s.test_samples = 12;
  s.hidden = 4;
  s.train.epochs = 2;
  s.train.batch_size = 8;
  s.train.patience = 0;
  return s;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell);
    if (!line.empty() && line.back() == ',') row.emplace_back();
    rows.push_back(row);
  }
  return rows;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

experiments::RunOptions opts_for(const fs::path& dir) {
  experiments::RunOptions o;
  o.out_dir = dir;
  o.jobs = 1;
  return o;
}

TEST(Presets, CatalogEntriesAllValidate) {
  std::set<std::pair<std::string, Tier>> seen;
  for (const auto& p : experiments::preset_catalog()) {
    EXPECT_TRUE(seen.insert({p.name, p.tier}).second) << p.name;
    const auto s = experiments::get_preset(p.name, p.tier);
    EXPECT_NO_THROW(s.validate()) << p.name;
    EXPECT_EQ(s.kind, p.kind);
    EXPECT_EQ(s.name, p.name);
  }
  EXPECT_GE(seen.size(), 14u);
}

TEST(Presets, ReferenceShapes) {
  const auto a = experiments::get_preset("ising1_7q", Tier::kPaper);
  EXPECT_EQ(a.data.family, qsim::Family::kXyChainZField);
  EXPECT_EQ(a.data.n_qubits, 7);
  EXPECT_EQ(a.data.grid.n_points, 25);
  EXPECT_EQ(a.data.n_samples, 100000u);
  EXPECT_EQ(a.hidden, 256);

  const auto b = experiments::get_preset("ising2_6q", Tier::kPaper);
  EXPECT_EQ(b.data.family, qsim::Family::kXyzChain);
  EXPECT_EQ(b.data.n_qubits, 6);
  EXPECT_EQ(b.data.grid.n_points, 75);
  EXPECT_EQ(b.data.n_samples, 200000u);

  const auto c = experiments::get_preset("timedep_3q", Tier::kPaper);
  EXPECT_EQ(c.data.family, qsim::Family::kXyChainTdZField);
  EXPECT_EQ(c.data.n_qubits, 3);
  EXPECT_EQ(c.data.fourier_terms, 10);
  EXPECT_EQ(c.data.grid.n_points, 300);
  EXPECT_EQ(c.arch().head, nn::HeadKind::kDecoder);

  for (const auto& p : experiments::preset_catalog()) {
    EXPECT_DOUBLE_EQ(experiments::get_preset(p.name, p.tier).data.grid.tau, 0.02 * kPi);
  }
}

TEST(Presets, DecoherenceGridCoversTrainingRange) {
  const auto d = experiments::get_preset("decoherence", Tier::kDesk);
  EXPECT_DOUBLE_EQ(d.t2_train_min, kPi);
  EXPECT_DOUBLE_EQ(d.t2_train_max, 6 * kPi);
  for (double t : d.t2_grid) EXPECT_GE(t, kPi - 1e-12);
}

TEST(Presets, UnknownNameListsAlternatives) {
  try {
    experiments::get_preset("nope", Tier::kDesk);
    FAIL() << "expected UnknownPresetError";
  } catch (const experiments::UnknownPresetError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("ising1_2q"), std::string::npos);
    EXPECT_NE(msg.find("decoherence"), std::string::npos);
  }
  EXPECT_THROW(experiments::get_preset("ising1_7q", Tier::kDesk), experiments::UnknownPresetError);
}

TEST(Config, KeyValuesRoundTripEveryPreset) {
  for (const auto& p : experiments::preset_catalog()) {
    const auto s = experiments::get_preset(p.name, p.tier);
    ExperimentSpec rebuilt;
    for (const auto& [k, v] : experiments::to_key_values(s)) experiments::set_key(rebuilt, k, v);
    EXPECT_EQ(experiments::to_key_values(rebuilt), experiments::to_key_values(s)) << p.name;
    EXPECT_EQ(experiments::config_digest(rebuilt), experiments::config_digest(s));
  }
}

TEST(Config, DigestTracksEveryChange) {
  const auto base = tiny();
  const auto d0 = experiments::config_digest(base);
  EXPECT_EQ(d0.size(), 16u);
  EXPECT_EQ(d0.find_first_not_of("0123456789abcdef"), std::string::npos);
  std::set<std::string> digests{d0};
  for (const auto& [k, v] : std::vector<std::pair<std::string, std::string>>{
           {"run.seed", "12"}, {"model.hidden", "5"}, {"dataset.tau", "0.1"},
           {"train.noise_eps", "0.01"}, {"eval.t2", "3.14"}, {"sweep.frontier", "0.9"}}) {
    auto s = base;
    experiments::set_key(s, k, v);
    EXPECT_TRUE(digests.insert(experiments::config_digest(s)).second) << k;
  }
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  ExperimentSpec s;
  EXPECT_THROW(experiments::set_key(s, "train.epoch", "3"), std::invalid_argument);
  EXPECT_THROW(experiments::set_key(s, "train.epochs", "three"), std::invalid_argument);
  EXPECT_THROW(experiments::set_key(s, "train.epochs", "3x"), std::invalid_argument);
  EXPECT_THROW(experiments::set_key(s, "dataset.family", "ising"), std::invalid_argument);
  EXPECT_THROW(experiments::set_key(s, "run.name", "a/b"), std::invalid_argument);
  experiments::set_key(s, "sweep.t2_grid", " 1, 2 ,3 ");
  EXPECT_EQ(s.t2_grid, (std::vector<double>{1, 2, 3}));
}

TEST(Config, DerivedMetasDifferOnlyWhereIntended) {
  auto s = tiny();
  s.data.gauss_eps = 0.1;
  s.data.t2_min = kPi;
  s.data.t2_max = 2 * kPi;
  const auto tr = s.train_meta();
  const auto te = s.test_meta();
  EXPECT_NE(tr.master_seed, te.master_seed);
  EXPECT_EQ(tr.n_samples, 40u);
  EXPECT_EQ(te.n_samples, 12u);
  EXPECT_EQ(te.gauss_eps, 0.0);
  EXPECT_FALSE(te.random_t2());
  EXPECT_EQ(tr.gauss_eps, 0.1);
  EXPECT_TRUE(tr.random_t2());
}

TEST(Config, ValidateCatchesBadSweeps) {
  auto s = tiny(Kind::kDecoherence);
  EXPECT_THROW(s.validate(), std::invalid_argument);  // empty grid
  s.t2_grid = {kPi};
  EXPECT_THROW(s.validate(), std::invalid_argument);  // no training range
  s.t2_train_min = kPi;
  s.t2_train_max = 2 * kPi;
  EXPECT_NO_THROW(s.validate());
  auto v = tiny();
  v.val_fraction = 1.0;
  EXPECT_THROW(v.validate(), std::invalid_argument);
  v = tiny();
  v.eval.t2 = {1.0, 2.0, 3.0};
  EXPECT_THROW(v.validate(), std::invalid_argument);
}

dataset::Dataset small_test_set(std::size_t n = 16) {
  auto m = tiny().test_meta();
  m.n_samples = n;
  return {m, dataset::generate_samples(m)};
}

nn::Network small_net(const dataset::DatasetMeta& m) {
  const auto arch = nn::NetworkArch::for_dataset(m, 4);
  return nn::Network(arch, nn::init_params(arch, 3));
}

TEST(Evaluate, MeanMatchesPerSampleValues) {
  const auto ds = small_test_set();
  const auto r = experiments::evaluate(small_net(ds.meta), ds.samples, "abc");
  ASSERT_EQ(r.similarity.size(), ds.samples.size());
  double f = 0.0, mse = 0.0;
  for (std::size_t k = 0; k < ds.samples.size(); ++k) {
    f += r.similarity[k];
    mse += r.sample_mse[k];
  }
  EXPECT_NEAR(r.mean_similarity, f / ds.samples.size(), 1e-12);
  EXPECT_NEAR(r.mse, mse / ds.samples.size(), 1e-12);
  EXPECT_EQ(r.config_digest, "abc");
  for (double v : r.similarity) {
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Evaluate, ZeroTargetIsCountedNotAveraged) {
  auto ds = small_test_set(4);
  std::fill(ds.samples[1].target.begin(), ds.samples[1].target.end(), 0.0);
  const auto r = experiments::evaluate(small_net(ds.meta), ds.samples);
  EXPECT_EQ(r.undefined, 1u);
  EXPECT_TRUE(std::isnan(r.similarity[1]));
  EXPECT_NEAR(r.mean_similarity, (r.similarity[0] + r.similarity[2] + r.similarity[3]) / 3.0, 1e-12);
}

TEST(Evaluate, ReportFilesMirrorReport) {
  const auto dir = testing::temp_dir("report");
  const auto ds = small_test_set();
  const auto r = experiments::evaluate(small_net(ds.meta), ds.samples, "d1");
  experiments::write_report(dir / "report.csv", dir / "per_sample.csv", r);
  const auto summary = read_csv(dir / "report.csv");
  ASSERT_EQ(summary.size(), 2u);
  EXPECT_EQ(summary[0][0], "mean_F");
  EXPECT_EQ(std::stod(summary[1][0]), r.mean_similarity);
  EXPECT_EQ(summary[1][6], "per_sample.csv");
  const auto per = read_csv(dir / "per_sample.csv");
  ASSERT_EQ(per.size(), ds.samples.size() + 1);
  double sum = 0.0;
  for (std::size_t k = 1; k < per.size(); ++k) sum += std::stod(per[k][1]);
  EXPECT_NEAR(sum / ds.samples.size(), r.mean_similarity, 1e-12);
  fs::remove_all(dir);
}

TEST(Corrupt, ZeroEpsIsIdentity) {
  const auto ds = small_test_set();
  const auto out = experiments::corrupt(ds, {0.0, {}, 5});
  for (std::size_t k = 0; k < ds.samples.size(); ++k) {
    EXPECT_EQ(out[k].input, ds.samples[k].input);
    EXPECT_EQ(out[k].target, ds.samples[k].target);
  }
}

TEST(Corrupt, GaussianIsSeededAndScaled) {
  const auto ds = small_test_set(200);
  const auto a = experiments::corrupt(ds, {0.05, {}, 5});
  const auto b = experiments::corrupt(ds, {0.05, {}, 5}, 4);
  const auto c = experiments::corrupt(ds, {0.05, {}, 6});
  double sq = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < ds.samples.size(); ++k) {
    EXPECT_EQ(a[k].input, b[k].input);
    EXPECT_NE(a[k].input, c[k].input);
    EXPECT_EQ(a[k].target, ds.samples[k].target);
    for (std::size_t j = 0; j < a[k].input.size(); ++j) {
      const double d = a[k].input[j] - ds.samples[k].input[j];
      sq += d * d;
      ++n;
    }
  }
  EXPECT_NEAR(std::sqrt(sq / n), 0.05, 0.05 * 0.05);
}

TEST(Corrupt, LongT2ApproachesClean) {
  const auto ds = small_test_set();
  const auto out = experiments::corrupt(ds, {0.0, {1e9}, 0}, 2);
  double worst = 0.0;
  for (std::size_t k = 0; k < ds.samples.size(); ++k) {
    for (std::size_t j = 0; j < out[k].input.size(); ++j) {
      worst = std::max(worst, std::abs(out[k].input[j] - ds.samples[k].input[j]));
    }
  }
  EXPECT_LT(worst, 1e-6);
  EXPECT_GT(worst, 0.0);
}

TEST(Corrupt, ShortT2ShrinksBlochVectors) {
  const auto ds = small_test_set(8);
  const auto out = experiments::corrupt(ds, {0.0, {kPi}, 0});
  // dephasing damps x and y; the last row shows it most clearly
  for (std::size_t k = 0; k < ds.samples.size(); ++k) {
    const auto& in = ds.samples[k].input;
    const std::size_t last = in.size() - 6;
    double clean = 0.0, noisy = 0.0;
    for (int q = 0; q < 2; ++q) {
      for (int a = 0; a < 2; ++a) {
        clean += std::pow(in[last + 3 * q + a], 2);
        noisy += std::pow(out[k].input[last + 3 * q + a], 2);
      }
    }
    EXPECT_LT(noisy, clean);
  }
}

TEST(Corrupt, RejectsTamperedSetsAndBadT2) {
  auto ds = small_test_set(4);
  EXPECT_THROW(experiments::corrupt(ds, {0.0, {1.0, 2.0, 3.0}, 0}), SpecError);
  EXPECT_THROW(experiments::corrupt(ds, {-0.1, {}, 0}), SpecError);
  ds.samples[2].target[0] += 0.25;
  EXPECT_THROW(experiments::corrupt(ds, {0.0, {kPi}, 0}), FormatError);
}

TEST(Metrics, CsvHasOneRowPerEpoch) {
  const auto dir = testing::temp_dir("metrics");
  std::vector<nn::EpochMetrics> h{{1, 0.5, 0.4, 0.3, 0}, {2, 0.25, 0.2, 0.6, 0}};
  experiments::write_metrics(dir / "m.csv", h);
  const auto rows = read_csv(dir / "m.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"epoch", "train_loss", "val_loss", "val_F"}));
  EXPECT_EQ(rows[2][0], "2");
  EXPECT_EQ(std::stod(rows[2][3]), 0.6);
  fs::remove_all(dir);
}

TEST(Run, WritesArtifactsAndIsReproducible) {
  const auto root = testing::temp_dir("run");
  const auto a = experiments::run_experiment(tiny(), opts_for(root / "a"));
  const auto b = experiments::run_experiment(tiny(), opts_for(root / "b"));
  for (const char* f : {"tiny.ckpt", "tiny.last.ckpt", "metrics.csv", "report.csv",
                        "per_sample.csv", "effective_config.ini"}) {
    EXPECT_TRUE(fs::exists(root / "a" / f)) << f;
  }
  for (const char* f : {"tiny.ckpt", "tiny.last.ckpt", "metrics.csv", "per_sample.csv",
                        "effective_config.ini"}) {
    EXPECT_EQ(slurp(root / "a" / f), slurp(root / "b" / f)) << f;
  }
  EXPECT_EQ(a.report.mean_similarity, b.report.mean_similarity);
  EXPECT_EQ(a.history.size(), 2u);
  EXPECT_EQ(a.report.n_samples, 12u);
  EXPECT_EQ(a.report.config_digest, experiments::config_digest(tiny()));

  auto other = tiny();
  other.seed = 12;
  const auto c = experiments::run_experiment(other, opts_for(root / "c"));
  EXPECT_NE(c.report.mean_similarity, a.report.mean_similarity);
  fs::remove_all(root);
}

TEST(Run, JobsDoNotChangeResults) {
  const auto root = testing::temp_dir("jobs");
  auto o1 = opts_for(root / "j1");
  auto o4 = opts_for(root / "j4");
  o4.jobs = 4;
  experiments::run_experiment(tiny(), o1);
  experiments::run_experiment(tiny(), o4);
  EXPECT_EQ(slurp(root / "j1" / "tiny.ckpt"), slurp(root / "j4" / "tiny.ckpt"));
  EXPECT_EQ(slurp(root / "j1" / "per_sample.csv"), slurp(root / "j4" / "per_sample.csv"));
  fs::remove_all(root);
}

TEST(Run, EffectiveConfigReproducesSpec) {
  const auto root = testing::temp_dir("echo");
  auto s = tiny();
  s.eval.gauss_eps = 0.02;
  experiments::run_experiment(s, opts_for(root));
  std::ifstream in(root / "effective_config.ini");
  ExperimentSpec rebuilt;
  std::string line, section;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == ';') continue;
    if (line[0] == '[') {
      section = line.substr(1, line.size() - 2);
      continue;
    }
    const auto eq = line.find(" = ");
    experiments::set_key(rebuilt, section + "." + line.substr(0, eq), line.substr(eq + 3));
  }
  EXPECT_EQ(experiments::config_digest(rebuilt), experiments::config_digest(s));
  fs::remove_all(root);
}

TEST(Run, DatasetCacheIsReused) {
  const auto root = testing::temp_dir("cache");
  const auto meta = tiny().train_meta();
  const auto first = experiments::cached_dataset(meta, root, "train", 1);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(root)) files.push_back(e.path());
  ASSERT_EQ(files.size(), 1u);
  const auto stamp = fs::last_write_time(files[0]);
  const auto again = experiments::cached_dataset(meta, root, "train", 1);
  EXPECT_EQ(fs::last_write_time(files[0]), stamp);
  ASSERT_EQ(again.samples.size(), first.samples.size());
  EXPECT_EQ(again.samples.back().input, first.samples.back().input);

  auto changed = meta;
  changed.grid.n_points = 6;
  const auto other = experiments::cached_dataset(changed, root, "train", 1);
  EXPECT_EQ(other.meta.grid.n_points, 6);
  std::size_t count = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(root)) ++count;
  EXPECT_EQ(count, 2u);
  fs::remove_all(root);
}

TEST(Run, EvalCorruptionIsApplied) {
  const auto root = testing::temp_dir("evalc");
  auto s = tiny();
  const auto clean = experiments::run_experiment(s, opts_for(root / "clean"));
  s.eval.gauss_eps = 0.3;
  const auto noisy = experiments::run_experiment(s, opts_for(root / "noisy"));
  EXPECT_EQ(slurp(root / "clean" / "tiny.ckpt"), slurp(root / "noisy" / "tiny.ckpt"));
  EXPECT_NE(clean.report.mse, noisy.report.mse);
  fs::remove_all(root);
}

TEST(Sweep, NoiseTableCoversGrid) {
  const auto root = testing::temp_dir("noise");
  auto s = tiny(Kind::kNoise);
  s.noise_train_eps = {0.0, 0.1};
  s.noise_steps = {4, 5};
  s.noise_test_eps = {0.0, 0.1};
  auto o = opts_for(root);
  o.cache_dir = root / "cache";
  const auto res = experiments::run_sweep(s, o);
  ASSERT_EQ(res.points.size(), 8u);
  const auto rows = read_csv(root / "noise.csv");
  ASSERT_EQ(rows.size(), 9u);
  EXPECT_EQ(rows[0][0], "model");
  std::set<std::string> models;
  for (const auto& p : res.points) models.insert(p.model);
  EXPECT_EQ(models.size(), 4u);
  // test_eps 0 is the plain test-set evaluation of each model
  for (const auto& p : res.points) {
    if (p.coords.at("test_eps") != 0.0) continue;
    const auto rep = read_csv(root / p.model / "report.csv");
    EXPECT_EQ(std::stod(rep[1][0]), p.mean_similarity) << p.model;
  }
  EXPECT_TRUE(fs::exists(root / "effective_config.ini"));
  fs::remove_all(root);
}

TEST(Sweep, DecoherenceLongT2MatchesClean) {
  const auto root = testing::temp_dir("deco");
  auto s = tiny(Kind::kDecoherence);
  s.t2_grid = {kPi, 1e9};
  s.t2_train_min = kPi;
  s.t2_train_max = 6 * kPi;
  const auto res = experiments::run_sweep(s, opts_for(root));
  ASSERT_EQ(res.points.size(), 6u);
  for (const std::string model : {"noiseless", "t2_trained"}) {
    double clean = NAN, long_t2 = NAN;
    for (const auto& p : res.points) {
      if (p.model != model) continue;
      if (p.coords.at("dephased") == 0.0) clean = p.mean_similarity;
      if (p.coords.at("t2") == 1e9) long_t2 = p.mean_similarity;
    }
    EXPECT_NEAR(long_t2, clean, 1e-3) << model;
  }
  EXPECT_EQ(read_csv(root / "decoherence.csv").size(), 7u);
  const auto t2_meta = dataset::load_dataset(
      [&] {
        for (const auto& e : fs::directory_iterator(root / "data")) {
          if (e.path().extension() == ".train") {
            auto ds = dataset::load_dataset(e.path());
            if (ds.meta.random_t2()) return e.path();
          }
        }
        return fs::path{};
      }()).meta;
  EXPECT_DOUBLE_EQ(t2_meta.t2_min, kPi);
  EXPECT_DOUBLE_EQ(t2_meta.t2_max, 6 * kPi);
  fs::remove_all(root);
}

TEST(Sweep, IntervalScalesTau) {
  const auto root = testing::temp_dir("interval");
  auto s = tiny(Kind::kInterval);
  s.interval_factors = {1.0, 0.5};
  const auto res = experiments::run_sweep(s, opts_for(root));
  ASSERT_EQ(res.points.size(), 2u);
  EXPECT_EQ(res.points[0].coords.at("tau_factor"), 0.5);
  EXPECT_DOUBLE_EQ(res.points[0].coords.at("tau"), 0.5 * s.data.grid.tau);
  EXPECT_EQ(read_csv(root / "interval.csv").size(), 3u);
  fs::remove_all(root);
}

TEST(Sweep, ScalingEmitsMatrixAndFrontier) {
  const auto root = testing::temp_dir("scaling");
  auto s = tiny(Kind::kScaling);
  s.scaling_qubits = {1, 2};
  s.scaling_steps = {3, 5};
  s.frontier = -1.0;  // every cell qualifies, so the frontier is the smallest S
  const auto res = experiments::run_sweep(s, opts_for(root));
  ASSERT_EQ(res.points.size(), 4u);
  const auto m = read_csv(root / "scaling_matrix.csv");
  ASSERT_EQ(m.size(), 3u);
  EXPECT_EQ(m[0], (std::vector<std::string>{"n_qubits", "S=3", "S=5"}));
  const auto f = read_csv(root / "scaling_frontier.csv");
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f[1][1], "3");
  EXPECT_EQ(f[2][1], "3");

  s.frontier = 2.0;  // unreachable
  const auto root2 = testing::temp_dir("scaling2");
  experiments::run_sweep(s, opts_for(root2));
  const auto f2 = read_csv(root2 / "scaling_frontier.csv");
  EXPECT_EQ(f2[1][1], "");
  fs::remove_all(root);
  fs::remove_all(root2);
}

TEST(Sweep, SingleKindRunsOneExperiment) {
  const auto root = testing::temp_dir("single");
  const auto res = experiments::run_sweep(tiny(), opts_for(root));
  ASSERT_EQ(res.points.size(), 1u);
  EXPECT_TRUE(fs::exists(root / "report.csv"));
  fs::remove_all(root);
}

}  // namespace
}  // namespace hamlearn
