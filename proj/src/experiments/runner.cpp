#include <chrono>
#include <cstdio>
#include <random>

#include "hamlearn/errors.hpp"
#include "hamlearn/experiments.hpp"
#include "hamlearn/textio.hpp"

namespace hamlearn::experiments {
namespace {

namespace fs = std::filesystem;

std::string meta_digest(const dataset::DatasetMeta& m) {
  std::string key(qsim::family_name(m.family));
  auto add = [&](double v) {
    key += '|';
    textio::append_double(key, v);
  };
  add(m.n_qubits);
  add(m.grid.tau);
  add(m.grid.n_points);
  add(m.j0);
  add(m.fourier_terms);
  add(m.gauss_eps);
  for (double t : m.t2) add(t);
  add(m.t2_min);
  add(m.t2_max);
  add(static_cast<double>(m.n_samples));
  key += '|' + std::to_string(m.master_seed);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : key) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void say(const RunOptions& o, const std::string& line) {
  if (o.log) o.log(line);
}

}  // namespace

dataset::Dataset cached_dataset(const dataset::DatasetMeta& meta, const fs::path& cache_dir,
                                const std::string& role, int jobs) {
  meta.validate();
  fs::create_directories(cache_dir);
  const std::string stem = std::string(qsim::family_name(meta.family)) + "_n" +
                           std::to_string(meta.n_qubits) + "_s" +
                           std::to_string(meta.grid.n_points) + "_" + meta_digest(meta);
  const fs::path path = cache_dir / (stem + "." + role);
  if (fs::exists(path)) {
    try {
      auto ds = dataset::load_dataset(path);
      if (ds.meta == meta) return ds;
    } catch (const FormatError&) {
      // stale or partial file; regenerate below
    }
  }
  dataset::Dataset ds{meta, dataset::generate_samples(meta, jobs)};
  // write-then-rename so concurrent sweeps never read a partial file
  const fs::path tmp = path.string() + ".tmp" + std::to_string(std::random_device{}());
  dataset::write_dataset(tmp, ds);
  fs::rename(tmp, path);
  return ds;
}

RunResult run_experiment(const ExperimentSpec& spec, const RunOptions& opts) {
  spec.validate();
  if (opts.out_dir.empty()) throw std::invalid_argument("run needs an output directory");
  fs::create_directories(opts.out_dir);
  const fs::path cache = opts.cache_dir.empty() ? opts.out_dir / "data" : opts.cache_dir;
  const std::string digest = config_digest(spec);
  write_effective_config(opts.out_dir / "effective_config.ini", spec);

  say(opts, spec.name + ": preparing " + std::to_string(spec.data.n_samples) + " training and " +
                std::to_string(spec.test_samples) + " test samples");
  const auto train_ds = cached_dataset(spec.train_meta(), cache, "train", opts.jobs);
  const auto test_ds = cached_dataset(spec.test_meta(), cache, "test", opts.jobs);
  auto [train_set, val_set] =
      dataset::split_dataset(train_ds.samples, 1.0 - spec.val_fraction, dataset::derive_seed(spec.seed, 3));

  const auto arch = spec.arch();
  const nn::Network init(arch, nn::init_params(arch, dataset::derive_seed(spec.seed, 4)));
  nn::TrainConfig tc = spec.train;
  tc.seed = dataset::derive_seed(spec.seed, 5);
  const auto t0 = std::chrono::steady_clock::now();
  auto trained = nn::train(init, train_set, val_set, tc, std::nullopt, [&](const nn::EpochMetrics& m) {
    char line[160];
    std::snprintf(line, sizeof line, "%s: epoch %d train %.6g val %.6g val_F %.6f (%.0fs)",
                  spec.name.c_str(), m.epoch, m.train_loss, m.val_loss, m.val_similarity,
                  std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    say(opts, line);
  });

  RunResult out;
  out.history = trained.history;
  out.checkpoint = {arch, trained.params, spec.seed, trained.best_epoch, std::nullopt};
  out.checkpoint_path = opts.out_dir / (spec.name + ".ckpt");
  nn::save_checkpoint(out.checkpoint_path, out.checkpoint);
  nn::save_checkpoint(opts.out_dir / (spec.name + ".last.ckpt"),
                      {arch, trained.last_params, spec.seed, trained.last_epoch, trained.optimizer});

  Corruption c = spec.eval;
  if (c.seed == 0) c.seed = dataset::derive_seed(spec.seed, 6);
  const nn::Network net(arch, trained.params);
  out.report = evaluate(net, c.none() ? test_ds.samples : corrupt(test_ds, c, opts.jobs), digest);

  out.metrics_path = opts.out_dir / "metrics.csv";
  out.report_path = opts.out_dir / "report.csv";
  write_metrics(out.metrics_path, out.history);
  write_report(out.report_path, opts.out_dir / "per_sample.csv", out.report);
  char line[120];
  std::snprintf(line, sizeof line, "%s: test mean F %.6f, MSE %.6g (%zu undefined)",
                spec.name.c_str(), out.report.mean_similarity, out.report.mse, out.report.undefined);
  say(opts, line);
  return out;
}

}  // namespace hamlearn::experiments
