#include "hamlearn/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <deque>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "hamlearn/errors.hpp"
#include "hamlearn/neuralnet/checkpoint.hpp"
#include "hamlearn/neuralnet/trainer.hpp"

namespace hamlearn::cli {
namespace {

namespace fs = std::filesystem;
namespace ex = experiments;

// A command-line flag that is shorthand for one config key.
struct KeyFlag {
  std::string key;
  std::string value;
  CLI::Option* opt = nullptr;
};

struct Options {
  std::vector<std::string> configs;
  std::vector<std::string> sets;
  std::string out_dir = ".";
  std::string preset;
  std::string tier = "desk";
  int jobs = 0;
  std::deque<KeyFlag> flags;  // deque: options keep pointers into it
  std::map<std::string, std::string> io_flags;
};

void add_common(CLI::App* cmd, Options& o, bool with_preset) {
  cmd->add_option("-c,--config", o.configs, "INI config file, applied in order");
  cmd->add_option("--set", o.sets, "override as section.key=value, applied after config files");
  cmd->add_option("-o,--out", o.out_dir, "output directory")->capture_default_str();
  cmd->add_option("-j,--jobs", o.jobs, "worker threads (0: all cores; 1: reproducible order)");
  if (with_preset) cmd->add_option("--preset", o.preset, "start from a named preset");
  cmd->add_option("--tier", o.tier, "preset tier: desk or paper")->capture_default_str();
}

void add_key_flag(CLI::App* cmd, Options& o, const std::string& flag, const std::string& key,
                  const std::string& help) {
  auto& f = o.flags.emplace_back();
  f.key = key;
  f.opt = cmd->add_option(flag, f.value, help + " (" + key + ")");
}

void add_dataset_flags(CLI::App* cmd, Options& o) {
  add_key_flag(cmd, o, "--name", "run.name", "run name, used for file stems");
  add_key_flag(cmd, o, "--seed", "run.seed", "master seed");
  add_key_flag(cmd, o, "--family", "dataset.family", "Hamiltonian family");
  add_key_flag(cmd, o, "--n", "dataset.n_qubits", "number of qubits");
  add_key_flag(cmd, o, "--s", "dataset.steps", "sampling steps per record");
  add_key_flag(cmd, o, "--tau", "dataset.tau", "sampling interval");
  add_key_flag(cmd, o, "--train", "dataset.train", "training samples");
  add_key_flag(cmd, o, "--test", "dataset.test", "test samples");
}

void add_train_flags(CLI::App* cmd, Options& o) {
  add_key_flag(cmd, o, "--name", "run.name", "run name, used for file stems");
  add_key_flag(cmd, o, "--seed", "run.seed", "master seed");
  add_key_flag(cmd, o, "--hidden", "model.hidden", "LSTM width");
  add_key_flag(cmd, o, "--epochs", "train.epochs", "training epochs");
  add_key_flag(cmd, o, "--batch-size", "train.batch_size", "mini-batch size");
  add_key_flag(cmd, o, "--lr", "train.learning_rate", "Adam learning rate");
  add_key_flag(cmd, o, "--noise-eps", "train.noise_eps", "Gaussian input augmentation");
}

struct Resolved {
  ex::ExperimentSpec spec;
  std::set<std::string> explicit_keys;
  std::map<std::string, std::string> io;  // io.* entries, key without prefix
};

void assign(Resolved& r, const std::string& key, const std::string& value,
            const std::string& origin) {
  if (key.rfind("io.", 0) == 0) {
    r.io[key.substr(3)] = value;
    return;
  }
  try {
    ex::set_key(r.spec, key, value);
  } catch (const std::invalid_argument& e) {
    throw UsageError(origin + e.what());
  }
  r.explicit_keys.insert(key);
}

// Preset, then config files, then --set, then dedicated flags.
Resolved resolve(const Options& o) {
  Resolved r;
  ex::Tier tier;
  try {
    tier = ex::parse_tier(o.tier);
    r.spec = o.preset.empty() ? ex::ExperimentSpec{} : ex::get_preset(o.preset, tier);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  r.spec.tier = tier;
  for (const auto& path : o.configs) {
    for (const auto& [k, v] : read_config(path)) assign(r, k, v, path + ": ");
  }
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw UsageError("override '" + s + "' is not of the form section.key=value");
    }
    assign(r, s.substr(0, eq), s.substr(eq + 1), "--set: ");
  }
  for (const auto& f : o.flags) {
    if (f.opt->count() > 0) assign(r, f.key, f.value, f.opt->get_name() + ": ");
  }
  for (const auto& [k, v] : o.io_flags) {
    if (!v.empty()) r.io[k] = v;
  }
  return r;
}

template <class F>
void validated(F&& check) {
  try {
    check();
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

int jobs_of(const Options& o) {
  if (o.jobs > 0) return o.jobs;
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

void echo_config(const fs::path& dir, const Resolved& r) {
  const fs::path path = dir / "effective_config.ini";
  ex::write_effective_config(path, r.spec);
  if (r.io.empty()) return;
  std::ofstream out(path, std::ios::app);
  out << "\n[io]\n";
  for (const auto& [k, v] : r.io) out << k << " = " << v << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string abs_path(const std::string& p) { return fs::absolute(p).lexically_normal().string(); }

std::string require_io(const Resolved& r, const std::string& key, const std::string& flag) {
  const auto it = r.io.find(key);
  if (it == r.io.end() || it->second.empty()) {
    throw UsageError("missing " + flag + " (or io." + key + " in a config file)");
  }
  return it->second;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int cmd_gen(const Options& o, std::ostream& out, std::ostream& err) {
  Resolved r = resolve(o);
  validated([&] { r.spec.validate(); });
  const fs::path dir = o.out_dir;
  fs::create_directories(dir);
  const int jobs = jobs_of(o);
  const auto train_path = dir / (r.spec.name + ".train");
  const auto test_path = dir / (r.spec.name + ".test");
  err << "generating " << r.spec.data.n_samples << " training samples\n";
  dataset::generate_dataset(r.spec.train_meta(), train_path, jobs);
  err << "generating " << r.spec.test_samples << " test samples\n";
  dataset::generate_dataset(r.spec.test_meta(), test_path, jobs);
  echo_config(dir, r);
  out << train_path.string() << '\n' << test_path.string() << '\n';
  return kExitOk;
}

// Dataset keys given explicitly must agree with the file; everything else is
// taken from the file.
void adopt_dataset_meta(Resolved& r, const dataset::DatasetMeta& file) {
  const auto& want = r.spec.data;
  auto clash = [&](const std::string& key, const std::string& cfg, const std::string& got) {
    if (r.explicit_keys.count(key) && cfg != got) {
      throw std::runtime_error("dataset/config mismatch for " + key + ": configuration has " +
                               cfg + ", dataset file has " + got);
    }
  };
  clash("dataset.family", std::string(qsim::family_name(want.family)),
        std::string(qsim::family_name(file.family)));
  clash("dataset.n_qubits", std::to_string(want.n_qubits), std::to_string(file.n_qubits));
  clash("dataset.steps", "S=" + std::to_string(want.grid.n_points),
        "S=" + std::to_string(file.grid.n_points));
  clash("dataset.tau", fmt("%.17g", want.grid.tau), fmt("%.17g", file.grid.tau));
  clash("dataset.j0", fmt("%.17g", want.j0), fmt("%.17g", file.j0));
  clash("dataset.fourier_terms", std::to_string(want.fourier_terms),
        std::to_string(file.fourier_terms));
  r.spec.data = file;
  r.spec.data.master_seed = 0;
  r.spec.data.format_version = dataset::kFormatVersion;
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  Resolved r = resolve(o);
  const std::string data_path = abs_path(require_io(r, "data", "--data"));
  r.io["data"] = data_path;
  if (r.io.count("resume") && !r.io["resume"].empty()) r.io["resume"] = abs_path(r.io["resume"]);
  validated([&] { r.spec.train.validate(); });

  const auto ds = dataset::load_dataset(data_path);
  adopt_dataset_meta(r, ds.meta);
  validated([&] { r.spec.validate(); });
  const auto& spec = r.spec;
  const auto arch = spec.arch();

  std::optional<nn::ResumeState> resume;
  std::vector<double> init_params;
  if (r.io.count("resume") && !r.io["resume"].empty()) {
    auto ckpt = nn::load_checkpoint(r.io["resume"]);
    if (!(ckpt.arch == arch)) {
      throw std::runtime_error("checkpoint architecture (S=" + std::to_string(ckpt.arch.seq_len) +
                               ", hidden=" + std::to_string(ckpt.arch.hidden) +
                               ") differs from the configured one (S=" +
                               std::to_string(arch.seq_len) + ", hidden=" +
                               std::to_string(arch.hidden) + ")");
    }
    if (!ckpt.optimizer) {
      throw std::runtime_error(r.io["resume"] + " holds no optimizer state; resume from a .last.ckpt");
    }
    if (ckpt.epoch >= spec.train.epochs) {
      throw UsageError("checkpoint is already at epoch " + std::to_string(ckpt.epoch) +
                       "; raise train.epochs to continue");
    }
    resume = nn::ResumeState{*ckpt.optimizer, ckpt.epoch};
    init_params = std::move(ckpt.params);
  } else {
    init_params = nn::init_params(arch, dataset::derive_seed(spec.seed, 4));
  }

  auto [train_set, val_set] = dataset::split_dataset(ds.samples, 1.0 - spec.val_fraction,
                                                     dataset::derive_seed(spec.seed, 3));
  nn::TrainConfig tc = spec.train;
  tc.seed = dataset::derive_seed(spec.seed, 5);
  const nn::Network init(arch, std::move(init_params));
  auto result = nn::train(init, train_set, val_set, tc, resume, [&](const nn::EpochMetrics& m) {
    char line[128];
    std::snprintf(line, sizeof line, "epoch %d train %.6g val %.6g val_F %.6f\n", m.epoch,
                  m.train_loss, m.val_loss, m.val_similarity);
    err << line << std::flush;
  });

  const fs::path dir = o.out_dir;
  fs::create_directories(dir);
  nn::save_checkpoint(dir / (spec.name + ".ckpt"),
                      {arch, result.params, spec.seed, result.best_epoch, std::nullopt});
  nn::save_checkpoint(dir / (spec.name + ".last.ckpt"),
                      {arch, result.last_params, spec.seed, result.last_epoch, result.optimizer});
  ex::write_metrics(dir / "metrics.csv", result.history);
  echo_config(dir, r);
  out << "final validation F " << fmt("%.6f", result.history.back().val_similarity) << '\n';
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream&) {
  Resolved r = resolve(o);
  const std::string ckpt_path = abs_path(require_io(r, "checkpoint", "--checkpoint"));
  const std::string data_path = abs_path(require_io(r, "data", "--data"));
  r.io["checkpoint"] = ckpt_path;
  r.io["data"] = data_path;
  auto& c = r.spec.eval;
  validated([&] {
    if (c.gauss_eps < 0.0) throw std::invalid_argument("eval.gauss_eps must be non-negative");
    for (double v : c.t2) {
      if (!(v > 0.0)) throw std::invalid_argument("eval.t2 values must be positive");
    }
  });

  const auto ckpt = nn::load_checkpoint(ckpt_path);
  const auto ds = dataset::load_dataset(data_path);
  const auto want = nn::NetworkArch::for_dataset(ds.meta, ckpt.arch.hidden);
  if (!(want == ckpt.arch)) {
    throw std::runtime_error(
        "checkpoint expects S=" + std::to_string(ckpt.arch.seq_len) + " and " +
        std::to_string(ckpt.arch.input_dim) + " inputs per step, dataset has S=" +
        std::to_string(want.seq_len) + " and " + std::to_string(want.input_dim));
  }
  if (c.seed == 0) c.seed = dataset::derive_seed(r.spec.seed, 6);
  const nn::Network net(ckpt.arch, ckpt.params);
  const auto report = ex::evaluate(net, c.none() ? ds.samples : ex::corrupt(ds, c, jobs_of(o)),
                                   ex::config_digest(r.spec));
  const fs::path dir = o.out_dir;
  fs::create_directories(dir);
  ex::write_report(dir / "report.csv", dir / "per_sample.csv", report);
  echo_config(dir, r);
  out << "mean F " << fmt("%.6f", report.mean_similarity) << ", MSE "
      << fmt("%.6g", report.mse) << ", undefined " << report.undefined << '\n';
  return kExitOk;
}

int cmd_sweep(const Options& o, const std::string& cache, std::ostream& out, std::ostream& err) {
  if (o.preset.empty() && o.configs.empty()) throw UsageError("sweep needs a preset name or --config");
  Resolved r = resolve(o);
  validated([&] { r.spec.validate(); });
  ex::RunOptions ro;
  ro.out_dir = o.out_dir;
  ro.cache_dir = cache;
  ro.jobs = jobs_of(o);
  ro.log = [&](const std::string& line) { err << line << '\n' << std::flush; };
  const auto result = ex::run_sweep(r.spec, ro);
  for (const auto& t : result.tables) out << t.string() << '\n';
  return kExitOk;
}

int cmd_presets(const std::string& show, const std::string& tier, std::ostream& out) {
  if (!show.empty()) {
    ex::ExperimentSpec spec;
    try {
      spec = ex::get_preset(show, ex::parse_tier(tier));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    const auto kv = ex::to_key_values(spec);
    std::string section;
    for (const auto& [k, v] : kv) {
      const auto dot = k.find('.');
      if (k.substr(0, dot) != section) {
        section = k.substr(0, dot);
        out << '[' << section << "]\n";
      }
      out << k.substr(dot + 1) << " = " << v << '\n';
    }
    return kExitOk;
  }
  for (const auto& p : ex::preset_catalog()) {
    char line[96];
    std::snprintf(line, sizeof line, "%-14s %-6s %-12s ", p.name.c_str(),
                  ex::tier_name(p.tier).c_str(), ex::kind_name(p.kind).c_str());
    out << line << p.description << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hamiltonian learning from single-qubit measurement records"};
  app.require_subcommand(1);

  Options gen_o, train_o, eval_o, sweep_o;
  auto* gen = app.add_subcommand("gen", "generate <name>.train and <name>.test");
  add_common(gen, gen_o, true);
  add_dataset_flags(gen, gen_o);
  add_key_flag(gen, gen_o, "--gauss-eps", "dataset.gauss_eps", "noise on training records");

  auto* train = app.add_subcommand("train", "train a model on a dataset file");
  add_common(train, train_o, true);
  add_train_flags(train, train_o);
  add_key_flag(train, train_o, "--s", "dataset.steps", "expected sampling steps");
  add_key_flag(train, train_o, "--n", "dataset.n_qubits", "expected number of qubits");
  train->add_option("--data", train_o.io_flags["data"], "training dataset file");
  train->add_option("--resume", train_o.io_flags["resume"], "continue from a .last.ckpt");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a test set");
  add_common(eval, eval_o, false);
  add_key_flag(eval, eval_o, "--gauss-eps", "eval.gauss_eps", "Gaussian noise on test inputs");
  add_key_flag(eval, eval_o, "--t2", "eval.t2", "dephasing time for test records");
  add_key_flag(eval, eval_o, "--seed", "eval.seed", "corruption seed");
  eval->add_option("--checkpoint", eval_o.io_flags["checkpoint"], "checkpoint file");
  eval->add_option("--data", eval_o.io_flags["data"], "test dataset file");

  std::string cache;
  auto* sweep = app.add_subcommand("sweep", "run a preset experiment or sweep");
  add_common(sweep, sweep_o, false);
  sweep->add_option("preset", sweep_o.preset, "preset name (see `presets`)");
  sweep->add_option("--cache", cache, "dataset cache directory (default <out>/data)");
  add_key_flag(sweep, sweep_o, "--seed", "run.seed", "master seed");

  std::string show, show_tier = "desk";
  auto* presets = app.add_subcommand("presets", "list presets");
  presets->add_option("--show", show, "print one preset as INI");
  presets->add_option("--tier", show_tier, "tier for --show")->capture_default_str();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_o, out, err);
    if (train->parsed()) return cmd_train(train_o, out, err);
    if (eval->parsed()) return cmd_eval(eval_o, out, err);
    if (sweep->parsed()) return cmd_sweep(sweep_o, cache, out, err);
    if (presets->parsed()) return cmd_presets(show, show_tier, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace hamlearn::cli
