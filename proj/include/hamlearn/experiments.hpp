#pragma once

// End-to-end experiments: presets, evaluation with on-the-fly test-set
// corruption, single training runs with dataset caching, and sweeps.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hamlearn/dataset.hpp"
#include "hamlearn/neuralnet/checkpoint.hpp"
#include "hamlearn/neuralnet/trainer.hpp"

namespace hamlearn::experiments {

enum class Tier { kDesk, kPaper };
std::string tier_name(Tier t);
Tier parse_tier(const std::string& name);

enum class Kind { kSingle, kNoise, kDecoherence, kInterval, kScaling };
std::string kind_name(Kind k);
Kind parse_kind(const std::string& name);

/// Raised for a preset name/tier combination that does not exist. The
/// message lists the valid names.
class UnknownPresetError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Perturbation applied to a clean test set before evaluation.
struct Corruption {
  double gauss_eps = 0.0;
  std::vector<double> t2;  // empty: none; one value (all qubits) or one per qubit
  std::uint64_t seed = 0;

  bool none() const { return gauss_eps == 0.0 && t2.empty(); }
};

struct ExperimentSpec {
  std::string name = "custom";
  Tier tier = Tier::kDesk;
  Kind kind = Kind::kSingle;
  std::string description;
  std::uint64_t seed = 1;

  dataset::DatasetMeta data;  // training data; n_samples is the training count
  std::size_t test_samples = 1000;
  int hidden = 64;
  nn::TrainConfig train;
  double val_fraction = 0.1;
  Corruption eval;  // eval.seed == 0 derives one from `seed`

  // noise sweep
  std::vector<double> noise_train_eps{0.0, 0.1};
  std::vector<int> noise_steps{25, 50};
  std::vector<double> noise_test_eps{0.0, 0.02, 0.04, 0.06, 0.08, 0.1};
  // decoherence sweep: test T2 values; T2-trained model draws from [min, max]
  std::vector<double> t2_grid;
  double t2_train_min = 0.0;
  double t2_train_max = 0.0;
  // interval sweep: multiples of data.grid.tau
  std::vector<double> interval_factors{0.01, 0.03, 0.05, 0.07, 0.09, 1.0};
  // scaling sweep
  std::vector<int> scaling_qubits{2, 3, 4};
  std::vector<int> scaling_steps{5, 10, 25};
  double frontier = 0.99;

  void validate() const;
  nn::NetworkArch arch() const;
  /// Training and test dataset descriptions, seeds derived from `seed`.
  dataset::DatasetMeta train_meta() const;
  dataset::DatasetMeta test_meta() const;
};

/// Flat "section.key" = value view used for config files and digests.
std::vector<std::pair<std::string, std::string>> to_key_values(const ExperimentSpec& spec);
/// Throws std::invalid_argument for unknown keys or unparsable values.
void set_key(ExperimentSpec& spec, const std::string& key, const std::string& value);
/// FNV-1a over the canonical key/value text, as 16 hex digits.
std::string config_digest(const ExperimentSpec& spec);

struct PresetInfo {
  std::string name;
  Tier tier;
  Kind kind;
  std::string description;
};
std::vector<PresetInfo> preset_catalog();
ExperimentSpec get_preset(const std::string& name, Tier tier);

struct EvalReport {
  double mean_similarity = 0.0;  // over samples with a defined similarity
  double mse = 0.0;
  std::size_t n_samples = 0;
  std::size_t undefined = 0;
  std::vector<double> similarity;  // per sample; NaN where undefined
  std::vector<double> sample_mse;
  double runtime_seconds = 0.0;
  std::string config_digest;
};

EvalReport evaluate(const nn::Network& net, const std::vector<dataset::Sample>& samples,
                    const std::string& digest = {});

/// Corrupted copy of a generated test set. T2 corruption regenerates every
/// record from the dataset's own metadata with dephasing switched on, so the
/// samples must be exactly those the metadata describes; Gaussian noise is
/// added afterwards with per-sample seeds derived from c.seed.
std::vector<dataset::Sample> corrupt(const dataset::Dataset& clean, const Corruption& c,
                                     int jobs = 1);

/// Summary (one header row, one data row) and per-sample CSVs.
void write_report(const std::filesystem::path& summary_csv,
                  const std::filesystem::path& per_sample_csv, const EvalReport& report);
/// epoch,train_loss,val_loss,val_F
void write_metrics(const std::filesystem::path& csv, const std::vector<nn::EpochMetrics>& history);

struct RunOptions {
  std::filesystem::path out_dir;
  std::filesystem::path cache_dir;  // empty: <out_dir>/data
  int jobs = 1;
  std::function<void(const std::string&)> log;  // progress lines, optional
};

/// Reuses <cache_dir>/<stem>.{train,test} when they hold exactly `meta`.
dataset::Dataset cached_dataset(const dataset::DatasetMeta& meta,
                                const std::filesystem::path& cache_dir, const std::string& role,
                                int jobs);

struct RunResult {
  nn::Checkpoint checkpoint;  // best-validation parameters
  EvalReport report;
  std::vector<nn::EpochMetrics> history;
  std::filesystem::path checkpoint_path;
  std::filesystem::path metrics_path;
  std::filesystem::path report_path;
};

/// Generate or reuse data, train, evaluate on the (optionally corrupted) test
/// set, and write <name>.ckpt, <name>.last.ckpt, metrics.csv, report.csv,
/// per_sample.csv and effective_config.ini into out_dir.
RunResult run_experiment(const ExperimentSpec& spec, const RunOptions& opts);

struct SweepPoint {
  std::string model;
  std::map<std::string, double> coords;
  double mean_similarity = 0.0;
  double mse = 0.0;
  std::size_t undefined = 0;
};

struct SweepResult {
  Kind kind = Kind::kSingle;
  std::vector<SweepPoint> points;
  std::vector<std::filesystem::path> tables;
};

/// Runs the sweep named by spec.kind; kSingle runs one experiment and returns
/// a single point.
SweepResult run_sweep(const ExperimentSpec& spec, const RunOptions& opts);

/// Writes the canonical key/value text as an INI file.
void write_effective_config(const std::filesystem::path& path, const ExperimentSpec& spec);

}  // namespace hamlearn::experiments
