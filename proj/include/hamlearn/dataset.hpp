#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <utility>
#include <vector>

#include "hamlearn/qsim.hpp"
#include "hamlearn/record.hpp"

namespace hamlearn::dataset {

inline constexpr int kFormatVersion = 1;
inline constexpr int kDefaultFourierTerms = 10;

struct DatasetMeta {
  qsim::Family family = qsim::Family::kXyChainZField;
  int n_qubits = 2;
  record::SamplingGrid grid;
  double j0 = 1.0;
  int fourier_terms = kDefaultFourierTerms;  // W, time-dependent family only
  double gauss_eps = 0.0;
  std::vector<double> t2;  // fixed per-qubit T2, empty when unused
  // When t2_max > 0 each sample draws one T2, shared by all qubits, uniformly
  // from [t2_min, t2_max]. Mutually exclusive with `t2`.
  double t2_min = 0.0;
  double t2_max = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t master_seed = 0;
  int format_version = kFormatVersion;

  std::size_t input_length() const;   // 3 N S
  std::size_t target_length() const;  // M
  bool random_t2() const { return t2_max > 0.0; }
  void validate() const;
  bool operator==(const DatasetMeta&) const = default;
};

struct Sample {
  std::vector<double> input;
  std::vector<double> target;
};

struct Dataset {
  DatasetMeta meta;
  std::vector<Sample> samples;
};

/// splitmix64 finalizer over (master_seed, index); independent of generation order.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index);

/// Draws a uniformly random member of the family. Static parameters and
/// Fourier amplitudes/frequencies are uniform on [-j0, j0], phases on [0, 2 pi).
qsim::HamiltonianSpec sample_parameters(qsim::Family family, int n_qubits, std::mt19937_64& rng,
                                        double j0 = 1.0,
                                        int fourier_terms = kDefaultFourierTerms);

/// Learning target for a spec. Static families: the parameter vector.
/// Time-dependent family: fields a_z^(i)(s tau) time-major (s outer, i inner)
/// followed by the N-1 couplings.
std::vector<double> target_from_spec(const qsim::HamiltonianSpec& spec,
                                     const record::SamplingGrid& grid);

/// Inverse of target_from_spec for static families.
qsim::HamiltonianSpec spec_from_target(qsim::Family family, int n_qubits,
                                       std::span<const double> target, double j0 = 1.0);

/// Sample `index` of the dataset described by meta (pure function).
Sample generate_sample(const DatasetMeta& meta, std::size_t index);

/// All samples; `jobs` worker threads, result independent of `jobs`.
std::vector<Sample> generate_samples(const DatasetMeta& meta, int jobs = 1);

/// generate_samples + write_dataset.
void generate_dataset(const DatasetMeta& meta, const std::filesystem::path& path, int jobs = 1);

void write_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& path);

/// Deterministic shuffle-then-split; first part gets round(fraction * n).
std::pair<std::vector<Sample>, std::vector<Sample>> split_dataset(
    const std::vector<Sample>& samples, double fraction, std::uint64_t seed);

}  // namespace hamlearn::dataset
