#pragma once

#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "hamlearn/qsim.hpp"

namespace hamlearn::record {

/// Sampling interval used throughout the reference experiments: 0.02 pi / J0.
inline constexpr double kReferenceTau = 0.02 * std::numbers::pi;

struct SamplingGrid {
  double tau = kReferenceTau;
  int n_points = 25;

  double total_time() const { return tau * n_points; }
  void validate() const;
  bool operator==(const SamplingGrid&) const = default;
};

struct NoiseSpec {
  double gaussian_sigma = 0.0;
  std::vector<double> t2;  // empty: no dephasing; else one value per qubit
  std::uint64_t rng_seed = 0;

  bool noiseless() const { return gaussian_sigma == 0.0 && t2.empty(); }
};

/// S x 3N single-qubit expectations, row s-1 taken at time s * tau.
/// Column 3(i-1) + k holds <sigma_k^(i)> with k = x, y, z.
struct MeasurementRecord {
  int n_qubits = 0;
  SamplingGrid grid;
  std::vector<double> values;  // row-major

  int rows() const { return grid.n_points; }
  int cols() const { return 3 * n_qubits; }
  double at(int s, int col) const {
    return values[static_cast<std::size_t>(s) * static_cast<std::size_t>(cols()) +
                  static_cast<std::size_t>(col)];
  }
};

struct RecordOptions {
  /// Upper bound on the Trotter slice for time-dependent generators.
  double max_slice = qsim::kDefaultMaxSlice;
};

MeasurementRecord record_trajectory(const qsim::HamiltonianSpec& spec, const SamplingGrid& grid,
                                    const NoiseSpec& noise, const RecordOptions& opts = {});

/// Adds i.i.d. N(0, sigma) to every entry; sigma == 0 returns the input.
MeasurementRecord add_gaussian_noise(const MeasurementRecord& rec, double sigma,
                                     std::uint64_t seed);
void add_gaussian_noise_inplace(std::span<double> values, double sigma, std::uint64_t seed);

/// Time-major flattening: (x, y, z of qubit 1..N at tau), then at 2 tau, ...
std::vector<double> flatten_record(const MeasurementRecord& rec);
MeasurementRecord unflatten_record(std::span<const double> flat, int n_qubits,
                                   const SamplingGrid& grid);

}  // namespace hamlearn::record
