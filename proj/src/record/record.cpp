#include "hamlearn/record.hpp"

#include <cmath>
#include <random>
#include <string>

#include "hamlearn/errors.hpp"

namespace hamlearn::record {

using qsim::Axis;
using qsim::CMatrix;
using qsim::CVector;

void SamplingGrid::validate() const {
  if (!(tau > 0.0)) throw SpecError("sampling interval tau must be positive");
  if (n_points < 1) throw SpecError("number of sampling points must be positive");
}

namespace {

template <typename State>
void write_row(MeasurementRecord& rec, int s, const State& state) {
  const std::size_t base = static_cast<std::size_t>(s) * static_cast<std::size_t>(rec.cols());
  for (int q = 1; q <= rec.n_qubits; ++q) {
    const std::size_t col = base + 3 * static_cast<std::size_t>(q - 1);
    rec.values[col] = qsim::expectation(state, q, Axis::kX);
    rec.values[col + 1] = qsim::expectation(state, q, Axis::kY);
    rec.values[col + 2] = qsim::expectation(state, q, Axis::kZ);
  }
}

int slices_per_interval(const qsim::HamiltonianSpec& spec, double tau, double max_slice) {
  if (!spec.time_dependent()) return 1;
  if (!(max_slice > 0.0)) throw SpecError("max_slice must be positive");
  return std::max(1, static_cast<int>(std::ceil(tau / max_slice - 1e-9)));
}

void record_pure(const qsim::HamiltonianSpec& spec, MeasurementRecord& rec, int slices) {
  const double tau = rec.grid.tau;
  qsim::StateVector psi = qsim::initial_state(spec.n_qubits);
  if (!spec.time_dependent()) {
    // Exact: psi(t) = V exp(-i L t) V^dag psi0, evaluated at each grid time.
    const auto es = qsim::eigensystem(qsim::assemble_hamiltonian(spec, 0.0));
    const CVector coeffs = es.vectors.adjoint() * psi.amplitudes;
    CVector rotated(coeffs.size());
    for (int s = 0; s < rec.rows(); ++s) {
      const double t = tau * (s + 1);
      for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
        rotated(k) = std::polar(1.0, -es.values(k) * t) * coeffs(k);
      }
      write_row(rec, s, qsim::StateVector{es.vectors * rotated});
    }
    return;
  }
  for (int s = 0; s < rec.rows(); ++s) {
    psi = qsim::evolve_interval(psi, spec, tau * s, tau * (s + 1), slices);
    write_row(rec, s, psi);
  }
}

void record_dephased(const qsim::HamiltonianSpec& spec, const std::vector<double>& t2,
                     MeasurementRecord& rec, int slices) {
  const double tau = rec.grid.tau;
  qsim::DensityMatrix rho = qsim::to_density(qsim::initial_state(spec.n_qubits));
  CMatrix u;
  if (!spec.time_dependent()) u = qsim::interval_propagator(spec, 0.0, tau, 1);
  for (int s = 0; s < rec.rows(); ++s) {
    if (spec.time_dependent()) u = qsim::interval_propagator(spec, tau * s, tau * (s + 1), slices);
    rho.entries = u * rho.entries * u.adjoint();
    rho = qsim::apply_dephasing(rho, t2, tau);
    write_row(rec, s, rho);
  }
}

}  // namespace

MeasurementRecord record_trajectory(const qsim::HamiltonianSpec& spec, const SamplingGrid& grid,
                                    const NoiseSpec& noise, const RecordOptions& opts) {
  spec.validate();
  grid.validate();
  if (noise.gaussian_sigma < 0.0) throw SpecError("Gaussian noise sigma must be non-negative");
  if (!noise.t2.empty() && noise.t2.size() != static_cast<std::size_t>(spec.n_qubits)) {
    throw SpecError("expected " + std::to_string(spec.n_qubits) + " T2 values, got " +
                    std::to_string(noise.t2.size()));
  }
  MeasurementRecord rec;
  rec.n_qubits = spec.n_qubits;
  rec.grid = grid;
  rec.values.assign(static_cast<std::size_t>(grid.n_points) * 3 *
                        static_cast<std::size_t>(spec.n_qubits),
                    0.0);
  const int slices = slices_per_interval(spec, grid.tau, opts.max_slice);
  if (noise.t2.empty()) {
    record_pure(spec, rec, slices);
  } else {
    record_dephased(spec, noise.t2, rec, slices);
  }
  if (noise.gaussian_sigma > 0.0) {
    add_gaussian_noise_inplace(rec.values, noise.gaussian_sigma, noise.rng_seed);
  }
  return rec;
}

void add_gaussian_noise_inplace(std::span<double> values, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw SpecError("Gaussian noise sigma must be non-negative");
  if (sigma == 0.0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, sigma);
  for (double& v : values) v += dist(rng);
}

MeasurementRecord add_gaussian_noise(const MeasurementRecord& rec, double sigma,
                                     std::uint64_t seed) {
  MeasurementRecord out = rec;
  add_gaussian_noise_inplace(out.values, sigma, seed);
  return out;
}

std::vector<double> flatten_record(const MeasurementRecord& rec) { return rec.values; }

MeasurementRecord unflatten_record(std::span<const double> flat, int n_qubits,
                                   const SamplingGrid& grid) {
  const std::size_t want = static_cast<std::size_t>(grid.n_points) * 3 *
                           static_cast<std::size_t>(n_qubits);
  if (flat.size() != want) {
    throw ShapeError("flattened record has " + std::to_string(flat.size()) +
                     " entries, expected " + std::to_string(want));
  }
  return MeasurementRecord{n_qubits, grid, std::vector<double>(flat.begin(), flat.end())};
}

}  // namespace hamlearn::record
