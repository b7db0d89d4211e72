#include <cmath>
#include <string>

#include "hamlearn/errors.hpp"
#include "hamlearn/qsim.hpp"

namespace hamlearn::qsim {
namespace {

constexpr double kHermitianTol = 1e-10;

int qubits_for_dim(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim) throw ValidationError("dimension is not a power of two");
  return n;
}

void require_hermitian(const CMatrix& m, const char* what) {
  if (m.rows() != m.cols()) throw ValidationError(std::string(what) + " is not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (dev > kHermitianTol * scale) {
    throw ValidationError(std::string(what) + " is not Hermitian (max deviation " +
                          std::to_string(dev) + ")");
  }
}

void check_qubit(int qubit, int n) {
  if (qubit < 1 || qubit > n) {
    throw std::out_of_range("qubit index " + std::to_string(qubit) + " outside 1.." +
                            std::to_string(n));
  }
}

}  // namespace

int StateVector::n_qubits() const { return qubits_for_dim(amplitudes.size()); }

int DensityMatrix::n_qubits() const { return qubits_for_dim(entries.rows()); }

Eigensystem eigensystem(const HermitianOperator& h) {
  require_hermitian(h.entries, "generator");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.entries);
  if (solver.info() != Eigen::Success) throw ValidationError("eigendecomposition failed");
  return Eigensystem{solver.eigenvalues(), solver.eigenvectors()};
}

CMatrix propagator(const Eigensystem& es, double dt) {
  if (dt < 0.0) throw ValidationError("propagator duration must be non-negative");
  const Eigen::Index dim = es.values.size();
  CVector phases(dim);
  for (Eigen::Index k = 0; k < dim; ++k) phases(k) = std::polar(1.0, -es.values(k) * dt);
  return es.vectors * phases.asDiagonal() * es.vectors.adjoint();
}

CMatrix propagator(const HermitianOperator& h, double dt) {
  if (dt < 0.0) throw ValidationError("propagator duration must be non-negative");
  if (dt == 0.0) {
    require_hermitian(h.entries, "generator");
    return CMatrix::Identity(h.entries.rows(), h.entries.cols());
  }
  return propagator(eigensystem(h), dt);
}

CMatrix interval_propagator(const HamiltonianSpec& spec, double t0, double t1, int n_slices) {
  if (n_slices < 1) throw SpecError("n_slices must be at least 1");
  if (t1 < t0) throw SpecError("interval end precedes its start");
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << spec.n_qubits);
  if (t1 == t0) return CMatrix::Identity(dim, dim);
  if (!spec.time_dependent()) return propagator(assemble_hamiltonian(spec, t0), t1 - t0);

  const double dt = (t1 - t0) / n_slices;
  CMatrix u = CMatrix::Identity(dim, dim);
  for (int k = 0; k < n_slices; ++k) {
    const double mid = t0 + (k + 0.5) * dt;
    u = propagator(assemble_hamiltonian(spec, mid), dt) * u;
  }
  return u;
}

StateVector evolve_interval(const StateVector& state, const HamiltonianSpec& spec, double t0,
                            double t1, int n_slices) {
  if (n_slices < 1) throw SpecError("n_slices must be at least 1");
  if (state.amplitudes.size() != (Eigen::Index{1} << spec.n_qubits)) {
    throw ShapeError("state dimension does not match the Hamiltonian");
  }
  if (t1 == t0) return state;
  if (!spec.time_dependent()) {
    return StateVector{propagator(assemble_hamiltonian(spec, t0), t1 - t0) * state.amplitudes};
  }
  const double dt = (t1 - t0) / n_slices;
  CVector psi = state.amplitudes;
  for (int k = 0; k < n_slices; ++k) {
    const double mid = t0 + (k + 0.5) * dt;
    psi = propagator(assemble_hamiltonian(spec, mid), dt) * psi;
  }
  return StateVector{std::move(psi)};
}

StateVector evolve_pure(const StateVector& state, const HamiltonianSpec& spec, double t_final,
                        int n_slices) {
  if (t_final < 0.0) throw SpecError("t_final must be non-negative");
  return evolve_interval(state, spec, 0.0, t_final, n_slices);
}

double dephasing_lambda(double dtau, double t2) {
  if (!(dtau > 0.0)) throw ValidationError("dephasing slice must be positive");
  if (!(t2 > 0.0)) throw ValidationError("T2 must be positive");
  return 0.5 * (1.0 + std::exp(-dtau / t2));
}

DensityMatrix apply_dephasing(const DensityMatrix& rho, std::span<const double> t2, double dtau) {
  const CMatrix& r = rho.entries;
  require_hermitian(r, "density matrix");
  const int n = rho.n_qubits();
  if (t2.size() != static_cast<std::size_t>(n)) {
    throw ShapeError("expected " + std::to_string(n) + " T2 values, got " +
                     std::to_string(t2.size()));
  }
  const double trace = r.trace().real();
  if (std::abs(trace - 1.0) > kHermitianTol) {
    throw ValidationError("density matrix trace " + std::to_string(trace) + " is not 1");
  }
  // lambda rho + (1 - lambda) Z rho Z scales rho_ab by (2 lambda - 1) when
  // qubit i differs between a and b.
  std::vector<double> factor(static_cast<std::size_t>(n));
  for (int q = 0; q < n; ++q) {
    factor[static_cast<std::size_t>(q)] = 2.0 * dephasing_lambda(dtau, t2[static_cast<std::size_t>(q)]) - 1.0;
  }
  const Eigen::Index dim = r.rows();
  CMatrix out = r;
  for (Eigen::Index a = 0; a < dim; ++a) {
    for (Eigen::Index b = 0; b < dim; ++b) {
      const auto diff = static_cast<std::size_t>(a ^ b);
      if (diff == 0) continue;
      double scale = 1.0;
      for (int q = 0; q < n; ++q) {
        if ((diff >> (n - 1 - q)) & 1U) scale *= factor[static_cast<std::size_t>(q)];
      }
      out(a, b) *= scale;
    }
  }
  return DensityMatrix{std::move(out)};
}

DensityMatrix to_density(const StateVector& psi) {
  return DensityMatrix{psi.amplitudes * psi.amplitudes.adjoint()};
}

void validate_density(const DensityMatrix& rho) {
  require_hermitian(rho.entries, "density matrix");
  const double trace = rho.entries.trace().real();
  if (std::abs(trace - 1.0) > 1e-10) {
    throw ValidationError("density matrix trace " + std::to_string(trace) + " is not 1");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(rho.entries, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -1e-10) {
    throw ValidationError("density matrix has a negative eigenvalue");
  }
}

double expectation(const StateVector& psi, int qubit, Axis axis) {
  const int n = psi.n_qubits();
  check_qubit(qubit, n);
  const std::size_t mask = std::size_t{1} << (n - qubit);
  const auto dim = static_cast<std::size_t>(psi.amplitudes.size());
  const auto& a = psi.amplitudes;
  double acc = 0.0;
  if (axis == Axis::kZ) {
    for (std::size_t b = 0; b < dim; ++b) {
      const double p = std::norm(a(static_cast<Eigen::Index>(b)));
      acc += (b & mask) ? -p : p;
    }
    return acc;
  }
  // pairs (b, b | mask) with the qubit bit clear: <X> = 2 Re z, <Y> = 2 Im z,
  // z = conj(psi_b0) psi_b1
  for (std::size_t b = 0; b < dim; ++b) {
    if (b & mask) continue;
    const Complex z = std::conj(a(static_cast<Eigen::Index>(b))) *
                      a(static_cast<Eigen::Index>(b | mask));
    acc += axis == Axis::kX ? z.real() : z.imag();
  }
  return 2.0 * acc;
}

double expectation(const DensityMatrix& rho, int qubit, Axis axis) {
  const int n = rho.n_qubits();
  check_qubit(qubit, n);
  const std::size_t mask = std::size_t{1} << (n - qubit);
  const auto dim = static_cast<std::size_t>(rho.entries.rows());
  const auto& r = rho.entries;
  double acc = 0.0;
  if (axis == Axis::kZ) {
    for (std::size_t b = 0; b < dim; ++b) {
      const double p = r(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b)).real();
      acc += (b & mask) ? -p : p;
    }
    return acc;
  }
  // Tr(rho X) = 2 Re w, Tr(rho Y) = -2 Im w, w = rho(b0, b1)
  for (std::size_t b = 0; b < dim; ++b) {
    if (b & mask) continue;
    const Complex w = r(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b | mask));
    acc += axis == Axis::kX ? w.real() : -w.imag();
  }
  return 2.0 * acc;
}

}  // namespace hamlearn::qsim
