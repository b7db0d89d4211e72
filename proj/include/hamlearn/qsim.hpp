#pragma once

// Exact dense simulation of small spin chains.
//
// Basis convention: qubit 1 is the most significant tensor factor, i.e. qubit i
// (1-based) is bit (N - i) of a computational-basis index.

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hamlearn::qsim {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr int kDefaultMaxQubits = 10;
/// Default Trotter slice for time-dependent generators: tau/10 at tau = 0.02*pi.
inline constexpr double kDefaultMaxSlice = 0.002 * 3.14159265358979323846;

enum class Axis { kX = 0, kY = 1, kZ = 2 };

class PauliString {
 public:
  /// letters over {I, X, Y, Z}; letters[0] acts on qubit 1.
  explicit PauliString(std::string letters);
  /// Identity everywhere except `letter` on `qubit` (1-based).
  static PauliString single(int n_qubits, int qubit, char letter);
  /// Identity everywhere except `letter` on qubits `q` and `q + 1`.
  static PauliString pair(int n_qubits, int q, char letter);

  int n_qubits() const { return static_cast<int>(letters_.size()); }
  const std::string& letters() const { return letters_; }
  bool is_identity() const;

 private:
  std::string letters_;
};

enum class Family { kXyChainZField, kXyzChain, kXyChainTdZField };

std::string_view family_name(Family f);
/// Accepts the snake_case names used on disk and on the command line.
Family parse_family(std::string_view name);

struct FourierTerm {
  double amplitude = 0.0;  // F_w
  double frequency = 0.0;  // nu_w
  double phase = 0.0;      // phi_w
};

/// A member of one of the supported Hamiltonian families.
///
/// static_params layout:
///   kXyChainZField   [a_z(1..N), J(1..N-1)]
///   kXyzChain        [a_z(1..N), Jx(1..N-1), Jy(1..N-1), Jz(1..N-1)]
///   kXyChainTdZField [J(1..N-1)], fields from fourier_params[i]
struct HamiltonianSpec {
  Family family = Family::kXyChainZField;
  int n_qubits = 1;
  std::vector<double> static_params;
  std::vector<std::vector<FourierTerm>> fourier_params;
  double j0 = 1.0;

  bool time_dependent() const { return family == Family::kXyChainTdZField; }
  /// z-field on `qubit` (1-based) at time t.
  double field(int qubit, double t) const;
  /// Throws SpecError on length or range violations.
  void validate() const;
};

std::size_t static_param_count(Family f, int n_qubits);

struct StateVector {
  CVector amplitudes;
  int n_qubits() const;
};

struct DensityMatrix {
  CMatrix entries;
  int n_qubits() const;
};

struct HermitianOperator {
  CMatrix entries;
};

struct Eigensystem {
  Eigen::VectorXd values;
  CMatrix vectors;  // columns are eigenvectors
};

HermitianOperator pauli_matrix(const PauliString& ps, int max_qubits = kDefaultMaxQubits);

HermitianOperator assemble_hamiltonian(const HamiltonianSpec& spec, double t);

/// Product state of Rz(pi/4) Ry(pi/4)|0> on every qubit, R_a(t) = exp(-i t sigma_a / 2).
StateVector initial_state(int n_qubits, int max_qubits = kDefaultMaxQubits);

Eigensystem eigensystem(const HermitianOperator& h);

/// exp(-i h dt) through the eigendecomposition of h.
CMatrix propagator(const HermitianOperator& h, double dt);
CMatrix propagator(const Eigensystem& es, double dt);

/// Evolves from t0 to t1 with n_slices piecewise-constant midpoint propagators
/// (one exact propagator for static families).
StateVector evolve_interval(const StateVector& state, const HamiltonianSpec& spec, double t0,
                            double t1, int n_slices);

/// evolve_interval from t = 0.
StateVector evolve_pure(const StateVector& state, const HamiltonianSpec& spec, double t_final,
                        int n_slices);

/// Propagator over [t0, t1] using the same slicing rule as evolve_interval.
CMatrix interval_propagator(const HamiltonianSpec& spec, double t0, double t1, int n_slices);

/// Kraus weight of the identity branch for one dephasing slice.
double dephasing_lambda(double dtau, double t2);

/// Applies the per-qubit channel E0 = sqrt(l) I, E1 = sqrt(1 - l) Z with
/// l = (1 + exp(-dtau / T2_i)) / 2 to every qubit.
DensityMatrix apply_dephasing(const DensityMatrix& rho, std::span<const double> t2, double dtau);

DensityMatrix to_density(const StateVector& psi);

/// Throws ValidationError unless rho is Hermitian with unit trace and no
/// eigenvalue below -1e-10.
void validate_density(const DensityMatrix& rho);

double expectation(const StateVector& psi, int qubit, Axis axis);
double expectation(const DensityMatrix& rho, int qubit, Axis axis);

}  // namespace hamlearn::qsim
