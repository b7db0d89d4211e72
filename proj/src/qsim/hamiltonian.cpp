#include <cmath>
#include <numbers>
#include <string>

#include "hamlearn/errors.hpp"
#include "hamlearn/qsim.hpp"

namespace hamlearn::qsim {
namespace {

constexpr double kRangeSlack = 1e-12;

void check_range(double v, double lo, double hi, const char* what) {
  if (!(v >= lo - kRangeSlack && v <= hi + kRangeSlack)) {
    throw SpecError(std::string(what) + " = " + std::to_string(v) + " outside [" +
                    std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

// Adds coeff * P to h in place, using the same bit action as pauli_matrix.
void add_term(CMatrix& h, double coeff, const PauliString& ps) {
  if (coeff == 0.0) return;
  const int n = ps.n_qubits();
  const std::size_t dim = std::size_t{1} << n;
  std::size_t flip = 0;
  for (int q = 0; q < n; ++q) {
    const char c = ps.letters()[static_cast<std::size_t>(q)];
    if (c == 'X' || c == 'Y') flip |= std::size_t{1} << (n - 1 - q);
  }
  for (std::size_t b = 0; b < dim; ++b) {
    Complex phase{coeff, 0.0};
    for (int q = 0; q < n; ++q) {
      const bool bit = (b >> (n - 1 - q)) & 1U;
      const char c = ps.letters()[static_cast<std::size_t>(q)];
      if (c == 'Z' && bit) phase = -phase;
      if (c == 'Y') phase *= bit ? Complex{0.0, -1.0} : Complex{0.0, 1.0};
    }
    h(static_cast<Eigen::Index>(b ^ flip), static_cast<Eigen::Index>(b)) += phase;
  }
}

}  // namespace

std::size_t static_param_count(Family f, int n_qubits) {
  const auto n = static_cast<std::size_t>(n_qubits);
  switch (f) {
    case Family::kXyChainZField:
      return 2 * n - 1;
    case Family::kXyzChain:
      return n + 3 * (n - 1);
    case Family::kXyChainTdZField:
      return n - 1;
  }
  return 0;
}

double HamiltonianSpec::field(int qubit, double t) const {
  if (qubit < 1 || qubit > n_qubits) throw SpecError("field qubit index out of range");
  const auto q = static_cast<std::size_t>(qubit - 1);
  if (!time_dependent()) return static_params[q];
  const auto& terms = fourier_params[q];
  double sum = 0.0;
  for (const auto& term : terms) sum += term.amplitude * std::cos(term.frequency * t + term.phase);
  return sum / static_cast<double>(terms.size());
}

void HamiltonianSpec::validate() const {
  if (n_qubits < 1) throw SpecError("n_qubits must be positive");
  if (!(j0 > 0.0)) throw SpecError("j0 must be positive");
  const std::size_t want = static_param_count(family, n_qubits);
  if (static_params.size() != want) {
    throw SpecError(std::string(family_name(family)) + " on " + std::to_string(n_qubits) +
                    " qubits expects " + std::to_string(want) + " static parameters, got " +
                    std::to_string(static_params.size()));
  }
  for (double v : static_params) check_range(v, -j0, j0, "static parameter");
  if (time_dependent()) {
    if (fourier_params.size() != static_cast<std::size_t>(n_qubits)) {
      throw SpecError("time-dependent spec needs Fourier terms for each of " +
                      std::to_string(n_qubits) + " qubits, got " +
                      std::to_string(fourier_params.size()));
    }
    for (const auto& terms : fourier_params) {
      if (terms.empty()) throw SpecError("Fourier series needs at least one term");
      for (const auto& term : terms) {
        check_range(term.amplitude, -j0, j0, "Fourier amplitude");
        check_range(term.frequency, -j0, j0, "Fourier frequency");
        check_range(term.phase, 0.0, 2.0 * std::numbers::pi, "Fourier phase");
      }
    }
  } else if (!fourier_params.empty()) {
    throw SpecError("Fourier terms given for a static family");
  }
}

HermitianOperator assemble_hamiltonian(const HamiltonianSpec& spec, double t) {
  spec.validate();
  const int n = spec.n_qubits;
  if (n > kDefaultMaxQubits) {
    throw CapacityError(std::to_string(n) + " qubits exceeds the cap of " +
                        std::to_string(kDefaultMaxQubits));
  }
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
  CMatrix h = CMatrix::Zero(dim, dim);
  const auto& p = spec.static_params;
  const auto nu = static_cast<std::size_t>(n);

  for (int i = 1; i <= n; ++i) add_term(h, spec.field(i, t), PauliString::single(n, i, 'Z'));

  switch (spec.family) {
    case Family::kXyChainZField:
      for (int j = 1; j < n; ++j) {
        const double c = p[nu + static_cast<std::size_t>(j - 1)];
        add_term(h, c, PauliString::pair(n, j, 'X'));
        add_term(h, c, PauliString::pair(n, j, 'Y'));
      }
      break;
    case Family::kXyzChain:
      for (int j = 1; j < n; ++j) {
        const auto b = static_cast<std::size_t>(j - 1);
        add_term(h, p[nu + b], PauliString::pair(n, j, 'X'));
        add_term(h, p[nu + (nu - 1) + b], PauliString::pair(n, j, 'Y'));
        add_term(h, p[nu + 2 * (nu - 1) + b], PauliString::pair(n, j, 'Z'));
      }
      break;
    case Family::kXyChainTdZField:
      for (int j = 1; j < n; ++j) {
        const double c = p[static_cast<std::size_t>(j - 1)];
        add_term(h, c, PauliString::pair(n, j, 'X'));
        add_term(h, c, PauliString::pair(n, j, 'Y'));
      }
      break;
  }
  return HermitianOperator{std::move(h)};
}

StateVector initial_state(int n_qubits, int max_qubits) {
  if (n_qubits < 1) throw SpecError("initial_state needs at least one qubit");
  if (n_qubits > max_qubits) {
    throw CapacityError(std::to_string(n_qubits) + " qubits exceeds the cap of " +
                        std::to_string(max_qubits));
  }
  // R_a(theta) = cos(theta/2) I - i sin(theta/2) sigma_a
  const double half = std::numbers::pi / 8.0;
  Eigen::Matrix2cd ry;
  ry << std::cos(half), -std::sin(half), std::sin(half), std::cos(half);
  Eigen::Matrix2cd rz;
  rz << std::polar(1.0, -half), 0.0, 0.0, std::polar(1.0, half);
  const Eigen::Vector2cd one = rz * ry * Eigen::Vector2cd(1.0, 0.0);

  CVector psi(1);
  psi(0) = 1.0;
  for (int q = 0; q < n_qubits; ++q) {
    CVector next(psi.size() * 2);
    for (Eigen::Index k = 0; k < psi.size(); ++k) {
      next(2 * k) = psi(k) * one(0);
      next(2 * k + 1) = psi(k) * one(1);
    }
    psi = std::move(next);
  }
  return StateVector{std::move(psi)};
}

}  // namespace hamlearn::qsim
