#include <array>
#include <string>

#include "hamlearn/errors.hpp"
#include "hamlearn/qsim.hpp"

namespace hamlearn::qsim {

PauliString::PauliString(std::string letters) : letters_(std::move(letters)) {
  if (letters_.empty()) throw SpecError("PauliString needs at least one qubit");
  for (char& c : letters_) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') {
      throw SpecError(std::string("invalid Pauli letter '") + c + "'");
    }
  }
}

PauliString PauliString::single(int n_qubits, int qubit, char letter) {
  if (n_qubits < 1 || qubit < 1 || qubit > n_qubits) {
    throw SpecError("qubit index " + std::to_string(qubit) + " out of range for " +
                    std::to_string(n_qubits) + " qubits");
  }
  std::string s(static_cast<std::size_t>(n_qubits), 'I');
  s[static_cast<std::size_t>(qubit - 1)] = letter;
  return PauliString(std::move(s));
}

PauliString PauliString::pair(int n_qubits, int q, char letter) {
  if (n_qubits < 2 || q < 1 || q + 1 > n_qubits) {
    throw SpecError("bond index " + std::to_string(q) + " out of range for " +
                    std::to_string(n_qubits) + " qubits");
  }
  std::string s(static_cast<std::size_t>(n_qubits), 'I');
  s[static_cast<std::size_t>(q - 1)] = letter;
  s[static_cast<std::size_t>(q)] = letter;
  return PauliString(std::move(s));
}

bool PauliString::is_identity() const {
  return letters_.find_first_not_of('I') == std::string::npos;
}

HermitianOperator pauli_matrix(const PauliString& ps, int max_qubits) {
  const int n = ps.n_qubits();
  if (n > max_qubits) {
    throw CapacityError("Pauli string on " + std::to_string(n) + " qubits exceeds the cap of " +
                        std::to_string(max_qubits));
  }
  const std::size_t dim = std::size_t{1} << n;
  std::size_t flip = 0;
  for (int q = 0; q < n; ++q) {
    const char c = ps.letters()[static_cast<std::size_t>(q)];
    if (c == 'X' || c == 'Y') flip |= std::size_t{1} << (n - 1 - q);
  }
  HermitianOperator out{CMatrix::Zero(static_cast<Eigen::Index>(dim),
                                      static_cast<Eigen::Index>(dim))};
  // P|b> = phase(b) |b ^ flip>
  for (std::size_t b = 0; b < dim; ++b) {
    Complex phase{1.0, 0.0};
    for (int q = 0; q < n; ++q) {
      const bool bit = (b >> (n - 1 - q)) & 1U;
      switch (ps.letters()[static_cast<std::size_t>(q)]) {
        case 'Z':
          if (bit) phase = -phase;
          break;
        case 'Y':
          phase *= bit ? Complex{0.0, -1.0} : Complex{0.0, 1.0};
          break;
        default:
          break;
      }
    }
    out.entries(static_cast<Eigen::Index>(b ^ flip), static_cast<Eigen::Index>(b)) = phase;
  }
  return out;
}

namespace {
constexpr std::array<std::pair<Family, std::string_view>, 3> kFamilyNames{{
    {Family::kXyChainZField, "xy_chain_zfield"},
    {Family::kXyzChain, "xyz_chain"},
    {Family::kXyChainTdZField, "xy_chain_td_zfield"},
}};
}  // namespace

std::string_view family_name(Family f) {
  for (const auto& [fam, name] : kFamilyNames) {
    if (fam == f) return name;
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  std::string lower(name);
  for (char& c : lower) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  for (const auto& [fam, n] : kFamilyNames) {
    if (n == lower) return fam;
  }
  throw SpecError("unknown Hamiltonian family '" + std::string(name) +
                  "' (expected xy_chain_zfield, xyz_chain or xy_chain_td_zfield)");
}

}  // namespace hamlearn::qsim
