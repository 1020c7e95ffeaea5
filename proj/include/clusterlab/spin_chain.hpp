#pragma once

// Spin-1/2 chains as sums of weighted Pauli strings.
//
// Basis convention shared by every module: bit i of a basis index is spin i,
// with 0 = |up> (sigma^z = +1) and 1 = |down>. Pauli Y acts as
// Y|0> = i|1>, Y|1> = -i|0>.

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace clusterlab {

using cplx = std::complex<double>;

enum class Pauli : std::uint8_t { I, X, Y, Z };

char to_char(Pauli p);
Pauli pauli_from_char(char c);

struct PauliFactor {
  int site = 0;
  Pauli op = Pauli::I;

  friend bool operator==(const PauliFactor&, const PauliFactor&) = default;
};

/// coefficient * prod_k sigma^{op_k}_{site_k}. Identity factors are allowed and
/// ignored.
struct PauliString {
  double coefficient = 1.0;
  std::vector<PauliFactor> factors;

  PauliString() = default;
  PauliString(double coeff, std::vector<PauliFactor> f)
      : coefficient(coeff), factors(std::move(f)) {}

  /// Parses compact notation such as "X0 Z1 X2" (coefficient 1).
  static PauliString parse(const std::string& text, double coeff = 1.0);

  /// Throws DomainError if a site repeats or lies outside [0, n_sites).
  void validate(int n_sites) const;

  std::string to_string() const;

  friend bool operator==(const PauliString&, const PauliString&) = default;
};

/// Bit masks describing how a Pauli string acts on computational basis
/// states: P|s> = phase * (-1)^{popcount(s & sign_mask)} |s ^ flip_mask>.
struct PauliMasks {
  std::uint64_t flip_mask = 0;  // X or Y
  std::uint64_t sign_mask = 0;  // Y or Z
  cplx phase{1.0, 0.0};         // i^{#Y}
};

PauliMasks masks_of(const PauliString& p);

enum class Boundary { periodic, open };

class SpinChainSpec {
 public:
  SpinChainSpec(int n_sites, Boundary boundary, std::vector<PauliString> terms);

  int n_sites() const noexcept { return n_sites_; }
  Boundary boundary() const noexcept { return boundary_; }
  const std::vector<PauliString>& terms() const noexcept { return terms_; }

 private:
  int n_sites_;
  Boundary boundary_;
  std::vector<PauliString> terms_;
};

void to_json(nlohmann::json& j, const SpinChainSpec& spec);
SpinChainSpec spin_chain_from_json(const nlohmann::json& j);

class StateVector {
 public:
  StateVector(int n_sites, std::vector<cplx> amplitudes);

  /// |s> for a basis index s.
  static StateVector basis_state(int n_sites, std::uint64_t index);

  int n_sites() const noexcept { return n_sites_; }
  std::size_t dim() const noexcept { return amps_.size(); }
  std::span<const cplx> amplitudes() const noexcept { return amps_; }
  const cplx& operator[](std::size_t i) const { return amps_[i]; }

  double norm() const;
  bool is_normalized(double tol = 1e-12) const;
  StateVector normalized() const;

  friend StateVector operator+(const StateVector& a, const StateVector& b);
  friend StateVector operator*(cplx s, const StateVector& v);

 private:
  int n_sites_;
  std::vector<cplx> amps_;
};

cplx inner(const StateVector& a, const StateVector& b);

/// Compiled, matrix-free form of a Pauli sum. Terms sharing a flip mask are
/// grouped so each group costs one pass over the basis.
class PauliSum {
 public:
  explicit PauliSum(const SpinChainSpec& spec);
  explicit PauliSum(int n_sites, std::span<const PauliString> terms);

  int n_sites() const noexcept { return n_sites_; }
  std::size_t dim() const noexcept { return std::size_t{1} << n_sites_; }

  /// All matrix elements are real in the computational basis.
  bool is_real() const noexcept { return real_; }

  /// Distinct flip masks of the grouped terms (zero for diagonal terms).
  std::vector<std::uint64_t> flip_masks() const;

  /// out = H * in over the full 2^n space.
  void apply(std::span<const cplx> in, std::span<cplx> out) const;

  /// <s'|H|s> for all s' reachable from s; calls emit(s', value).
  template <class Emit>
  void for_each_column_entry(std::uint64_t s, Emit&& emit) const;

 private:
  struct Diagonalish {
    std::uint64_t sign_mask;
    cplx coeff;
  };
  struct Group {
    std::uint64_t flip_mask;
    std::vector<Diagonalish> parts;
  };
  cplx group_element(const Group& g, std::uint64_t s) const;

  int n_sites_;
  bool real_ = true;
  std::vector<Group> groups_;
};

template <class Emit>
void PauliSum::for_each_column_entry(std::uint64_t s, Emit&& emit) const {
  for (const auto& g : groups_) {
    const cplx v = group_element(g, s);
    if (v != cplx{}) emit(s ^ g.flip_mask, v);
  }
}

/// H = sum_i ( -X_{i-1} Z_i X_{i+1} + b Z_i ), periodic.
SpinChainSpec cluster_hamiltonian(int n, double b_field);

struct EffectiveCouplings;

/// Chain form of the triangle Hamiltonian: field b.sigma on every site, and
/// lambda1 ZZ, lambda2 (XX+YY), lambda3 ZZZ, lambda4 (XZX+YZY) on each
/// consecutive pair/triple, periodic.
SpinChainSpec triangle_chain_hamiltonian(const EffectiveCouplings& c,
                                         const std::array<double, 3>& b_vec,
                                         int n);

/// H|psi>, unnormalized.
StateVector apply(const SpinChainSpec& spec, const StateVector& state);
StateVector apply(const PauliString& op, const StateVector& state);

/// <psi|P|psi> for a normalized state.
double expectation(const StateVector& state, const PauliString& op);

}  // namespace clusterlab
