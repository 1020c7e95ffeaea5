#pragma once

// Two-species Bose-Hubbard model on a single equilateral triangle and the
// effective three-site spin Hamiltonian obtained from it to third order in
// J/U.

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace clusterlab {

struct BoseHubbardParams {
  double j_a = 0.0;
  double j_b = 0.0;
  double u_aa = 1.0;
  double u_bb = 1.0;
  double u_ab = 1.0;

  /// Throws DomainError unless all U > 0 and both J >= 0.
  void validate() const;

  /// max(J) / min(U); perturbation theory is trusted below kPerturbativeLimit.
  double perturbative_ratio() const;
  bool perturbative() const;

  BoseHubbardParams swapped_species() const { return {j_b, j_a, u_bb, u_aa, u_ab}; }
};

inline constexpr double kPerturbativeLimit = 0.2;

struct EffectiveCouplings {
  double lambda1 = 0.0;  // sigma^z sigma^z
  double lambda2 = 0.0;  // sigma^x sigma^x + sigma^y sigma^y
  double lambda3 = 0.0;  // sigma^z sigma^z sigma^z
  double lambda4 = 0.0;  // sigma^x sigma^z sigma^x + sigma^y sigma^z sigma^y
  double b_z_comp = 0.0; // single-particle field to be compensated
};

EffectiveCouplings effective_couplings(const BoseHubbardParams& p);

/// Occupation-number basis of the triangle at fixed species totals. A state is
/// stored as {n_a(site0), n_b(site0), n_a(site1), ...}.
class FockBasis {
 public:
  using Occupation = std::array<int, 6>;
  static constexpr int kSites = 3;

  FockBasis(int n_a, int n_b);

  int n_a() const noexcept { return n_a_; }
  int n_b() const noexcept { return n_b_; }
  std::size_t size() const noexcept { return states_.size(); }
  const Occupation& state(std::size_t k) const { return states_[k]; }
  const std::vector<Occupation>& states() const noexcept { return states_; }

  /// Index of an occupation pattern; size() if absent.
  std::size_t index_of(const Occupation& occ) const;

  /// Every site holds exactly one atom.
  static bool singly_occupied(const Occupation& occ);

 private:
  int n_a_;
  int n_b_;
  std::vector<Occupation> states_;
};

/// H0 + V over the (N_a, N_b) sector: on-site collisions plus tunneling on
/// all three bonds of the triangle.
Eigen::MatrixXd build_full_hamiltonian(const BoseHubbardParams& p, int n_a, int n_b,
                                       std::size_t max_dim = 4096);

/// Maps a singly-occupied Fock state to the spin basis index used by
/// spin_chain (bit i set when site i holds a b-atom).
std::size_t spin_index_of(const FockBasis::Occupation& occ);

struct LevelComparison {
  double full = 0.0;       // mean-shifted full-model level
  double effective = 0.0;  // mean-shifted effective-model level
  double abs_dev = 0.0;
  double rel_dev = 0.0;    // abs_dev / spectral width of the effective levels
  double overlap = 0.0;    // weight of the tracked eigenvector on the manifold
};

struct TruncationReport {
  BoseHubbardParams params;
  EffectiveCouplings couplings;
  std::vector<LevelComparison> levels;
  double max_abs_dev = 0.0;
  double max_rel_dev = 0.0;
  bool perturbative = true;
  bool ambiguous_tracking = false;
  std::vector<std::string> warnings;
};

struct TruncationOptions {
  /// Add the generated b_z_comp sigma^z field to the effective Hamiltonian.
  /// The bare Bose-Hubbard model has no compensating lasers, so the
  /// comparison needs it whenever the species are not symmetric.
  bool include_field = true;
  /// Tracked eigenvectors with manifold weight below this are flagged.
  double min_overlap = 0.5;
};

TruncationReport validate_perturbation(const BoseHubbardParams& p,
                                       const TruncationOptions& opts = {});

void to_json(nlohmann::json& j, const BoseHubbardParams& p);
void from_json(const nlohmann::json& j, BoseHubbardParams& p);
void to_json(nlohmann::json& j, const EffectiveCouplings& c);
void to_json(nlohmann::json& j, const TruncationReport& r);

}  // namespace clusterlab
