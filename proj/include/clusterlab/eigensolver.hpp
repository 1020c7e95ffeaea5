#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "clusterlab/spin_chain.hpp"

namespace clusterlab {

struct EigenOptions {
  /// Residual norm ||H psi - E psi|| required for every requested Ritz pair.
  double tol = 1e-10;
  int krylov_dim = 60;
  int max_restarts = 400;
  std::uint64_t seed = 20240601;
  int max_sites = 20;
  /// Levels closer than this count as degenerate.
  double degeneracy_tol = 1e-8;
};

struct GroundState {
  double energy = 0.0;
  StateVector state = StateVector::basis_state(1, 0);
  bool degenerate = false;
  double residual = 0.0;
  int matvecs = 0;
};

/// Lowest eigenpair by restarted Lanczos, run independently inside every
/// sector of the flip-mask symmetry (see symmetry_sectors). Deterministic for
/// a fixed seed. Throws ConvergenceError carrying the best energy on failure.
GroundState ground_state(const SpinChainSpec& spec, const EigenOptions& opts = {});

struct GapResult {
  double ground = 0.0;
  /// Lowest level strictly above the ground manifold.
  double excited = 0.0;
  double gap = 0.0;
  bool ground_degenerate = false;
};

/// Gap between the ground manifold and the next distinct level.
GapResult spectral_gap(const SpinChainSpec& spec, const EigenOptions& opts = {});

/// Same quantity from a sorted full spectrum.
GapResult gap_from_spectrum(const std::vector<double>& sorted_levels, double degeneracy_tol = 1e-8);

inline constexpr int kDenseMaxSites = 14;

/// All 2^n eigenvalues in ascending order, one dense solve per symmetry
/// sector.
std::vector<double> dense_spectrum(const SpinChainSpec& spec, int max_sites = kDenseMaxSites);

/// Full 2^n x 2^n matrix, symmetrized.
Eigen::MatrixXcd dense_matrix(const SpinChainSpec& spec, int max_sites = kDenseMaxSites);

/// Partition of the computational basis into cosets of the GF(2) span of the
/// operator's flip masks. H never connects states from different cosets.
std::vector<std::vector<std::uint64_t>> symmetry_sectors(const PauliSum& op);

}  // namespace clusterlab
