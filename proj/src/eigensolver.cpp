#include "clusterlab/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "clusterlab/errors.hpp"

namespace clusterlab {

namespace {

using Eigen::Index;

// H restricted to one symmetry sector, applied matrix-free.
class SectorOperator {
 public:
  SectorOperator(const PauliSum& op, const std::vector<std::uint64_t>& states,
                 std::vector<std::uint32_t>& position)
      : op_(op), states_(states), position_(position) {
    for (std::size_t k = 0; k < states_.size(); ++k) {
      position_[states_[k]] = static_cast<std::uint32_t>(k);
    }
  }

  Index dim() const { return static_cast<Index>(states_.size()); }

  void apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
    out.setZero(dim());
    for (std::size_t k = 0; k < states_.size(); ++k) {
      const cplx a = in[static_cast<Index>(k)];
      if (a == cplx{}) continue;
      op_.for_each_column_entry(states_[k], [&](std::uint64_t target, cplx v) {
        out[position_[target]] += v * a;
      });
    }
  }

 private:
  const PauliSum& op_;
  const std::vector<std::uint64_t>& states_;
  std::vector<std::uint32_t>& position_;
};

struct RitzPairs {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
  Eigen::VectorXd residuals;
  int matvecs = 0;
};

Eigen::VectorXcd random_vector(Index dim, std::mt19937_64& rng, bool real) {
  std::normal_distribution<double> gauss;
  Eigen::VectorXcd v(dim);
  for (Index i = 0; i < dim; ++i) v[i] = cplx(gauss(rng), real ? 0.0 : gauss(rng));
  return v.normalized();
}

// Lanczos with full reorthogonalization and thick restarts. The projected
// matrix is accumulated explicitly, so after a restart the kept Ritz vectors
// couple to the new residual direction through an arrow-shaped block.
RitzPairs restarted_lanczos(const SectorOperator& op, int n_wanted, const EigenOptions& opts,
                            std::uint64_t seed, bool real) {
  const Index dim = op.dim();
  n_wanted = static_cast<int>(std::min<Index>(n_wanted, dim));

  // Keep the Krylov basis under ~512 MiB.
  const Index budget = std::max<Index>(8, (Index{1} << 25) / dim);
  Index m = std::min<Index>({static_cast<Index>(opts.krylov_dim), dim, std::max<Index>(budget, n_wanted + 4)});
  m = std::max<Index>(m, std::min<Index>(dim, n_wanted + 2));

  std::mt19937_64 rng(seed);
  Eigen::MatrixXcd basis(dim, m);
  Eigen::MatrixXcd proj = Eigen::MatrixXcd::Zero(m, m);
  basis.col(0) = random_vector(dim, rng, real);
  Index cols = 1;

  RitzPairs out;
  Eigen::VectorXcd w(dim);
  double best = std::numeric_limits<double>::infinity();

  for (int restart = 0; restart <= opts.max_restarts; ++restart) {
    double beta = 0.0;
    bool invariant = false;
    while (true) {
      op.apply(basis.col(cols - 1), w);
      ++out.matvecs;
      Eigen::VectorXcd h = basis.leftCols(cols).adjoint() * w;
      w.noalias() -= basis.leftCols(cols) * h;
      const Eigen::VectorXcd h2 = basis.leftCols(cols).adjoint() * w;
      w.noalias() -= basis.leftCols(cols) * h2;
      h += h2;
      proj.block(0, cols - 1, cols, 1) = h;
      proj.block(cols - 1, 0, 1, cols) = h.adjoint();
      proj(cols - 1, cols - 1) = h[cols - 1].real();
      beta = w.norm();

      const double scale = std::max(1.0, proj.topLeftCorner(cols, cols).cwiseAbs().maxCoeff());
      if (beta <= 1e-12 * scale) {
        invariant = true;
        if (cols >= n_wanted || cols == dim) break;
        // The start vector misses part of the spectrum: open a new block.
        Eigen::VectorXcd r = random_vector(dim, rng, real);
        for (int pass = 0; pass < 2; ++pass) r -= basis.leftCols(cols) * (basis.leftCols(cols).adjoint() * r);
        basis.col(cols) = r.normalized();
        ++cols;
        invariant = false;
        if (cols == m) break;
        continue;
      }
      if (cols == m) break;
      basis.col(cols) = w / beta;
      proj(cols, cols - 1) = beta;
      proj(cols - 1, cols) = beta;
      ++cols;
    }

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ritz(proj.topLeftCorner(cols, cols));
    const int n_have = static_cast<int>(std::min<Index>(n_wanted, cols));
    Eigen::VectorXd residuals(n_have);
    for (int i = 0; i < n_have; ++i) {
      residuals[i] = invariant ? 0.0 : beta * std::abs(ritz.eigenvectors()(cols - 1, i));
    }
    best = std::min(best, ritz.eigenvalues()[0]);

    if (invariant || residuals.maxCoeff() <= opts.tol) {
      out.values = ritz.eigenvalues().head(n_have);
      out.vectors = basis.leftCols(cols) * ritz.eigenvectors().leftCols(n_have);
      out.residuals = residuals;
      return out;
    }

    const Index keep = std::min<Index>(cols - 1, n_wanted + m / 4);
    const Eigen::MatrixXcd y = ritz.eigenvectors().leftCols(keep);
    const Eigen::MatrixXcd kept = basis.leftCols(cols) * y;
    basis.leftCols(keep) = kept;
    basis.col(keep) = w / beta;
    proj.setZero();
    for (Index i = 0; i < keep; ++i) {
      proj(i, i) = ritz.eigenvalues()[i];
      proj(keep, i) = beta * y(cols - 1, i);
      proj(i, keep) = std::conj(proj(keep, i));
    }
    cols = keep + 1;
  }
  throw ConvergenceError("Lanczos did not reach residual " + std::to_string(opts.tol) + " after " +
                             std::to_string(opts.max_restarts) + " restarts",
                         best);
}

struct SectorSolve {
  std::vector<double> values;
  Eigen::VectorXcd ground;
  double residual = 0.0;
  std::size_t sector = 0;
};

std::vector<SectorSolve> solve_sectors(const SpinChainSpec& spec, const EigenOptions& opts,
                                       const PauliSum& op,
                                       const std::vector<std::vector<std::uint64_t>>& sectors,
                                       int n_wanted, int& matvecs) {
  std::vector<std::uint32_t> position(op.dim());
  std::vector<SectorSolve> solves;
  for (std::size_t k = 0; k < sectors.size(); ++k) {
    const SectorOperator sector(op, sectors[k], position);
    RitzPairs r;
    try {
      r = restarted_lanczos(sector, n_wanted, opts, opts.seed + 7919 * k, op.is_real());
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(std::string(e.what()) + " (sector " + std::to_string(k) + " of n=" +
                                 std::to_string(spec.n_sites()) + ")",
                             e.best_estimate());
    }
    matvecs += r.matvecs;
    SectorSolve s;
    s.values.assign(r.values.data(), r.values.data() + r.values.size());
    s.ground = r.vectors.col(0);
    s.residual = r.residuals[0];
    s.sector = k;
    solves.push_back(std::move(s));
  }
  return solves;
}

void check_size(const SpinChainSpec& spec, int max_sites) {
  if (spec.n_sites() > max_sites) {
    throw ResourceError("n=" + std::to_string(spec.n_sites()) + " exceeds the cap of " +
                        std::to_string(max_sites) + " sites");
  }
}

}  // namespace

std::vector<std::vector<std::uint64_t>> symmetry_sectors(const PauliSum& op) {
  // Echelon basis of the span of the flip masks, highest pivot first.
  std::vector<std::uint64_t> basis;
  for (std::uint64_t x : op.flip_masks()) {
    for (std::uint64_t b : basis) x = std::min(x, x ^ b);
    if (x == 0) continue;
    basis.push_back(x);
    std::sort(basis.begin(), basis.end(), std::greater<>());
  }
  auto representative = [&](std::uint64_t s) {
    for (std::uint64_t b : basis) s = std::min(s, s ^ b);
    return s;
  };

  std::vector<std::vector<std::uint64_t>> sectors;
  std::vector<std::int64_t> sector_of_rep(op.dim(), -1);
  for (std::uint64_t s = 0; s < op.dim(); ++s) {
    const auto rep = representative(s);
    if (sector_of_rep[rep] < 0) {
      sector_of_rep[rep] = static_cast<std::int64_t>(sectors.size());
      sectors.emplace_back();
    }
    sectors[static_cast<std::size_t>(sector_of_rep[rep])].push_back(s);
  }
  return sectors;
}

GroundState ground_state(const SpinChainSpec& spec, const EigenOptions& opts) {
  check_size(spec, opts.max_sites);
  const PauliSum op(spec);
  const auto sectors = symmetry_sectors(op);
  GroundState gs;
  const auto solves = solve_sectors(spec, opts, op, sectors, 2, gs.matvecs);

  const auto best = std::min_element(solves.begin(), solves.end(), [](const auto& a, const auto& b) {
    return a.values[0] < b.values[0];
  });
  gs.energy = best->values[0];
  gs.residual = best->residual;
  for (const auto& s : solves) {
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      if (&s == &*best && i == 0) continue;
      if (s.values[i] - gs.energy < opts.degeneracy_tol) gs.degenerate = true;
    }
  }

  std::vector<cplx> amps(op.dim());
  const auto& states = sectors[best->sector];
  for (std::size_t k = 0; k < states.size(); ++k) amps[states[k]] = best->ground[static_cast<Index>(k)];
  // Fix the global phase: largest amplitude real and positive.
  std::size_t arg = 0;
  for (std::size_t k = 1; k < amps.size(); ++k) {
    if (std::abs(amps[k]) > std::abs(amps[arg]) + 1e-12) arg = k;
  }
  const cplx phase = std::abs(amps[arg]) > 0 ? std::conj(amps[arg]) / std::abs(amps[arg]) : 1.0;
  for (auto& a : amps) a *= phase;
  gs.state = StateVector(spec.n_sites(), std::move(amps)).normalized();
  return gs;
}

GapResult gap_from_spectrum(const std::vector<double>& levels, double degeneracy_tol) {
  if (levels.size() < 2) throw DomainError("a gap needs at least two levels");
  GapResult g;
  g.ground = *std::min_element(levels.begin(), levels.end());
  g.excited = std::numeric_limits<double>::infinity();
  int at_ground = 0;
  for (double e : levels) {
    if (e - g.ground < degeneracy_tol) {
      ++at_ground;
    } else {
      g.excited = std::min(g.excited, e);
    }
  }
  if (!std::isfinite(g.excited)) throw DomainError("spectrum has a single distinct level");
  g.ground_degenerate = at_ground > 1;
  g.gap = g.excited - g.ground;
  return g;
}

GapResult spectral_gap(const SpinChainSpec& spec, const EigenOptions& opts) {
  check_size(spec, opts.max_sites);
  const PauliSum op(spec);
  const auto sectors = symmetry_sectors(op);
  int matvecs = 0;
  const auto solves = solve_sectors(spec, opts, op, sectors, 2, matvecs);
  std::vector<double> levels;
  for (const auto& s : solves) levels.insert(levels.end(), s.values.begin(), s.values.end());
  return gap_from_spectrum(levels, opts.degeneracy_tol);
}

Eigen::MatrixXcd dense_matrix(const SpinChainSpec& spec, int max_sites) {
  check_size(spec, std::min(max_sites, kDenseMaxSites));
  const PauliSum op(spec);
  const auto dim = static_cast<Index>(op.dim());
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::uint64_t s = 0; s < op.dim(); ++s) {
    op.for_each_column_entry(s, [&](std::uint64_t t, cplx v) {
      h(static_cast<Index>(t), static_cast<Index>(s)) += v;
    });
  }
  const Eigen::MatrixXcd sym = 0.5 * (h + h.adjoint());
  return sym;
}

std::vector<double> dense_spectrum(const SpinChainSpec& spec, int max_sites) {
  check_size(spec, std::min(max_sites, kDenseMaxSites));
  const PauliSum op(spec);
  const auto sectors = symmetry_sectors(op);
  std::vector<std::uint32_t> position(op.dim());
  std::vector<double> levels;
  levels.reserve(op.dim());

  for (const auto& states : sectors) {
    const auto d = static_cast<Index>(states.size());
    for (Index k = 0; k < d; ++k) position[states[static_cast<std::size_t>(k)]] = static_cast<std::uint32_t>(k);
    Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(d, d);
    for (Index k = 0; k < d; ++k) {
      op.for_each_column_entry(states[static_cast<std::size_t>(k)], [&](std::uint64_t t, cplx v) {
        block(position[t], k) += v;
      });
    }
    if (op.is_real()) {
      const Eigen::MatrixXd real = 0.5 * (block.real() + block.real().transpose());
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(real, Eigen::EigenvaluesOnly);
      levels.insert(levels.end(), solver.eigenvalues().begin(), solver.eigenvalues().end());
    } else {
      const Eigen::MatrixXcd herm = 0.5 * (block + block.adjoint());
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
      levels.insert(levels.end(), solver.eigenvalues().begin(), solver.eigenvalues().end());
    }
  }
  std::sort(levels.begin(), levels.end());
  return levels;
}

}  // namespace clusterlab
