#include "clusterlab/bose_hubbard.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "clusterlab/eigensolver.hpp"
#include "clusterlab/errors.hpp"
#include "clusterlab/spin_chain.hpp"

namespace clusterlab {

void BoseHubbardParams::validate() const {
  for (double u : {u_aa, u_bb, u_ab}) {
    if (!(u > 0.0) || !std::isfinite(u)) {
      throw DomainError("collisional couplings must be strictly positive");
    }
  }
  for (double j : {j_a, j_b}) {
    if (!(j >= 0.0) || !std::isfinite(j)) throw DomainError("tunneling amplitudes must be >= 0");
  }
}

double BoseHubbardParams::perturbative_ratio() const {
  return std::max(j_a, j_b) / std::min({u_aa, u_bb, u_ab});
}

bool BoseHubbardParams::perturbative() const { return perturbative_ratio() < kPerturbativeLimit; }

EffectiveCouplings effective_couplings(const BoseHubbardParams& p) {
  p.validate();
  const double ja = p.j_a, jb = p.j_b;
  const double uaa = p.u_aa, ubb = p.u_bb, uab = p.u_ab;
  const double ja2 = ja * ja, jb2 = jb * jb;
  const double ja3 = ja2 * ja, jb3 = jb2 * jb;

  // Each coupling is a per-species part combined with one commutative sum
  // (or a difference), so exchanging a and b maps the couplings exactly.
  auto even_part = [&](double j2, double j3, double u) { return -j2 / u - 4.5 * j3 / (u * u) + j3 / (u * uab); };
  auto odd_part = [&](double j3, double u) { return -1.5 * j3 / (u * u) + j3 / (u * uab); };
  auto field_part = [&](double j, double j2, double u) { return j2 / u * (2.0 + 4.5 * j / u + j / uab); };

  EffectiveCouplings c;
  c.lambda1 = (even_part(ja2, ja3, uaa) + even_part(jb2, jb3, ubb)) + 0.5 * (ja2 + jb2) / uab +
              0.5 * (ja3 + jb3) / (uab * uab);
  c.lambda2 = -ja * jb / uab * (1.0 + (ja / uaa + jb / ubb) + 1.5 * (ja + jb) / uab) -
              0.5 * ja * jb * (ja / (uaa * uaa) + jb / (ubb * ubb));
  c.lambda3 = odd_part(ja3, uaa) - odd_part(jb3, ubb);
  c.lambda4 = -ja * jb / uab * (ja / uaa - jb / ubb) -
              0.5 * ja * jb * (ja / (uaa * uaa) - jb / (ubb * ubb));
  c.b_z_comp = field_part(jb, jb2, ubb) - field_part(ja, ja2, uaa);
  // Normalize negative zeros for clean output.
  for (double* v : {&c.lambda1, &c.lambda2, &c.lambda3, &c.lambda4, &c.b_z_comp}) *v += 0.0;
  return c;
}

// ---------------------------------------------------------------------------

FockBasis::FockBasis(int n_a, int n_b) : n_a_(n_a), n_b_(n_b) {
  if (n_a < 0 || n_b < 0) throw DomainError("sector totals must be non-negative");
  // Distribute n_a over three sites, then n_b; lexicographic order.
  for (int a0 = n_a; a0 >= 0; --a0) {
    for (int a1 = n_a - a0; a1 >= 0; --a1) {
      const int a2 = n_a - a0 - a1;
      for (int b0 = n_b; b0 >= 0; --b0) {
        for (int b1 = n_b - b0; b1 >= 0; --b1) {
          const int b2 = n_b - b0 - b1;
          states_.push_back({a0, b0, a1, b1, a2, b2});
        }
      }
    }
  }
}

std::size_t FockBasis::index_of(const Occupation& occ) const {
  const auto it = std::find(states_.begin(), states_.end(), occ);
  return static_cast<std::size_t>(it - states_.begin());
}

bool FockBasis::singly_occupied(const Occupation& occ) {
  for (int i = 0; i < kSites; ++i) {
    if (occ[2 * i] + occ[2 * i + 1] != 1) return false;
  }
  return true;
}

std::size_t spin_index_of(const FockBasis::Occupation& occ) {
  std::size_t s = 0;
  for (int i = 0; i < FockBasis::kSites; ++i) {
    if (occ[2 * i + 1] == 1) s |= std::size_t{1} << i;
  }
  return s;
}

namespace {

std::size_t sector_dim(int n_a, int n_b) {
  auto stars = [](int n) { return static_cast<std::size_t>((n + 1) * (n + 2) / 2); };
  return stars(n_a) * stars(n_b);
}

}  // namespace

Eigen::MatrixXd build_full_hamiltonian(const BoseHubbardParams& p, int n_a, int n_b,
                                       std::size_t max_dim) {
  p.validate();
  if (n_a < 0 || n_b < 0) throw DomainError("sector totals must be non-negative");
  if (sector_dim(n_a, n_b) > max_dim) {
    throw ResourceError("Fock sector dimension " + std::to_string(sector_dim(n_a, n_b)) +
                        " exceeds cap " + std::to_string(max_dim));
  }
  const FockBasis basis(n_a, n_b);
  const auto dim = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);

  constexpr std::array<std::pair<int, int>, 3> kBonds{{{0, 1}, {1, 2}, {2, 0}}};
  const std::array<double, 2> tunneling{p.j_a, p.j_b};

  for (Eigen::Index k = 0; k < dim; ++k) {
    const auto& occ = basis.state(static_cast<std::size_t>(k));
    double e0 = 0.0;
    for (int i = 0; i < FockBasis::kSites; ++i) {
      const double na = occ[2 * i], nb = occ[2 * i + 1];
      e0 += 0.5 * p.u_aa * na * (na - 1.0) + 0.5 * p.u_bb * nb * (nb - 1.0) + p.u_ab * na * nb;
    }
    h(k, k) = e0;

    for (const auto& [i, j] : kBonds) {
      for (int species = 0; species < 2; ++species) {
        const double jt = tunneling[species];
        if (jt == 0.0) continue;
        // a^dag_dst a_src for both hopping directions along the bond.
        for (const auto& [src, dst] : {std::pair{j, i}, std::pair{i, j}}) {
          const int n_src = occ[2 * src + species];
          if (n_src == 0) continue;
          const int n_dst = occ[2 * dst + species];
          auto target = occ;
          --target[2 * src + species];
          ++target[2 * dst + species];
          const auto row = static_cast<Eigen::Index>(basis.index_of(target));
          h(row, k) += -jt * std::sqrt(static_cast<double>(n_src) * (n_dst + 1));
        }
      }
    }
  }
  return h;
}

// ---------------------------------------------------------------------------

TruncationReport validate_perturbation(const BoseHubbardParams& p, const TruncationOptions& opts) {
  p.validate();
  TruncationReport report;
  report.params = p;
  report.couplings = effective_couplings(p);
  report.perturbative = p.perturbative();
  if (!report.perturbative) {
    std::ostringstream w;
    w << "J/U ratio " << p.perturbative_ratio() << " is outside the perturbative regime (< "
      << kPerturbativeLimit << ")";
    report.warnings.push_back(w.str());
  }

  const auto& c = report.couplings;
  const auto eff_spec =
      triangle_chain_hamiltonian(c, {0.0, 0.0, opts.include_field ? c.b_z_comp : 0.0}, 3);
  const Eigen::MatrixXcd eff_matrix = dense_matrix(eff_spec);

  // Both models conserve (N_a, N_b); levels are compared sector by sector.
  std::vector<double> full_levels, eff_levels, overlaps;
  for (int n_b = 0; n_b <= 3; ++n_b) {
    const int n_a = 3 - n_b;
    const FockBasis basis(n_a, n_b);
    const Eigen::MatrixXd h = build_full_hamiltonian(p, n_a, n_b);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);

    std::vector<Eigen::Index> manifold;
    std::vector<int> spin_indices;
    for (std::size_t k = 0; k < basis.size(); ++k) {
      if (FockBasis::singly_occupied(basis.state(k))) {
        manifold.push_back(static_cast<Eigen::Index>(k));
        spin_indices.push_back(static_cast<int>(spin_index_of(basis.state(k))));
      }
    }

    std::vector<std::pair<double, Eigen::Index>> weight;
    for (Eigen::Index col = 0; col < h.cols(); ++col) {
      double w = 0.0;
      for (auto row : manifold) w += solver.eigenvectors()(row, col) * solver.eigenvectors()(row, col);
      weight.emplace_back(w, col);
    }
    std::sort(weight.begin(), weight.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    const std::size_t m = manifold.size();
    std::vector<double> sector_full;
    for (std::size_t k = 0; k < m; ++k) {
      sector_full.push_back(solver.eigenvalues()(weight[k].second));
      overlaps.push_back(weight[k].first);
      if (weight[k].first < opts.min_overlap) report.ambiguous_tracking = true;
    }
    if (weight.size() > m && weight[m].first >= opts.min_overlap) report.ambiguous_tracking = true;
    std::sort(sector_full.begin(), sector_full.end());

    Eigen::MatrixXcd block(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t s = 0; s < m; ++s) block(r, s) = eff_matrix(spin_indices[r], spin_indices[s]);
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eff_solver(block, Eigen::EigenvaluesOnly);
    for (std::size_t k = 0; k < m; ++k) {
      full_levels.push_back(sector_full[k]);
      eff_levels.push_back(eff_solver.eigenvalues()(static_cast<Eigen::Index>(k)));
    }
  }
  if (report.ambiguous_tracking) {
    report.warnings.push_back("level tracking ambiguous: manifold weight below threshold");
  }

  auto mean = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  const double full_mean = mean(full_levels);
  const double eff_mean = mean(eff_levels);
  const auto [lo, hi] = std::minmax_element(eff_levels.begin(), eff_levels.end());
  const double width = *hi - *lo;

  for (std::size_t k = 0; k < full_levels.size(); ++k) {
    LevelComparison lc;
    lc.full = full_levels[k] - full_mean;
    lc.effective = eff_levels[k] - eff_mean;
    lc.abs_dev = std::abs(lc.full - lc.effective);
    lc.rel_dev = width > 0.0 ? lc.abs_dev / width : (lc.abs_dev > 0.0 ? INFINITY : 0.0);
    lc.overlap = overlaps[k];
    report.max_abs_dev = std::max(report.max_abs_dev, lc.abs_dev);
    report.max_rel_dev = std::max(report.max_rel_dev, lc.rel_dev);
    report.levels.push_back(lc);
  }
  return report;
}

// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const BoseHubbardParams& p) {
  j = nlohmann::json{{"j_a", p.j_a}, {"j_b", p.j_b}, {"u_aa", p.u_aa}, {"u_bb", p.u_bb},
                     {"u_ab", p.u_ab}};
}

void from_json(const nlohmann::json& j, BoseHubbardParams& p) {
  try {
    p.j_a = j.at("j_a").get<double>();
    p.j_b = j.at("j_b").get<double>();
    p.u_aa = j.at("u_aa").get<double>();
    p.u_bb = j.at("u_bb").get<double>();
    p.u_ab = j.at("u_ab").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed Bose-Hubbard parameters: ") + e.what());
  }
  p.validate();
}

void to_json(nlohmann::json& j, const EffectiveCouplings& c) {
  j = nlohmann::json{{"lambda1", c.lambda1}, {"lambda2", c.lambda2}, {"lambda3", c.lambda3},
                     {"lambda4", c.lambda4}, {"b_z_comp", c.b_z_comp}};
}

void to_json(nlohmann::json& j, const TruncationReport& r) {
  auto levels = nlohmann::json::array();
  for (const auto& l : r.levels) {
    levels.push_back({{"full", l.full}, {"effective", l.effective}, {"abs_dev", l.abs_dev},
                      {"rel_dev", l.rel_dev}});
  }
  j = nlohmann::json{{"levels", levels},
                     {"max_rel_dev", r.max_rel_dev},
                     {"max_abs_dev", r.max_abs_dev},
                     {"params", r.params},
                     {"couplings", r.couplings},
                     {"perturbative", r.perturbative},
                     {"ambiguous_tracking", r.ambiguous_tracking},
                     {"warnings", r.warnings}};
}

}  // namespace clusterlab
