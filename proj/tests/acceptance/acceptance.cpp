// One PASS/FAIL line per acceptance criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "clusterlab/bose_hubbard.hpp"
#include "clusterlab/correlations.hpp"
#include "clusterlab/eigensolver.hpp"
#include "clusterlab/free_fermion.hpp"
#include "clusterlab/length_fit.hpp"
#include "clusterlab/localizable.hpp"

using namespace clusterlab;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using Check = std::function<void(Outcome&)>;

PauliString string_at(int n, int start, const std::vector<Pauli>& ops) {
  PauliString p;
  for (std::size_t k = 0; k < ops.size(); ++k) {
    if (ops[k] != Pauli::I) p.factors.push_back({(start + static_cast<int>(k)) % n, ops[k]});
  }
  return p;
}

void gap_at_zero_field(Outcome& o) {
  for (int n : {6, 8, 10, 12}) {
    const auto lv = dense_spectrum(cluster_hamiltonian(n, 0.0));
    const auto g = gap_from_spectrum(lv);
    double worst = 0;
    for (double e : lv) worst = std::max(worst, std::abs((e + n) / 2 - std::round((e + n) / 2)));
    o.detail << " n=" << n << ":gap=" << g.gap;
    o.require(std::abs(g.gap - 2.0) < 1e-9, "gap 2 at n=" + std::to_string(n));
    o.require(worst < 1e-9, "levels in {-n+2m} at n=" + std::to_string(n));
  }
}

void gap_closing(Outcome& o) {
  const double g05 = spectral_gap(cluster_hamiltonian(12, 0.5)).gap;
  const double g10 = spectral_gap(cluster_hamiltonian(12, 1.0)).gap;
  const double g15 = spectral_gap(cluster_hamiltonian(12, 1.5)).gap;
  o.detail << " n=12: g(0.5)=" << g05 << " g(1)=" << g10 << " g(1.5)=" << g15 << "; g(1) vs n:";
  o.require(g10 < g05 && g10 < g15, "B=1 gap below neighbours");
  double prev = INFINITY;
  for (int n : {8, 10, 12, 14}) {
    const double g = spectral_gap(cluster_hamiltonian(n, 1.0)).gap;
    o.detail << " " << g;
    o.require(g < prev, "decreasing at n=" + std::to_string(n));
    prev = g;
  }
}

void analytic_vs_ed(Outcome& o) {
  double worst = 0;
  for (double b : {0.0, 0.3, 0.5, 2.0}) {
    const auto gs = ground_state(cluster_hamiltonian(16, b)).state;
    for (int L = 3; L <= 8; ++L) {
      const double ed = two_point_connected(gs, Pauli::Z, Pauli::Z, 0, L - 1);
      worst = std::max(worst, std::abs(ed - czz_analytic(b, L)));
    }
  }
  o.detail << " max |analytic - ED| = " << worst;
  o.require(worst < 2e-2, "agreement within 2e-2");
}

void criticality(Outcome& o) {
  for (double b : {0.5, 1.0, 2.0}) {
    CorrelationSeries s;
    for (int L = 4; L <= 40; ++L) {
      s.L.push_back(L);
      s.values.push_back(czz_analytic(b, L));
    }
    const auto e = correlation_length(s);
    o.detail << " B=" << b << ":" << to_string(e.model);
    if (!e.infinite) o.detail << "(xi=" << e.xi << ")";
    const auto want = b == 1.0 ? DecayModel::power_law : DecayModel::exponential;
    o.require(e.model == want, "model at B=" + std::to_string(b));
  }
}

void deterministic_localization(Outcome& o) {
  const int n = 10;
  const auto gs = ground_state(cluster_hamiltonian(n, 0.0)).state;
  BranchOptions opts;
  opts.collect_branches = true;
  double worst = 0;
  int pairs = 0;
  for (int p = 0; p < n; ++p) {
    for (int q = p + 1; q < n; ++q) {
      const auto r = branch_average(gs, cluster_scheme_plan(n, p, q), opts);
      for (const auto& br : r.branches) worst = std::max(worst, 1.0 - br.concurrence);
      ++pairs;
    }
  }
  o.detail << " " << pairs << " pairs, max (1 - concurrence) over branches = " << worst;
  o.require(worst < 1e-9, "every branch maximally entangled");
}

void lower_bound_limit(Outcome& o) {
  const int n = 13;
  for (double b : {0.3, 0.5, 0.8}) {
    const auto gs = ground_state(cluster_hamiltonian(n, b)).state;
    const double limit = std::pow(1 - b * b, 0.25);
    o.detail << " B=" << b << " (E_inf=" << limit << "):";
    std::vector<double> dev;
    for (int k = 2; k <= 5; ++k) {
      const double v = branch_average(gs, lower_bound_scheme_plan(n, 2 * k + 1)).value;
      o.detail << " " << v;
      dev.push_back(std::abs(v - limit));
    }
    bool monotone = true;
    for (std::size_t i = 1; i < dev.size(); ++i) monotone = monotone && dev[i] <= dev[i - 1] + 1e-6;
    o.require(monotone, "monotone approach at B=" + std::to_string(b));
    o.require(dev.back() < 0.03, "final deviation at B=" + std::to_string(b));
  }
}

void figure2_reproduction(Outcome& o) {
  cli::Figure2Config cfg;
  cfg.b_grid = cli::parse_grid("0:2:0.1");
  cfg.n = 12;
  const auto pts = cli::figure2(cfg);
  std::string ent = " E-length diverges:", corr = " C-length finite:";
  for (const auto& p : pts) {
    const std::string tag = " " + std::to_string(p.b).substr(0, 3);
    o.require(p.error.empty() || std::abs(p.b - 1.0) < 1e-9, "no error at B=" + tag + " (" + p.error + ")");
    if (p.entanglement) ent += tag + "=" + (p.entanglement->infinite ? "1" : "0");
    if (p.correlation) corr += tag + "=" + (p.correlation->infinite ? "0" : "1");
    if (std::abs(p.b) <= 0.9 + 1e-9) {
      o.require(p.entanglement && p.entanglement->infinite, "entanglement divergent at B=" + tag);
    }
    if (p.b >= 1.2 - 1e-9) {
      o.require(p.entanglement && !p.entanglement->infinite, "entanglement finite at B=" + tag);
    }
    if (std::abs(std::abs(p.b) - 1.0) > 1e-9) {
      o.require(p.correlation && !p.correlation->infinite, "correlation finite at B=" + tag);
    }
  }
  o.detail << ent << ";" << corr;
}

void census(Outcome& o) {
  const int ring = 12;
  const auto gs0 = ground_state(cluster_hamiltonian(ring, 0.0)).state;
  for (int w : {5, 6}) {
    SurveyConfig c;
    c.window_n = w;
    const auto r = survey(gs0, c);
    o.detail << " B=0 w=" << w << ": " << r.nonvanishing << "/" << r.total;
    o.require(r.fraction == std::ldexp(1.0, -(2 + w)), "fraction 2^-(2+n) at n=" + std::to_string(w));
  }
  const auto gs = ground_state(cluster_hamiltonian(ring, 0.5)).state;
  std::vector<double> x, y;
  for (int w = 5; w <= 8; ++w) {
    SurveyConfig c;
    c.window_n = w;
    c.b_field = 0.5;
    const auto r = survey(gs, c);
    x.push_back(w);
    y.push_back(std::log(r.fraction));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / x.size();
    my += y[i] / y.size();
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double rate = std::exp(sxy / sxx);
  o.detail << "; B=0.5 rate over n=5..8: " << rate;
  o.require(rate >= 0.80 && rate <= 0.92, "rate in [0.80, 0.92]");
}

void three_point(Outcome& o) {
  const int n = 8;
  const auto gs = ground_state(cluster_hamiltonian(n, 0.0)).state;
  constexpr Pauli ops[4] = {Pauli::I, Pauli::X, Pauli::Y, Pauli::Z};
  double worst_other = 0, xzx = 0;
  for (Pauli a : ops) {
    for (Pauli b : ops) {
      for (Pauli c : ops) {
        if (a == Pauli::I && b == Pauli::I && c == Pauli::I) continue;
        for (int start = 0; start < n; ++start) {
          const double v = n_point(gs, string_at(n, start, {a, b, c}));
          if (a == Pauli::X && b == Pauli::Z && c == Pauli::X) {
            xzx = std::max(xzx, std::abs(v - 1.0));
          } else {
            worst_other = std::max(worst_other, std::abs(v));
          }
        }
      }
    }
  }
  o.detail << " max |other| = " << worst_other << ", max |XZX - 1| = " << xzx;
  o.require(worst_other < 1e-10, "non-XZX strings vanish");
  o.require(xzx < 1e-10, "XZX equals +1");
}

void truncation(Outcome& o) {
  const auto r1 = validate_perturbation({0.1, 0.1, 1.0, 1.0, 1.0});
  const auto r2 = validate_perturbation({0.05, 0.05, 1.0, 1.0, 1.0});
  const double shrink = r1.max_abs_dev / r2.max_abs_dev;
  o.detail << " max_rel_dev(J/U=0.1)=" << r1.max_rel_dev << ", abs deviation shrink on halving J = " << shrink;
  o.require(r1.max_rel_dev <= 0.08, "relative deviation <= 8%");
  o.require(shrink >= 8.0, "shrink >= 8x");
}

void raising_operator(Outcome& o) {
  double worst = 0;
  for (int n : {4, 6, 8, 10}) {
    const auto h = cluster_hamiltonian(n, 0.0);
    const auto gs = ground_state(h);
    for (int k = 0; k < n; ++k) {
      const PauliString x(1.0, {{k, Pauli::X}});
      const PauliString xyx(1.0, {{(k + n - 1) % n, Pauli::X}, {k, Pauli::Y}, {(k + 1) % n, Pauli::X}});
      const auto v = (apply(x, gs.state) + cplx(0, -1) * apply(xyx, gs.state)).normalized();
      const auto hv = apply(h, v);
      double r = 0;
      for (std::size_t i = 0; i < v.dim(); ++i) r += std::norm(hv[i] - (gs.energy + 2.0) * v[i]);
      worst = std::max(worst, std::sqrt(r));
    }
  }
  o.detail << " max residual = " << worst;
  o.require(worst < 1e-9, "eigenstate at ground + 2");
}

}  // namespace

int main() {
  const std::vector<std::tuple<int, std::string, double, Check>> criteria{
      {1, "gap 2 at B=0", 60, gap_at_zero_field},
      {2, "gap closing at |B|=1", 600, gap_closing},
      {3, "analytic zz correlator vs ED on 16 sites", 900, analytic_vs_ed},
      {4, "criticality classification", 60, criticality},
      {5, "deterministic localization at B=0", 120, deterministic_localization},
      {6, "lower-bound scheme limit", 600, lower_bound_limit},
      {7, "length scales vs B at n=12", 1800, figure2_reproduction},
      {8, "n-point census", 600, census},
      {9, "three-point selectivity at B=0", 60, three_point},
      {10, "perturbative truncation", 60, truncation},
      {11, "raising operator", 60, raising_operator},
  };
  int failures = 0;
  for (const auto& [id, name, budget, check] : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      check(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(secs < budget, "runtime budget " + std::to_string(static_cast<int>(budget)) + " s");
    failures += !o.pass;
    std::printf("%s criterion %d (%s, %.1f s):%s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), secs,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
