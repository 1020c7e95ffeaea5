#include <cmath>

#include "clusterlab/correlations.hpp"
#include "clusterlab/eigensolver.hpp"
#include "clusterlab/errors.hpp"
#include "clusterlab/free_fermion.hpp"
#include "doctest.h"
#include "oracle.hpp"

using namespace clusterlab;

namespace {

StateVector ghz3() {
  std::vector<cplx> a(8);
  a[0] = a[7] = 1.0 / std::sqrt(2.0);
  return StateVector(3, a);
}

constexpr Pauli kAxes[3] = {Pauli::X, Pauli::Y, Pauli::Z};

}  // namespace

TEST_CASE("connected correlations on simple states") {
  const auto up = StateVector::basis_state(4, 0);
  for (Pauli a : kAxes) {
    for (Pauli b : kAxes) CHECK(std::abs(two_point_connected(up, a, b, 0, 2)) < 1e-15);
  }
  const auto g = ghz3();
  CHECK(two_point_connected(g, Pauli::Z, Pauli::Z, 0, 1) == doctest::Approx(1.0));
  CHECK(two_point_connected(g, Pauli::Z, Pauli::Z, 0, 2) == doctest::Approx(1.0));
  CHECK_THROWS_AS(two_point_connected(g, Pauli::Z, Pauli::Z, 1, 1), DomainError);
  CHECK_THROWS_AS(two_point_connected(g, Pauli::Z, Pauli::Z, 0, 3), DomainError);
}

TEST_CASE("connected correlator is symmetric under exchange") {
  const auto gs = ground_state(cluster_hamiltonian(9, 0.6)).state;
  for (Pauli a : kAxes) {
    for (Pauli b : kAxes) {
      CHECK(two_point_connected(gs, a, b, 1, 4) == doctest::Approx(two_point_connected(gs, b, a, 4, 1)).epsilon(1e-12));
    }
  }
}

TEST_CASE("connected zz against reference ground state") {
  const int n = 10;
  const auto ref = oracle::ground(oracle::cluster(n, 0.7));
  const auto gs = ground_state(cluster_hamiltonian(n, 0.7)).state;
  for (int j = 1; j < n; ++j) {
    const double zz = oracle::expect(ref, oracle::site_op(n, {{0, 'Z'}, {j, 'Z'}}));
    const double z0 = oracle::expect(ref, oracle::site_op(n, {{0, 'Z'}}));
    const double zj = oracle::expect(ref, oracle::site_op(n, {{j, 'Z'}}));
    CHECK(two_point_connected(gs, Pauli::Z, Pauli::Z, 0, j) == doctest::Approx(zz - z0 * zj).epsilon(1e-9));
  }
}

TEST_CASE("B=0 cluster zz at distance 2 agrees with the analytic value") {
  const auto gs = ground_state(cluster_hamiltonian(8, 0.0)).state;
  CHECK(std::abs(two_point_connected(gs, Pauli::Z, Pauli::Z, 1, 3) - czz_analytic(0.0, 3)) < 2e-2);
}

TEST_CASE("three-site strings at B=0") {
  const auto gs = ground_state(cluster_hamiltonian(8, 0.0)).state;
  constexpr Pauli ops[4] = {Pauli::I, Pauli::X, Pauli::Y, Pauli::Z};
  for (Pauli a : ops) {
    for (Pauli b : ops) {
      for (Pauli c : ops) {
        if (a == Pauli::I && b == Pauli::I && c == Pauli::I) continue;
        const double v = n_point(gs, PauliString(1.0, {{2, a}, {3, b}, {4, c}}));
        if (a == Pauli::X && b == Pauli::Z && c == Pauli::X) {
          CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
        } else {
          CHECK(std::abs(v) < 1e-10);
        }
      }
    }
  }
}

TEST_CASE("nearest-neighbour zz is nonzero at B=0.5") {
  const auto gs = ground_state(cluster_hamiltonian(10, 0.5)).state;
  CHECK(std::abs(n_point(gs, PauliString::parse("Z1 Z2"))) > 1e-3);
}

TEST_CASE("in-plane magnetization vanishes") {
  for (double b : {0.0, 0.4, 1.0, 1.6}) {
    const auto gs = ground_state(cluster_hamiltonian(8, b)).state;
    for (int i = 0; i < 8; ++i) {
      CHECK(std::abs(n_point(gs, PauliString(1.0, {{i, Pauli::X}}))) < 1e-9);
      CHECK(std::abs(n_point(gs, PauliString(1.0, {{i, Pauli::Y}}))) < 1e-9);
    }
  }
}

TEST_CASE("survey at B=0 counts exact powers of two") {
  const auto gs = ground_state(cluster_hamiltonian(11, 0.0)).state;
  for (int w : {5, 6, 7}) {
    SurveyConfig c;
    c.window_n = w;
    const auto r = survey(gs, c);
    CHECK(r.total == (std::uint64_t{1} << (2 * w)));
    CHECK(std::has_single_bit(r.nonvanishing));
    CHECK(r.fraction == std::ldexp(1.0, -(w + 2)));
  }
}

TEST_CASE("exhaustive survey matches direct expectation values") {
  const int n = 9, w = 5;
  const auto gs = ground_state(cluster_hamiltonian(n, 0.5)).state;
  SurveyConfig c;
  c.window_n = w;
  c.start_site = 6;  // wraps around the ring
  const auto r = survey(gs, c);
  std::uint64_t count = 0;
  constexpr Pauli ops[4] = {Pauli::I, Pauli::X, Pauli::Y, Pauli::Z};
  for (std::uint32_t code = 0; code < (1u << (2 * w)); ++code) {
    PauliString p;
    for (int k = 0; k < w; ++k) {
      const Pauli op = ops[(code >> (2 * k)) & 3u];
      if (op != Pauli::I) p.factors.push_back({(6 + k) % n, op});
    }
    if (std::abs(expectation(gs, p)) > c.threshold) ++count;
  }
  CHECK(r.nonvanishing == count);
}

TEST_CASE("survey is translation invariant") {
  const auto gs = ground_state(cluster_hamiltonian(10, 0.5)).state;
  SurveyConfig a, b;
  a.window_n = b.window_n = 5;
  b.start_site = 3;
  CHECK(survey(gs, a).nonvanishing == survey(gs, b).nonvanishing);
}

TEST_CASE("sampled survey is reproducible and consistent") {
  const auto gs = ground_state(cluster_hamiltonian(9, 0.0)).state;
  SurveyConfig c;
  c.window_n = 5;
  c.mode = SurveyMode::sampled;
  c.samples = 4000;
  c.seed = 42;
  const auto r1 = survey(gs, c), r2 = survey(gs, c);
  CHECK(r1.nonvanishing == r2.nonvanishing);
  CHECK(r1.fraction == doctest::Approx(1.0 / 128).epsilon(0.5));
}

TEST_CASE("survey argument checks") {
  const auto gs = ground_state(cluster_hamiltonian(8, 0.0)).state;
  SurveyConfig c;
  c.window_n = 4;
  CHECK_THROWS_AS(survey(gs, c), DomainError);
  c.window_n = 9;
  CHECK_THROWS_AS(survey(gs, c), DomainError);
  c.window_n = 5;
  c.mode = SurveyMode::sampled;
  c.samples = 0;
  CHECK_THROWS_AS(survey(gs, c), DomainError);
  const auto big = ground_state(cluster_hamiltonian(13, 0.0)).state;
  SurveyConfig e;
  e.window_n = 12;
  CHECK_THROWS_AS(survey(big, e), ResourceError);
  nlohmann::json j = survey(gs, SurveyConfig{});
  CHECK(j["mode"] == "exhaustive");
  CHECK(j["b_field"].is_null());
}
