#include "clusterlab/correlations.hpp"

#include <bit>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "clusterlab/errors.hpp"

namespace clusterlab {

namespace {

void check_site(const StateVector& state, int site) {
  if (site < 0 || site >= state.n_sites()) {
    throw DomainError("site " + std::to_string(site) + " outside the chain of " +
                      std::to_string(state.n_sites()));
  }
}

// In-place Walsh-Hadamard transform: out[g] = sum_u in[u] (-1)^{popcount(u & g)}.
void walsh_hadamard(std::vector<cplx>& v) {
  for (std::size_t h = 1; h < v.size(); h <<= 1) {
    for (std::size_t i = 0; i < v.size(); i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        const cplx a = v[j], b = v[j + h];
        v[j] = a + b;
        v[j + h] = a - b;
      }
    }
  }
}

// For every window string, encoded by its flip pattern f (X/Y) and sign
// pattern g (Y/Z), <P> = i^{|f&g|} sum_s conj(psi[s^F]) psi[s] (-1)^{|u(s)&g|}
// where u(s) are the window bits of s. Grouping by u turns the inner sum over
// g into a Walsh-Hadamard transform.
std::uint64_t count_exhaustive(const StateVector& state, const std::vector<int>& sites,
                               double threshold) {
  const std::size_t w = sites.size();
  const std::size_t patterns = std::size_t{1} << w;
  std::vector<std::uint32_t> window_bits(state.dim());
  for (std::uint64_t s = 0; s < state.dim(); ++s) {
    std::uint32_t u = 0;
    for (std::size_t k = 0; k < w; ++k) u |= static_cast<std::uint32_t>((s >> sites[k]) & 1u) << k;
    window_bits[s] = u;
  }
  static constexpr cplx kPowI[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

  std::uint64_t count = 0;
  std::vector<cplx> marginal(patterns);
  for (std::size_t f = 0; f < patterns; ++f) {
    std::uint64_t flip = 0;
    for (std::size_t k = 0; k < w; ++k) {
      if (f >> k & 1u) flip |= std::uint64_t{1} << sites[k];
    }
    std::fill(marginal.begin(), marginal.end(), cplx{});
    for (std::uint64_t s = 0; s < state.dim(); ++s) {
      marginal[window_bits[s]] += std::conj(state[s ^ flip]) * state[s];
    }
    walsh_hadamard(marginal);
    for (std::size_t g = 0; g < patterns; ++g) {
      const cplx value = kPowI[std::popcount(f & g) % 4] * marginal[g];
      if (std::abs(value.real()) > threshold) ++count;
    }
  }
  return count;
}

}  // namespace

double two_point_connected(const StateVector& state, Pauli alpha, Pauli beta, int i, int j) {
  check_site(state, i);
  check_site(state, j);
  if (i == j) throw DomainError("connected two-point function needs distinct sites");
  const double both = expectation(state, PauliString(1.0, {{i, alpha}, {j, beta}}));
  const double first = expectation(state, PauliString(1.0, {{i, alpha}}));
  const double second = expectation(state, PauliString(1.0, {{j, beta}}));
  return both - first * second;
}

double n_point(const StateVector& state, const PauliString& op) { return expectation(state, op); }

SurveyReport survey(const StateVector& state, const SurveyConfig& cfg) {
  const int n = state.n_sites();
  if (cfg.window_n <= 4) throw DomainError("survey window must span more than 4 sites");
  if (cfg.window_n > n) throw DomainError("survey window larger than the chain");
  if (cfg.threshold < 0) throw DomainError("threshold must be non-negative");

  std::vector<int> sites(static_cast<std::size_t>(cfg.window_n));
  for (int k = 0; k < cfg.window_n; ++k) sites[static_cast<std::size_t>(k)] = ((cfg.start_site + k) % n + n) % n;

  SurveyReport r;
  r.n_sites_window = cfg.window_n;
  r.b_field = cfg.b_field;
  r.mode = cfg.mode;
  r.threshold = cfg.threshold;

  if (cfg.mode == SurveyMode::exhaustive) {
    const std::uint64_t total = std::uint64_t{1} << (2 * cfg.window_n);
    if (total > kExhaustiveLimit) {
      throw ResourceError("exhaustive survey of 4^" + std::to_string(cfg.window_n) +
                          " strings exceeds the limit; use sampled mode");
    }
    r.total = total;
    r.nonvanishing = count_exhaustive(state, sites, cfg.threshold);
  } else {
    if (cfg.samples == 0) throw DomainError("sampled survey needs samples > 0");
    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<int> pick(0, 3);
    constexpr Pauli kOps[4] = {Pauli::I, Pauli::X, Pauli::Y, Pauli::Z};
    for (std::uint64_t t = 0; t < cfg.samples; ++t) {
      PauliString p;
      for (int s : sites) {
        const Pauli op = kOps[pick(rng)];
        if (op != Pauli::I) p.factors.push_back({s, op});
      }
      if (std::abs(expectation(state, p)) > cfg.threshold) ++r.nonvanishing;
    }
    r.total = cfg.samples;
  }
  r.fraction = static_cast<double>(r.nonvanishing) / static_cast<double>(r.total);
  return r;
}

void to_json(nlohmann::json& j, const SurveyReport& r) {
  j = nlohmann::json{{"n_sites_window", r.n_sites_window},
                     {"b_field", std::isfinite(r.b_field) ? nlohmann::json(r.b_field) : nlohmann::json(nullptr)},
                     {"mode", r.mode == SurveyMode::exhaustive ? "exhaustive" : "sampled"},
                     {"total", r.total},
                     {"nonvanishing", r.nonvanishing},
                     {"fraction", r.fraction},
                     {"threshold", r.threshold}};
}

}  // namespace clusterlab
