#include "clusterlab/localizable.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "clusterlab/errors.hpp"

namespace clusterlab {

namespace {

constexpr double kPi = std::numbers::pi;

std::array<cplx, 2> eigvec(const MeasurementAngles& a, int outcome) {
  const double c = std::cos(0.5 * a.theta), s = std::sin(0.5 * a.theta);
  const cplx e = std::polar(1.0, a.phi);
  if (outcome == 0) return {cplx(c), e * s};
  return {cplx(s), -e * c};
}

// Sequentially projects the measured sites, highest level first. v holds
// base << (k + 1) amplitudes whose top bit is the site measured at level k;
// leaf(amplitudes, probability, outcome) receives each surviving branch.
template <class Leaf>
void project(const cplx* v, int k, std::uint64_t outcome, std::size_t base,
             std::span<const MeasurementAngles> angles, double cutoff,
             std::vector<std::vector<cplx>>& buffers, Leaf& leaf) {
  const std::size_t half = base << k;
  auto& child = buffers[static_cast<std::size_t>(k)];
  for (int o = 0; o < 2; ++o) {
    const auto u = eigvec(angles[static_cast<std::size_t>(k)], o);
    const cplx c0 = std::conj(u[0]), c1 = std::conj(u[1]);
    double prob = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
      child[i] = c0 * v[i] + c1 * v[i + half];
      prob += std::norm(child[i]);
    }
    if (prob < cutoff) continue;
    const std::uint64_t next = outcome | (static_cast<std::uint64_t>(o) << k);
    if (k == 0) {
      leaf(child.data(), prob, next);
    } else {
      project(child.data(), k - 1, next, base, angles, cutoff, buffers, leaf);
    }
  }
}

std::vector<std::vector<cplx>> make_buffers(std::size_t base, std::size_t levels) {
  std::vector<std::vector<cplx>> b(levels);
  for (std::size_t k = 0; k < levels; ++k) b[k].resize(base << k);
  return b;
}

// Runs the projection over a full register, including the degenerate case of
// nothing to measure.
template <class Leaf>
void project_all(const std::vector<cplx>& v, std::size_t base, std::span<const MeasurementAngles> angles,
                 double cutoff, Leaf& leaf) {
  if (angles.empty()) {
    double prob = 0.0;
    for (const auto& a : v) prob += std::norm(a);
    if (prob >= cutoff) leaf(v.data(), prob, 0);
    return;
  }
  auto buffers = make_buffers(base, angles.size());
  project(v.data(), static_cast<int>(angles.size()) - 1, 0, base, angles, cutoff, buffers, leaf);
}

// Twice the determinant magnitude of an unnormalized pair state with bit 0 = q
// and bit 1 = p; equals probability times concurrence.
inline double weighted_concurrence(const cplx* r) { return 2.0 * std::abs(r[0] * r[3] - r[1] * r[2]); }

double reflect_theta(double t) {
  t = std::fmod(t, 2.0 * kPi);
  if (t < 0) t += 2.0 * kPi;
  return t > kPi ? 2.0 * kPi - t : t;
}

double wrap_phi(double p) {
  p = std::fmod(p, 2.0 * kPi);
  return p < 0 ? p + 2.0 * kPi : p;
}

int ring_distance_up(int from, int to, int n) { return ((to - from) % n + n) % n; }

// Single-site moves during annealing. For each measured site k it keeps the
// branches of all other measurements with k still open (8 amplitudes: q, p,
// k); a move on k then only projects those leaves. Caches are rebuilt lazily
// after a move on another site is accepted.
class IncrementalEvaluator {
 public:
  IncrementalEvaluator(const StateVector& state, int p, int q, const std::vector<int>& measured,
                       double cutoff)
      : m_(measured.size()), cutoff_(cutoff), registers_(m_), caches_(m_), valid_(m_, false) {
    for (std::size_t k = 0; k < m_; ++k) {
      auto& reg = registers_[k];
      reg.resize(state.dim());
      for (std::uint64_t s = 0; s < state.dim(); ++s) {
        std::uint64_t t = ((s >> q) & 1u) | (((s >> p) & 1u) << 1) | (((s >> measured[k]) & 1u) << 2);
        int pos = 3;
        for (std::size_t j = 0; j < m_; ++j) {
          if (j != k) t |= ((s >> measured[j]) & 1u) << pos++;
        }
        reg[t] = state[s];
      }
    }
  }

  /// Value with angles[k] replaced by trial, all else as in angles.
  double with_change(const std::vector<MeasurementAngles>& angles, std::size_t k, MeasurementAngles trial) {
    if (!valid_[k]) rebuild(angles, k);
    const auto u0 = eigvec(trial, 0), u1 = eigvec(trial, 1);
    const cplx a0 = std::conj(u0[0]), a1 = std::conj(u0[1]);
    const cplx b0 = std::conj(u1[0]), b1 = std::conj(u1[1]);
    const auto& leaves = caches_[k];
    double value = 0.0, total = 0.0;
    cplx r[4];
    for (std::size_t off = 0; off < leaves.size(); off += 8) {
      const cplx* v = leaves.data() + off;
      for (const auto& [c0, c1] : {std::pair{a0, a1}, std::pair{b0, b1}}) {
        double prob = 0.0;
        for (int i = 0; i < 4; ++i) {
          r[i] = c0 * v[i] + c1 * v[i + 4];
          prob += std::norm(r[i]);
        }
        if (prob < cutoff_) continue;
        value += weighted_concurrence(r);
        total += prob;
      }
    }
    return value / total;
  }

  void accept(std::size_t k) {
    for (std::size_t j = 0; j < m_; ++j) {
      if (j != k) valid_[j] = false;
    }
  }

 private:
  void rebuild(const std::vector<MeasurementAngles>& angles, std::size_t k) {
    std::vector<MeasurementAngles> others;
    for (std::size_t j = 0; j < m_; ++j) {
      if (j != k) others.push_back(angles[j]);
    }
    auto& leaves = caches_[k];
    leaves.clear();
    auto leaf = [&](const cplx* v, double, std::uint64_t) { leaves.insert(leaves.end(), v, v + 8); };
    project_all(registers_[k], 8, others, cutoff_, leaf);
    valid_[k] = true;
  }

  std::size_t m_;
  double cutoff_;
  std::vector<std::vector<cplx>> registers_;
  std::vector<std::vector<cplx>> caches_;
  std::vector<bool> valid_;
};

}  // namespace

// ---------------------------------------------------------------------------

MeasurementPlan::MeasurementPlan(int n, int p_site, int q_site, MeasurementAngles fill)
    : n_sites(n), p(p_site), q(q_site), angles(static_cast<std::size_t>(std::max(n, 0)), fill) {
  validate();
}

void MeasurementPlan::validate() const {
  if (n_sites < 2) throw DomainError("measurement plan needs at least two sites");
  if (p < 0 || p >= n_sites || q < 0 || q >= n_sites) throw DomainError("target pair outside the chain");
  if (p == q) throw DomainError("target pair must be two distinct sites");
  if (angles.size() != static_cast<std::size_t>(n_sites)) {
    throw DomainError("plan needs one angle pair per site");
  }
  for (const auto& a : angles) {
    if (!std::isfinite(a.theta) || !std::isfinite(a.phi)) throw DomainError("non-finite angle");
  }
}

std::vector<int> MeasurementPlan::measured_sites() const {
  std::vector<int> out;
  for (int s = 0; s < n_sites; ++s) {
    if (s != p && s != q) out.push_back(s);
  }
  return out;
}

double concurrence_pure(std::span<const cplx, 4> a) {
  const double nrm = std::norm(a[0]) + std::norm(a[1]) + std::norm(a[2]) + std::norm(a[3]);
  if (std::abs(nrm - 1.0) > 1e-10) {
    throw DomainError("concurrence_pure needs a normalized state (norm^2 = " + std::to_string(nrm) + ")");
  }
  return 2.0 * std::abs(a[0] * a[3] - a[1] * a[2]);
}

// ---------------------------------------------------------------------------

BranchEvaluator::BranchEvaluator(const StateVector& state, int p, int q, const BranchOptions& opts)
    : n_(state.n_sites()), p_(p), q_(q), opts_(opts) {
  if (p < 0 || p >= n_ || q < 0 || q >= n_ || p == q) throw DomainError("invalid target pair");
  if (n_ - 2 > opts.max_measured) {
    throw ResourceError(std::to_string(n_ - 2) + " measured spins exceed the cap of " +
                        std::to_string(opts.max_measured));
  }
  if (!state.is_normalized(1e-10)) throw DomainError("branch enumeration needs a normalized state");
  for (int s = 0; s < n_; ++s) {
    if (s != p && s != q) measured_.push_back(s);
  }
  permuted_.resize(state.dim());
  for (std::uint64_t s = 0; s < state.dim(); ++s) {
    std::uint64_t t = ((s >> q) & 1u) | (((s >> p) & 1u) << 1);
    for (std::size_t k = 0; k < measured_.size(); ++k) t |= ((s >> measured_[k]) & 1u) << (k + 2);
    permuted_[t] = state[s];
  }
}

LocEntResult BranchEvaluator::evaluate(std::span<const MeasurementAngles> angles, bool collect) const {
  if (angles.size() != measured_.size()) throw DomainError("one angle pair per measured site required");
  LocEntResult out;
  auto leaf = [&](const cplx* r, double prob, std::uint64_t outcome) {
    const double weighted = weighted_concurrence(r);
    out.value += weighted;
    out.total_probability += prob;
    ++out.branch_count;
    if (!collect) return;
    BranchResult b;
    b.outcome = outcome;
    b.probability = prob;
    const double inv = 1.0 / std::sqrt(prob);
    // Residual index is 2 * bit_p + bit_q, the same as the register layout.
    for (std::size_t i = 0; i < 4; ++i) b.residual[i] = r[i] * inv;
    b.concurrence = weighted / prob;
    out.branches.push_back(b);
  };
  project_all(permuted_, 4, angles, opts_.probability_cutoff, leaf);
  if (std::abs(out.total_probability - 1.0) > 1e-10) {
    throw std::logic_error("branch probabilities sum to " + std::to_string(out.total_probability));
  }
  out.value /= out.total_probability;
  return out;
}

double BranchEvaluator::value(std::span<const MeasurementAngles> angles) const {
  return evaluate(angles, false).value;
}

LocEntResult branch_average(const StateVector& state, const MeasurementPlan& plan,
                            const BranchOptions& opts) {
  plan.validate();
  if (plan.n_sites != state.n_sites()) throw DimensionError("plan and state sizes differ");
  const BranchEvaluator eval(state, plan.p, plan.q, opts);
  std::vector<MeasurementAngles> angles;
  for (int s : eval.measured_sites()) angles.push_back(plan.angles[static_cast<std::size_t>(s)]);
  LocEntResult r = eval.evaluate(angles, opts.collect_branches);
  r.plan = plan;
  return r;
}

// ---------------------------------------------------------------------------

MeasurementPlan cluster_scheme_plan(int n, int p, int q) {
  MeasurementPlan plan(n, p, q, kMeasureX);
  const int lo = std::min(p, q), hi = std::max(p, q);
  const int up = hi - lo;
  if (up <= n - up) {
    for (int s = lo + 1; s < hi; ++s) plan.angles[static_cast<std::size_t>(s)] = kMeasureZ;
  } else {
    for (int s = (hi + 1) % n; s != lo; s = (s + 1) % n) plan.angles[static_cast<std::size_t>(s)] = kMeasureZ;
  }
  return plan;
}

MeasurementPlan lower_bound_scheme_plan(int n, int L, SchemeVariant variant) {
  if (L % 2 == 0) throw DomainError("lower-bound scheme needs L = 2k + 1 (odd), got L = " + std::to_string(L));
  if (L < 3) throw DomainError("lower-bound scheme needs L >= 3");
  if (L > n) throw DomainError("L exceeds the chain length");
  MeasurementPlan plan(n, 0, L - 1, variant == SchemeVariant::primary ? kMeasureZ : kMeasureX);
  plan.angles[1] = kMeasureX;
  return plan;
}

std::optional<MeasurementPlan> lower_bound_plan_for_pair(int n, int p, int q) {
  const int up = ring_distance_up(p, q, n);
  int step = 0;
  if (up % 2 == 0) {
    step = 1;
  } else if ((n - up) % 2 == 0) {
    step = -1;
  } else {
    return std::nullopt;
  }
  MeasurementPlan plan(n, p, q, kMeasureZ);
  plan.angles[static_cast<std::size_t>(((p + step) % n + n) % n)] = kMeasureX;
  return plan;
}

// ---------------------------------------------------------------------------

LocEntResult optimize_plan(const StateVector& state, int p, int q, const AnnealConfig& cfg,
                           const BranchOptions& opts) {
  const int n = state.n_sites();
  const BranchEvaluator eval(state, p, q, opts);
  const auto& sites = eval.measured_sites();
  const std::size_t m = sites.size();

  auto angles_of = [&](const MeasurementPlan& plan) {
    std::vector<MeasurementAngles> a;
    for (int s : sites) a.push_back(plan.angles[static_cast<std::size_t>(s)]);
    return a;
  };

  std::vector<std::vector<MeasurementAngles>> starts;
  if (cfg.seed_with_schemes) {
    starts.push_back(angles_of(cluster_scheme_plan(n, p, q)));
    if (auto lb = lower_bound_plan_for_pair(n, p, q)) starts.push_back(angles_of(*lb));
  }
  for (const auto& plan : cfg.extra_starts) {
    if (plan.n_sites != n || plan.p != p || plan.q != q) throw DomainError("extra start plan does not match the pair");
    starts.push_back(angles_of(plan));
  }
  std::mt19937_64 init_rng(cfg.seed);
  for (int r = 0; r < cfg.random_restarts; ++r) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<MeasurementAngles> a(m);
    for (auto& x : a) x = {std::acos(1.0 - 2.0 * uni(init_rng)), 2.0 * kPi * uni(init_rng)};
    starts.push_back(std::move(a));
  }
  if (starts.empty()) throw DomainError("annealer has no starting plan");

  double best_value = -1.0;
  std::vector<MeasurementAngles> best_angles;
  std::vector<double> best_trace;

  for (std::size_t chain = 0; chain < starts.size(); ++chain) {
    std::seed_seq seq{cfg.seed, static_cast<std::uint64_t>(chain)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, m == 0 ? 0 : m - 1);

    auto current = starts[chain];
    double current_value = eval.value(current);
    IncrementalEvaluator inc(state, p, q, sites, opts.probability_cutoff);
    auto chain_best = current;
    double chain_best_value = current_value;
    std::vector<double> trace;

    double temperature = cfg.t0;
    for (int step = 0; step < cfg.steps && m > 0; ++step) {
      const double sigma = std::max(1e-3, cfg.sigma0 * temperature / cfg.t0);
      for (int prop = 0; prop < cfg.proposals; ++prop) {
        const std::size_t k = pick(rng);
        const MeasurementAngles trial{reflect_theta(current[k].theta + sigma * gauss(rng)),
                                      wrap_phi(current[k].phi + sigma * gauss(rng))};
        const double v = inc.with_change(current, k, trial);
        const double delta = v - current_value;
        if (delta >= 0.0 || uni(rng) < std::exp(delta / temperature)) {
          current[k] = trial;
          current_value = v;
          inc.accept(k);
          if (v > chain_best_value) {
            chain_best_value = v;
            chain_best = current;
          }
        }
      }
      trace.push_back(chain_best_value);
      temperature *= cfg.cooling;
    }
    if (chain_best_value > best_value) {
      best_value = chain_best_value;
      best_angles = chain_best;
      best_trace = std::move(trace);
    }
  }

  MeasurementPlan plan(n, p, q);
  for (std::size_t k = 0; k < m; ++k) plan.angles[static_cast<std::size_t>(sites[k])] = best_angles[k];
  LocEntResult r = eval.evaluate(best_angles, opts.collect_branches);
  r.plan = plan;
  r.trace = std::move(best_trace);
  return r;
}

// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const MeasurementPlan& plan) {
  j = nlohmann::json::object();
  for (int s : plan.measured_sites()) {
    const auto& a = plan.angles[static_cast<std::size_t>(s)];
    j[std::to_string(s)] = {a.theta, a.phi};
  }
}

void to_json(nlohmann::json& j, const LocEntResult& r) {
  j = nlohmann::json{{"n", r.plan.n_sites},
                     {"pair", {r.plan.p, r.plan.q}},
                     {"value", r.value},
                     {"plan", r.plan},
                     {"branches", r.branch_count},
                     {"total_probability", r.total_probability}};
}

}  // namespace clusterlab
