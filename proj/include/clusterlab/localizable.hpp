#pragma once

// Localizable entanglement between two spins: projective product-basis
// measurements on every other spin, averaged residual concurrence, the
// prescribed measurement schemes and a simulated-annealing search over
// measurement directions.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "clusterlab/spin_chain.hpp"
#include "json.hpp"

namespace clusterlab {

/// Measured direction n = (sin t cos p, sin t sin p, cos t). Outcome 0 is the
/// +1 eigenvector (cos t/2, e^{ip} sin t/2), outcome 1 its orthogonal partner.
struct MeasurementAngles {
  double theta = 0.0;
  double phi = 0.0;
};

inline constexpr MeasurementAngles kMeasureZ{0.0, 0.0};
inline constexpr MeasurementAngles kMeasureX{1.5707963267948966, 0.0};

struct MeasurementPlan {
  int n_sites = 0;
  int p = 0;
  int q = 1;
  /// One entry per site; entries at p and q are ignored.
  std::vector<MeasurementAngles> angles;

  MeasurementPlan() = default;
  MeasurementPlan(int n, int p_site, int q_site, MeasurementAngles fill = kMeasureZ);

  void validate() const;
  /// Sites other than p, q in ascending order.
  std::vector<int> measured_sites() const;
};

struct BranchResult {
  /// Bit k is the outcome on the k-th measured site (ascending site order).
  std::uint64_t outcome = 0;
  double probability = 0.0;
  /// Residual pair state, index 2 * bit_p + bit_q.
  std::array<cplx, 4> residual{};
  double concurrence = 0.0;
};

struct LocEntResult {
  double value = 0.0;
  MeasurementPlan plan;
  std::size_t branch_count = 0;
  double total_probability = 0.0;
  std::vector<BranchResult> branches;  // filled when requested
  std::vector<double> trace;           // optimizer best value per temperature step
};

struct BranchOptions {
  bool collect_branches = false;
  double probability_cutoff = 1e-14;
  int max_measured = 20;
};

/// 2 |a00 a11 - a01 a10| for a normalized two-qubit pure state.
double concurrence_pure(std::span<const cplx, 4> amplitudes);

/// Exact average residual concurrence over all measurement outcomes.
LocEntResult branch_average(const StateVector& state, const MeasurementPlan& plan,
                            const BranchOptions& opts = {});

/// Reusable evaluator for one state and target pair; the annealer calls it
/// many times with different angles.
class BranchEvaluator {
 public:
  BranchEvaluator(const StateVector& state, int p, int q, const BranchOptions& opts = {});

  int n_sites() const noexcept { return n_; }
  const std::vector<int>& measured_sites() const noexcept { return measured_; }

  /// angles[k] belongs to measured_sites()[k].
  LocEntResult evaluate(std::span<const MeasurementAngles> angles, bool collect = false) const;
  double value(std::span<const MeasurementAngles> angles) const;

 private:
  int n_;
  int p_;
  int q_;
  BranchOptions opts_;
  std::vector<int> measured_;
  std::vector<cplx> permuted_;  // bits: q, p, measured sites ascending
};

/// sigma^z on the spins strictly between p and q along the increasing-index
/// arc when it is the shorter one (ties included), otherwise along the other
/// arc; sigma^x on all remaining spins.
MeasurementPlan cluster_scheme_plan(int n, int p, int q);

enum class SchemeVariant {
  primary,    // sigma^x on spin 2, sigma^z on every other measured spin
  alternate,  // sigma^x on every measured spin
};

/// Lower-bound scheme for the pair (spin 1, spin L) = sites (0, L-1) with
/// L = 2k + 1. Throws DomainError for even L.
MeasurementPlan lower_bound_scheme_plan(int n, int L, SchemeVariant variant = SchemeVariant::primary);

/// Same scheme for an arbitrary pair, rotated so that p plays spin 1. Empty
/// when neither direction around the ring has an even separation.
std::optional<MeasurementPlan> lower_bound_plan_for_pair(int n, int p, int q);

struct AnnealConfig {
  double t0 = 0.5;
  double cooling = 0.97;
  int steps = 200;
  int proposals = 50;
  double sigma0 = 0.6;  // proposal width at t0, shrinks with T
  int random_restarts = 1;
  bool seed_with_schemes = true;
  std::uint64_t seed = 1;
  std::vector<MeasurementPlan> extra_starts;
};

/// Simulated annealing over all measurement angles, maximizing
/// branch_average. Chains start from the schemes (when enabled), any extra
/// starts, and random plans; the best chain wins, ties to the earliest.
LocEntResult optimize_plan(const StateVector& state, int p, int q, const AnnealConfig& cfg = {},
                           const BranchOptions& opts = {});

void to_json(nlohmann::json& j, const MeasurementPlan& plan);
void to_json(nlohmann::json& j, const LocEntResult& r);

}  // namespace clusterlab
