#pragma once

#include <cstdint>
#include <limits>

#include "clusterlab/spin_chain.hpp"
#include "json.hpp"

namespace clusterlab {

/// <s^a_i s^b_j> - <s^a_i><s^b_j>. Requires i != j.
double two_point_connected(const StateVector& state, Pauli alpha, Pauli beta, int i, int j);

/// Plain expectation <P> of an arbitrary Pauli string.
double n_point(const StateVector& state, const PauliString& op);

enum class SurveyMode { exhaustive, sampled };

struct SurveyConfig {
  int window_n = 5;
  SurveyMode mode = SurveyMode::exhaustive;
  std::uint64_t samples = 10000;  // sampled mode only
  double threshold = 1e-8;
  std::uint64_t seed = 1;
  int start_site = 0;
  /// Recorded in the report only.
  double b_field = std::numeric_limits<double>::quiet_NaN();
};

struct SurveyReport {
  int n_sites_window = 0;
  double b_field = 0.0;
  SurveyMode mode = SurveyMode::exhaustive;
  std::uint64_t total = 0;
  std::uint64_t nonvanishing = 0;
  double fraction = 0.0;
  double threshold = 0.0;
};

inline constexpr std::uint64_t kExhaustiveLimit = 10'000'000;

/// Counts Pauli strings on window_n consecutive sites (periodic wrap) whose
/// expectation exceeds the threshold in magnitude. Exhaustive mode covers all
/// 4^window_n strings, including the identity. Requires window_n > 4.
SurveyReport survey(const StateVector& state, const SurveyConfig& cfg);

void to_json(nlohmann::json& j, const SurveyReport& r);

}  // namespace clusterlab
