#pragma once

// Decay-length estimation for correlation and entanglement series.

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace clusterlab {

enum class SeriesKind { zz_analytic, zz_ed, entanglement, generic };

/// values[k] is the quantity between spin 1 and spin L[k]; L strictly
/// increasing.
struct CorrelationSeries {
  std::vector<int> L;
  std::vector<double> values;
  SeriesKind kind = SeriesKind::generic;

  void validate() const;
};

enum class DecayModel {
  exponential,  // finite length
  power_law,    // log|v| linear in log L, length infinite
  saturating,   // approaches a non-zero constant, length infinite
  unresolved,   // decay length beyond the resolution limit, treated as infinite
};

std::string to_string(DecayModel m);

struct LengthEstimate {
  double xi = 0.0;  // meaningful only when !infinite
  bool infinite = false;
  DecayModel model = DecayModel::exponential;
  double fit_residual = 0.0;  // RMS residual of the selected fit
  int window_min = 0;
  int window_max = 0;
  double slope = 0.0;  // d log|v| / dL from the exponential fit
};

struct FitOptions {
  double noise_floor = 1e-13;
  std::size_t min_points = 5;
  /// Power law is chosen when its residual is smaller by at least this factor.
  double power_law_factor = 4.0;
  /// Lower edge of the fit window; default max(4, L_max / 2).
  std::optional<int> window_min;
  /// Saturation: extrapolated asymptote >= fraction * last value, and the last
  /// value above floor.
  double saturation_fraction = 0.5;
  double saturation_floor = 1e-3;
  /// Values on even and odd L form two sublattice branches: fit a common
  /// slope with one offset per parity and skip the monotone saturation test.
  bool alternating = false;
  /// Exponential lengths above this (typically the system size) cannot be
  /// told apart from no decay and are flagged infinite.
  std::optional<double> resolution_limit;
};

/// xi = -1/slope of log|C| against L over the large-L window, with power-law
/// and saturation detection. Throws DomainError when the series is
/// numerically zero or too short.
LengthEstimate correlation_length(const CorrelationSeries& series, const FitOptions& opts = {});

/// Same contract applied to localizable-entanglement series.
LengthEstimate entanglement_length(const CorrelationSeries& series, const FitOptions& opts = {});

void to_json(nlohmann::json& j, const LengthEstimate& e);

/// CSV with header "L,value".
void write_series_csv(std::ostream& out, const CorrelationSeries& series);
CorrelationSeries read_series_csv(std::istream& in);

}  // namespace clusterlab
