#include "clusterlab/length_fit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "clusterlab/csv.hpp"
#include "clusterlab/errors.hpp"

namespace clusterlab {

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

// Least squares of y on x, with an extra 0/1 regressor when given one that
// is not constant.
LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y,
                      const std::vector<double>* group = nullptr) {
  const auto n = static_cast<Eigen::Index>(x.size());
  bool use_group = false;
  if (group) {
    for (double g : *group) use_group |= g != group->front();
  }
  Eigen::MatrixXd a(n, use_group ? 3 : 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    a(i, 0) = 1.0;
    a(i, 1) = x[k];
    if (use_group) a(i, 2) = (*group)[k];
    b(i) = y[k];
  }
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
  LineFit f;
  f.intercept = coef(0);
  f.slope = coef(1);
  f.rms = std::sqrt((a * coef - b).squaredNorm() / static_cast<double>(n));
  return f;
}

// Aitken extrapolation on the last three points. A series counts as
// saturating when it has stopped changing, or when its decrements shrink and
// the extrapolated limit stays a sizeable fraction of the last value.
bool saturates(const std::vector<double>& v, const FitOptions& opts) {
  if (v.size() < 3) return false;
  const double v1 = v[v.size() - 3], v2 = v[v.size() - 2], v3 = v[v.size() - 1];
  if (v3 < opts.saturation_floor) return false;
  const double d1 = v2 - v1, d2 = v3 - v2;
  if (std::abs(d2) <= 1e-12 * std::abs(v3)) return true;
  if (std::abs(d2) >= std::abs(d1)) return false;
  const double limit = v3 - d2 * d2 / (d2 - d1);
  return limit >= opts.saturation_fraction * v3;
}

}  // namespace

void CorrelationSeries::validate() const {
  if (L.size() != values.size()) throw DomainError("series L and values differ in length");
  for (std::size_t i = 1; i < L.size(); ++i) {
    if (L[i] <= L[i - 1]) throw DomainError("series L must be strictly increasing");
  }
}

std::string to_string(DecayModel m) {
  switch (m) {
    case DecayModel::exponential: return "exponential";
    case DecayModel::power_law: return "power_law";
    case DecayModel::saturating: return "saturating";
    case DecayModel::unresolved: return "unresolved";
  }
  return "unknown";
}

LengthEstimate correlation_length(const CorrelationSeries& series, const FitOptions& opts) {
  series.validate();
  std::vector<int> ls;
  std::vector<double> vs;
  for (std::size_t i = 0; i < series.L.size(); ++i) {
    if (std::abs(series.values[i]) > opts.noise_floor) {
      ls.push_back(series.L[i]);
      vs.push_back(std::abs(series.values[i]));
    }
  }
  if (ls.empty()) throw DomainError("correlations numerically zero");
  if (ls.size() < opts.min_points) {
    throw DomainError("need at least " + std::to_string(opts.min_points) +
                      " points above the noise floor, have " + std::to_string(ls.size()));
  }

  const int l_max = ls.back();
  int l_min = opts.window_min.value_or(std::max(4, l_max / 2));
  // Keep enough points in the window for the chosen regression.
  const std::size_t keep = std::min(ls.size(), std::size_t{opts.alternating ? 4u : 3u});
  l_min = std::min(l_min, ls[ls.size() - keep]);

  std::vector<double> x, logx, y, parity, window_values;
  for (std::size_t i = 0; i < ls.size(); ++i) {
    if (ls[i] < l_min) continue;
    x.push_back(ls[i]);
    logx.push_back(std::log(static_cast<double>(ls[i])));
    y.push_back(std::log(vs[i]));
    parity.push_back(ls[i] % 2 == 0 ? 0.0 : 1.0);
    window_values.push_back(vs[i]);
  }

  const std::vector<double>* group = opts.alternating ? &parity : nullptr;
  const LineFit exp_fit = least_squares(x, y, group);
  const LineFit pow_fit = least_squares(logx, y, group);

  LengthEstimate est;
  est.window_min = static_cast<int>(x.front());
  est.window_max = l_max;
  est.slope = exp_fit.slope;

  if ((!opts.alternating && saturates(window_values, opts)) || exp_fit.slope >= 0.0) {
    est.infinite = true;
    est.model = DecayModel::saturating;
    est.fit_residual = exp_fit.rms;
    return est;
  }
  if (exp_fit.rms > 1e-12 && exp_fit.rms >= opts.power_law_factor * pow_fit.rms) {
    est.infinite = true;
    est.model = DecayModel::power_law;
    est.fit_residual = pow_fit.rms;
    return est;
  }
  est.model = DecayModel::exponential;
  est.xi = -1.0 / exp_fit.slope;
  est.fit_residual = exp_fit.rms;
  if (opts.resolution_limit && est.xi > *opts.resolution_limit) {
    est.infinite = true;
    est.model = DecayModel::unresolved;
  }
  return est;
}

LengthEstimate entanglement_length(const CorrelationSeries& series, const FitOptions& opts) {
  return correlation_length(series, opts);
}

void to_json(nlohmann::json& j, const LengthEstimate& e) {
  j = nlohmann::json{{"xi", e.infinite ? nlohmann::json(nullptr) : nlohmann::json(e.xi)},
                     {"diverges", e.infinite},
                     {"model", to_string(e.model)},
                     {"residual", e.fit_residual},
                     {"window", {e.window_min, e.window_max}}};
}

void write_series_csv(std::ostream& out, const CorrelationSeries& series) {
  series.validate();
  out << "L,value\n";
  for (std::size_t i = 0; i < series.L.size(); ++i) {
    write_csv_row(out, {std::to_string(series.L[i]), fmt12(series.values[i])});
  }
}

CorrelationSeries read_series_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("L,value", 0) != 0) {
    throw DomainError("series CSV must start with header 'L,value'");
  }
  CorrelationSeries s;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DomainError("malformed CSV row '" + line + "'");
    try {
      s.L.push_back(std::stoi(line.substr(0, comma)));
      s.values.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw DomainError("malformed CSV row '" + line + "'");
    }
  }
  s.validate();
  return s;
}

}  // namespace clusterlab
