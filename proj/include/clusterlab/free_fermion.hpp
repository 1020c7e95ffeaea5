#pragma once

// Analytic results for the periodic cluster model with a transverse field:
// quasiparticle dispersion, many-body gap and the two-point C^zz correlator
// in the thermodynamic limit.

#include <functional>

namespace clusterlab {

class Dispersion {
 public:
  explicit Dispersion(double b_field) : b_(b_field) {}

  double b_field() const noexcept { return b_; }

  /// sqrt(B^2 + 1 + 2 B cos r)
  double operator()(double r) const;

  /// | |B| - 1 |
  double minimum() const;
  /// pi for B >= 0, 0 for B < 0.
  double argmin() const;

 private:
  double b_;
};

/// 2 * min_r Lambda(r): equals 2 at B = 0 and closes at |B| = 1.
double energy_gap(double b_field);

struct QuadratureOptions {
  /// Successive composite estimates must agree to this absolute tolerance.
  double tol = 1e-13;
  int max_doublings = 16;
};

/// Composite Gauss-Legendre integral of f over [a, b], doubling the number
/// of sub-panels until two successive estimates agree. Throws
/// ConvergenceError when the panel budget is exhausted.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts = {}, int min_panels = 1);

/// Connected <sigma^z_1 sigma^z_L> of the infinite chain:
///   (1/4pi int_{-2pi}^{2pi} sin r / Lambda(r) * sin((L-1) r / 2) dr)^2
/// - (1/4pi int_{-2pi}^{2pi} (B + cos r) / Lambda(r) * cos((L-1) r / 2) dr)^2
/// Requires L >= 2.
double czz_analytic(double b_field, int L, const QuadratureOptions& opts = {});

}  // namespace clusterlab
