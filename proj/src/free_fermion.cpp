#include "clusterlab/free_fermion.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "clusterlab/errors.hpp"

namespace clusterlab {

namespace {

constexpr int kOrder = 20;

struct GaussLegendre {
  std::array<double, kOrder> nodes{};
  std::array<double, kOrder> weights{};

  GaussLegendre() {
    // Newton iteration on P_n from the Chebyshev initial guess.
    for (int i = 0; i < kOrder; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (kOrder + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= kOrder; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = kOrder * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

const GaussLegendre& rule() {
  static const GaussLegendre gl;
  return gl;
}

double composite(const std::function<double(double)>& f, double a, double b, int panels) {
  const auto& gl = rule();
  const double h = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    double s = 0.0;
    for (int i = 0; i < kOrder; ++i) s += gl.weights[i] * f(mid + 0.5 * h * gl.nodes[i]);
    sum += 0.5 * h * s;
  }
  return sum;
}

}  // namespace

double Dispersion::operator()(double r) const {
  // B^2 + 1 + 2B cos r written as a sum of non-negative terms, so the zero at
  // |B| = 1 is approached without cancellation.
  if (b_ >= 0) {
    const double c = std::cos(0.5 * r);
    return std::sqrt((b_ - 1.0) * (b_ - 1.0) + 4.0 * b_ * c * c);
  }
  const double s = std::sin(0.5 * r);
  return std::sqrt((b_ + 1.0) * (b_ + 1.0) - 4.0 * b_ * s * s);
}

double Dispersion::minimum() const { return std::abs(std::abs(b_) - 1.0); }

double Dispersion::argmin() const { return b_ >= 0.0 ? std::numbers::pi : 0.0; }

double energy_gap(double b_field) { return 2.0 * Dispersion(b_field).minimum(); }

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts, int min_panels) {
  int panels = std::max(1, min_panels);
  double prev = composite(f, a, b, panels);
  for (int d = 0; d < opts.max_doublings; ++d) {
    panels *= 2;
    const double next = composite(f, a, b, panels);
    if (std::abs(next - prev) < opts.tol) return next;
    prev = next;
  }
  throw ConvergenceError("quadrature did not converge with " + std::to_string(panels) +
                             " panels; increase max_doublings (node budget)",
                         prev);
}

double czz_analytic(double b_field, int L, const QuadratureOptions& opts) {
  if (L < 2) throw DomainError("czz_analytic needs L >= 2");
  const Dispersion lambda(b_field);
  const double freq = 0.5 * (L - 1);
  const double pi = std::numbers::pi;

  auto sin_kernel = [&](double r) { return std::sin(r) / lambda(r) * std::sin(freq * r); };
  auto cos_kernel = [&](double r) {
    return (b_field + std::cos(r)) / lambda(r) * std::cos(freq * r);
  };

  // Lambda can vanish at r = pi (B = 1) or r = 0, +-2pi (B = -1); split there
  // so each panel has a smooth integrand. Start with enough panels to resolve
  // the oscillating kernel.
  const int min_panels = std::max(1, static_cast<int>(std::ceil(freq)));
  constexpr std::array<double, 5> kBreaks{-2.0, -1.0, 0.0, 1.0, 2.0};
  double sin_int = 0.0, cos_int = 0.0;
  for (std::size_t k = 0; k + 1 < kBreaks.size(); ++k) {
    const double a = kBreaks[k] * pi, b = kBreaks[k + 1] * pi;
    sin_int += integrate(sin_kernel, a, b, opts, min_panels);
    cos_int += integrate(cos_kernel, a, b, opts, min_panels);
  }
  sin_int /= 4.0 * pi;
  cos_int /= 4.0 * pi;
  return sin_int * sin_int - cos_int * cos_int;
}

}  // namespace clusterlab
