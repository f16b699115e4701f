#pragma once

// Spectral quadrature over the positive-k window used to superpose
// stationary states. The integrand is entire and Gaussian-damped, so
// Gauss-Legendre converges superalgebraically; the trapezoid rule is kept
// for cross-checks.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "wavestep/errors.hpp"
#include "wavestep/model.hpp"

namespace wavestep {

namespace detail {

struct QuadNode {
  double x;  // abscissa
  double w;  // weight
};

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on the
// three-term recurrence. Nodes come out symmetric and sorted ascending.
inline std::vector<QuadNode> gauss_legendre_reference(int n) {
  std::vector<QuadNode> q(static_cast<size_t>(n));
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi-style initial guess, then Newton.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q[static_cast<size_t>(i)] = {-x, w};  // cos guess starts near +1; store ascending
    q[static_cast<size_t>(n - 1 - i)] = {x, w};
  }
  if (n % 2 == 1) q[static_cast<size_t>(n / 2)].x = 0.0;  // middle node is exact
  return q;
}

}  // namespace detail

struct KQuadrature {
  enum class Rule { trapezoid, gauss_legendre };

  double k_lo;
  double k_hi;
  int n_nodes;
  Rule rule;

  static constexpr double k_floor = 1e-6;  // Theta(k): strictly positive domain

  KQuadrature(double k_lo_, double k_hi_, int n_nodes_, Rule rule_ = Rule::gauss_legendre)
      : k_lo(k_lo_), k_hi(k_hi_), n_nodes(n_nodes_), rule(rule_) {
    if (!(k_lo > 0.0)) throw SchemaError("k_lo", "quadrature window must satisfy k_lo > 0");
    if (!(k_lo < k_hi)) throw SchemaError("k_hi", "quadrature window must satisfy k_lo < k_hi");
    if (n_nodes < 16) throw SchemaError("nodes", "need at least 16 quadrature nodes");
  }

  // Default window k0 -/+ 6 dk (clipped to k > 0); 6 sigma truncates less
  // than 1e-8 of the spectral weight.
  static KQuadrature default_for(const GaussianSpectrum& packet, int n = 1024,
                                 Rule rule = Rule::gauss_legendre) {
    const double lo = std::max(packet.k0 - 6.0 * packet.dk, k_floor);
    const double hi = packet.k0 + 6.0 * packet.dk;
    return KQuadrature(lo, hi, n, rule);
  }

  std::vector<detail::QuadNode> nodes() const {
    std::vector<detail::QuadNode> out;
    out.reserve(static_cast<size_t>(n_nodes));
    if (rule == Rule::gauss_legendre) {
      const double mid = 0.5 * (k_hi + k_lo);
      const double halfw = 0.5 * (k_hi - k_lo);
      for (const auto& q : detail::gauss_legendre_reference(n_nodes))
        out.push_back({mid + halfw * q.x, halfw * q.w});
    } else {
      const double h = (k_hi - k_lo) / (n_nodes - 1);
      for (int i = 0; i < n_nodes; ++i) {
        const double k = (i == n_nodes - 1) ? k_hi : k_lo + i * h;
        const double w = (i == 0 || i == n_nodes - 1) ? 0.5 * h : h;
        out.push_back({k, w});
      }
    }
    return out;
  }
};

// Branch-aware spectral nodes for scattering off `step`. k' = sqrt(k^2 - 2 dv)
// has a square-root branch point at kc = sqrt(2 dv); plain panels across it
// converge only algebraically. Substituting k = kc sin(phi) below kc and
// k = kc cosh(s) above makes the integrand analytic on each panel, restoring
// superalgebraic Gauss-Legendre convergence. The trapezoid rule is left as
// the plain cross-check it is.
inline std::vector<detail::QuadNode> spectral_nodes(const KQuadrature& quad,
                                                    const StepPotential& step) {
  const double dv = step.delta();
  if (quad.rule != KQuadrature::Rule::gauss_legendre || !(dv > 0.0)) return quad.nodes();
  const double kc = std::sqrt(2.0 * dv);

  std::vector<detail::QuadNode> out;
  out.reserve(static_cast<size_t>(quad.n_nodes));

  const double lo_evan = std::min(quad.k_lo, kc);
  const double hi_evan = std::min(quad.k_hi, kc);
  const double lo_prop = std::max(quad.k_lo, kc);
  const double hi_prop = std::max(quad.k_hi, kc);
  const double w_evan = std::max(hi_evan - lo_evan, 0.0);
  const double w_prop = std::max(hi_prop - lo_prop, 0.0);

  int n_evan = 0;
  if (w_evan > 0.0 && w_prop > 0.0)
    n_evan = std::clamp(
        static_cast<int>(std::lround(quad.n_nodes * w_evan / (w_evan + w_prop))), 8,
        quad.n_nodes - 8);
  else if (w_evan > 0.0)
    n_evan = quad.n_nodes;
  const int n_prop = quad.n_nodes - n_evan;

  if (n_evan > 0) {
    // k = kc sin(phi): kappa = kc cos(phi), dk = kc cos(phi) dphi.
    const double phi_lo = std::asin(std::min(lo_evan / kc, 1.0));
    const double phi_hi = std::asin(std::min(hi_evan / kc, 1.0));
    const double mid = 0.5 * (phi_hi + phi_lo), halfw = 0.5 * (phi_hi - phi_lo);
    for (const auto& q : detail::gauss_legendre_reference(n_evan)) {
      const double phi = mid + halfw * q.x;
      out.push_back({kc * std::sin(phi), halfw * q.w * kc * std::cos(phi)});
    }
  }
  if (n_prop > 0) {
    // k = kc cosh(s): k' = kc sinh(s), dk = kc sinh(s) ds.
    const double s_lo = std::acosh(std::max(lo_prop / kc, 1.0));
    const double s_hi = std::acosh(std::max(hi_prop / kc, 1.0));
    const double mid = 0.5 * (s_hi + s_lo), halfw = 0.5 * (s_hi - s_lo);
    for (const auto& q : detail::gauss_legendre_reference(n_prop)) {
      const double s = mid + halfw * q.x;
      out.push_back({kc * std::cosh(s), halfw * q.w * kc * std::sinh(s)});
    }
  }
  return out;
}

}  // namespace wavestep
