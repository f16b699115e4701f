#pragma once

// Ray model: refractive indices, the spatial Snell law, group velocities,
// and the tangent law governing how a worldline's slope changes across a
// boundary between media with different group velocity,
//
//   v_g1 tan(theta_1) = v_g2 tan(theta_2).
//
// Angles live in the (x, v0*t) plane; slope = d(v0 t)/dx = tan(theta).
// The reference speed for quantum-probability waves is v0 = sqrt(2E) = k0,
// so the incident worldline always has slope 1. All angles are radians;
// degrees exist only at the CLI boundary.

#include <cmath>
#include <optional>
#include <vector>

#include "wavestep/errors.hpp"
#include "wavestep/model.hpp"
#include "wavestep/step_scattering.hpp"

namespace wavestep {

// Canonical group/phase-velocity ratios for the n = 1 reference medium.
inline constexpr double alpha_v_light = 1.0;    // light in vacuum
inline constexpr double alpha_v_quantum = 2.0;  // free massive particle, v0 k0/omega = 2E/E

// Point values (n, dn/domega) at the working frequency; the tangent law
// needs nothing more than these two numbers per medium.
struct DispersiveMedium {
  double n = 1.0;
  double dn_domega = 0.0;
};

// sqrt(1 - V0/omega), the stationary-Schrodinger analog of the optical index.
inline double n_quantum(double v0_potential, double omega) {
  const double n2 = 1.0 - v0_potential / omega;
  if (n2 < 0.0)
    throw EvanescentRegime("n_quantum: V0 > hbar*omega, no propagating solution");
  return std::sqrt(n2);
}

inline DispersiveMedium nondispersive_medium(double n) { return {n, 0.0}; }

// Quantum medium at the working frequency: n with its exact frequency
// derivative dn/domega = V0/(2 omega^2 n).
inline DispersiveMedium quantum_medium(double v0_potential, double omega) {
  const double n = n_quantum(v0_potential, omega);
  if (n == 0.0)
    throw EvanescentRegime("quantum_medium: band edge V0 = hbar*omega, dn/domega diverges");
  return {n, v0_potential / (2.0 * omega * omega * n)};
}

// n1 sin(theta1) = n2 sin(theta2).
inline double snell_spatial(double n1, double n2, double theta1) {
  const double s = n1 * std::sin(theta1) / n2;
  if (s > 1.0)
    throw TotalInternalReflection("snell_spatial: n1 sin(theta1)/n2 > 1");
  return std::asin(s);
}

// v_g = (v0/n) / (1 + alpha_v (omega/n) dn/domega).
inline double group_velocity(const DispersiveMedium& medium, double omega,
                             double alpha_v, double v0) {
  const double denom = 1.0 + alpha_v * (omega / medium.n) * medium.dn_domega;
  if (std::abs(denom) < 1e-12)
    throw DegenerateDispersion("group_velocity: stationary packet, worldline vertical");
  return v0 / medium.n / denom;
}

// Tangent law in refractive-index form:
//   n2 (1 + a w/n2 dn2) tan(theta1) = n1 (1 + a w/n1 dn1) tan(theta2),
// evaluated via the group velocities so v_g1 tan(theta1) = v_g2 tan(theta2)
// holds by construction. theta1 = 0 maps to exactly 0.
inline double snell_spacetime(const DispersiveMedium& medium1, const DispersiveMedium& medium2,
                              double omega, double alpha_v, double theta1) {
  if (theta1 == 0.0) return 0.0;
  // v0 cancels between the two media; evaluate with v0 = 1.
  const double vg1 = group_velocity(medium1, omega, alpha_v, 1.0);
  const double vg2 = group_velocity(medium2, omega, alpha_v, 1.0);
  return std::atan(vg1 / vg2 * std::tan(theta1));
}

// ---------------------------------------------------------------------------
// Predicted ray worldlines for a packet hitting the step.

struct SpacetimeEvent {
  double x;
  double v0t;
};

enum class RayLabel { incident, reflected, transmitted, transmitted_up, transmitted_down };

inline const char* to_string(RayLabel label) {
  switch (label) {
    case RayLabel::incident: return "incident";
    case RayLabel::reflected: return "reflected";
    case RayLabel::transmitted: return "transmitted";
    case RayLabel::transmitted_up: return "transmitted-up";
    case RayLabel::transmitted_down: return "transmitted-down";
  }
  return "?";
}

struct RaySegment {
  SpacetimeEvent start;
  std::optional<SpacetimeEvent> end;  // open segments extend to the grid edge
  double slope;                       // tan(theta) = d(v0 t)/dx
  double dx_sign;                     // propagation direction along x
};

struct RayWorldline {
  RayLabel label;
  std::vector<RaySegment> segments;
  double weight;  // flux share carried by this ray (|r|^2, |t_flux|^2, ...)
};

struct WorldlinePrediction {
  std::vector<RayWorldline> rays;
  SpacetimeEvent arrival;  // shared event (x=0, v0 t*) with t* = |x0|/k0
  double v0;
  bool total_reflection = false;
};

// Three rays meeting at the arrival event: incident at slope +1 (by the v0
// convention), reflected at -1, transmitted at v0/k' when k' is real.
// k0^2 <= 2(v2 - v1) yields total reflection: incident + reflected only,
// flagged, with the reflected ray carrying the full weight.
inline WorldlinePrediction predict_worldlines(const GaussianSpectrum& packet,
                                              const StepPotential& step) {
  if (!(packet.x0 < 0.0))
    throw SchemaError("x0", "predict_worldlines requires incidence from region 1 (x0 < 0)");

  const double v0 = packet.v0();
  const double tstar = -packet.x0 / packet.k0;
  const SpacetimeEvent launch{packet.x0, 0.0};
  const SpacetimeEvent arrival{0.0, v0 * tstar};

  WorldlinePrediction out;
  out.arrival = arrival;
  out.v0 = v0;

  const double disc = packet.k0 * packet.k0 - 2.0 * step.delta();
  out.total_reflection = !(disc > 0.0);  // k' = 0 counts: vertical worldline excluded

  double reflected_weight = 1.0;
  double transmitted_weight = 0.0;
  if (!out.total_reflection) {
    const auto amps = amplitudes(packet.k0, step);
    reflected_weight = std::norm(amps.r);
    transmitted_weight = 1.0 - reflected_weight;
  }

  out.rays.push_back({RayLabel::incident, {{launch, arrival, 1.0, +1.0}}, 1.0});
  out.rays.push_back({RayLabel::reflected, {{arrival, std::nullopt, -1.0, -1.0}}, reflected_weight});
  if (!out.total_reflection) {
    const double kprime = std::sqrt(disc);
    out.rays.push_back(
        {RayLabel::transmitted, {{arrival, std::nullopt, v0 / kprime, +1.0}}, transmitted_weight});
  }
  return out;
}

}  // namespace wavestep
