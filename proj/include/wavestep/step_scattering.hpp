#pragma once

// Exact stationary scattering states for the potential step,
//
//   psi_k(x) = e^{ikx} + r(k) e^{-ikx}   (x < 0)
//              t(k) e^{ik'x}             (x >= 0),
//
// with k' = sqrt(k^2 - 2(v2 - v1)). Above the step (k^2 > 2 dv) k' is real
// and the wave propagates; below it k' = i*kappa and the transmitted wave
// decays as e^{-kappa x}.
//
// Two transmission amplitudes are carried. t_field = 2k/(k + k') is the
// wave-function amplitude (valid on both branches, continuous at x = 0);
// t_flux = 2 sqrt(k k')/(k + k') is the flux-symmetrized amplitude obeying
// |r|^2 + |t_flux|^2 = 1, defined only on the propagating branch.

#include <cmath>
#include <complex>
#include <optional>

#include "wavestep/errors.hpp"
#include "wavestep/model.hpp"

namespace wavestep {

using Complex = std::complex<double>;

enum class Branch { propagating, evanescent };

struct ScatteringAmplitudes {
  Complex r;
  Complex t_field;
  std::optional<Complex> t_flux;  // propagating branch only
  Branch branch = Branch::propagating;
};

// Transmitted wave number, branch chosen so Im(k') >= 0 (bounded solution).
inline Complex transmitted_wavenumber(double k, const StepPotential& step) {
  const double disc = k * k - 2.0 * step.delta();
  if (disc >= 0.0) return Complex(std::sqrt(disc), 0.0);
  return Complex(0.0, std::sqrt(-disc));
}

// Reflection/transmission amplitudes for right-moving incidence, k > 0.
//
// `evanescent_branch = false` is a validation mode reproducing a naive
// real-arithmetic implementation: k' is clamped to 0 below threshold, which
// destroys norm conservation for packets straddling the branch point. The
// norm-conservation test uses it as a negative control.
inline ScatteringAmplitudes amplitudes(double k, const StepPotential& step,
                                       bool evanescent_branch = true) {
  if (!(k > 0.0)) throw NonIncidentWave("amplitudes: requires k > 0 (right-moving incidence)");
  const double dv = step.delta();
  const double disc = k * k - 2.0 * dv;

  ScatteringAmplitudes out;
  if (disc > 0.0 || !evanescent_branch) {
    const double kp = std::sqrt(std::max(disc, 0.0));
    out.branch = Branch::propagating;
    out.r = Complex((k - kp) / (k + kp), 0.0);
    out.t_field = Complex(2.0 * k / (k + kp), 0.0);
    out.t_flux = Complex(2.0 * std::sqrt(k * kp) / (k + kp), 0.0);
  } else {
    const double kappa = std::sqrt(-disc);  // disc <= 0; k' = i kappa
    const Complex kp(0.0, kappa);
    out.branch = Branch::evanescent;
    out.r = (k - kp) / (k + kp);
    out.t_field = 2.0 * k / (k + kp);
    out.t_flux = std::nullopt;
  }
  return out;
}

struct StationaryState {
  double k;
  Complex kprime;
  ScatteringAmplitudes amps;
  StepPotential step;

  Complex eval(double x) const {
    const Complex i(0.0, 1.0);
    if (x < 0.0) return std::exp(i * (k * x)) + amps.r * std::exp(-i * (k * x));
    return amps.t_field * std::exp(i * kprime * x);
  }
};

inline StationaryState stationary_state(double k, const StepPotential& step) {
  return {k, transmitted_wavenumber(k, step), amplitudes(k, step), step};
}

inline Complex eval_state(const StationaryState& state, double x) { return state.eval(x); }

}  // namespace wavestep
