#pragma once

// Time-dependent wave functions built by spectral superposition of exact
// stationary states,
//
//   psi(x,T) = sum_j w_j A(k_j) psi_{k_j}(x) e^{-i k_j^2 T / 2},
//
// evaluated on a spacetime grid. No time stepping: every grid point is
// independent, which makes the evaluation embarrassingly parallel and free
// of time-discretization error. Workers split the grid by time rows and
// each point sums the quadrature nodes in the same fixed index order, so
// the result is bit-identical for any worker count.

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <thread>
#include <vector>

#include "wavestep/errors.hpp"
#include "wavestep/model.hpp"
#include "wavestep/quadrature.hpp"
#include "wavestep/step_scattering.hpp"

namespace wavestep {

// Spin-1/2 packet: one spatial Gaussian carrying two spin amplitudes.
struct SpinorPacket {
  GaussianSpectrum packet;
  Complex weight_up;
  Complex weight_down;

  SpinorPacket(GaussianSpectrum packet_, Complex up, Complex down)
      : packet(packet_), weight_up(up), weight_down(down) {
    const double total = std::norm(weight_up) + std::norm(weight_down);
    if (std::abs(total - 1.0) > 1e-12)
      throw SchemaError("weights", "|weight_up|^2 + |weight_down|^2 must equal 1");
  }
};

// Zeeman energy mu*B in region x > 0 (zero in region 1). The field
// direction is absorbed into the spin labels, so mu_b >= 0.
struct ZeemanStep {
  double mu_b = 0.0;

  ZeemanStep() = default;
  explicit ZeemanStep(double mu_b_) : mu_b(mu_b_) {
    if (!(mu_b >= 0.0)) throw SchemaError("mu_b", "Zeeman energy must be >= 0");
  }

  StepPotential up_step() const { return StepPotential(0.0, -mu_b); }
  StepPotential down_step() const { return StepPotential(0.0, +mu_b); }
};

// Unnormalized spectral amplitude e^{-i k x0} e^{-(k-k0)^2/(2 dk^2)}.
// The plane-wave phase centers the packet at x0 at T = 0; normalization is
// applied once per simulation so the initial spatial norm is 1.
inline Complex spectral_amplitude(const GaussianSpectrum& packet, double k) {
  const double g = std::exp(-(k - packet.k0) * (k - packet.k0) / (2.0 * packet.dk * packet.dk));
  return std::polar(g, -k * packet.x0);
}

struct WaveField {
  SpacetimeGrid grid;
  std::vector<Complex> values;  // nt * nx, row-major (time-major)

  Complex at(int it, int ix) const {
    return values[static_cast<size_t>(it) * static_cast<size_t>(grid.nx) + static_cast<size_t>(ix)];
  }
  std::span<const Complex> row(int it) const {
    return {values.data() + static_cast<size_t>(it) * static_cast<size_t>(grid.nx),
            static_cast<size_t>(grid.nx)};
  }
};

struct EvolveOptions {
  int threads = 0;                // 0 = hardware concurrency; never changes results
  bool evanescent_branch = true;  // false = clamped-k' negative control
};

struct EvolveResult {
  DensityField density;
  WaveField field;
  double captured_fraction;  // initial-row norm / full-line packet norm
  bool norm_leakage;         // captured_fraction < 0.999: window clips the packet
  double norm_scale;         // factor applied to the raw superposition
};

namespace detail {

template <typename Fn>
void parallel_rows(int nt, int threads, Fn&& fn) {
  int n = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  n = std::min(n, nt);
  if (n == 1) {
    for (int it = 0; it < nt; ++it) fn(it);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(n));
  for (int w = 0; w < n; ++w) {
    const int lo = static_cast<int>(static_cast<long long>(nt) * w / n);
    const int hi = static_cast<int>(static_cast<long long>(nt) * (w + 1) / n);
    pool.emplace_back([lo, hi, &fn] {
      for (int it = lo; it < hi; ++it) fn(it);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

// Scatter a Gaussian packet off a potential step. The density is the primary
// artifact; the complex field is retained for observables and tests.
// Emits a norm-leakage flag (not an error) when the grid window captures
// less than 99.9% of the packet at t_min.
inline EvolveResult evolve_step(const GaussianSpectrum& packet, const StepPotential& step,
                                const KQuadrature& quad, const SpacetimeGrid& grid,
                                const EvolveOptions& opts = {}) {
  const auto nodes = spectral_nodes(quad, step);
  const size_t nk = nodes.size();

  // Per-node state, independent of the grid point.
  std::vector<double> k(nk), w(nk), ksq_half(nk);
  std::vector<Complex> amp(nk), refl(nk), trans(nk), kprime(nk);
  double spectral_norm = 0.0;  // sum w |A|^2 -> full-line norm / (2 pi)
  for (size_t j = 0; j < nk; ++j) {
    k[j] = nodes[j].x;
    w[j] = nodes[j].w;
    ksq_half[j] = 0.5 * k[j] * k[j];
    amp[j] = spectral_amplitude(packet, k[j]);
    const auto a = amplitudes(k[j], step, opts.evanescent_branch);
    refl[j] = a.r;
    trans[j] = a.t_field;
    kprime[j] = opts.evanescent_branch ? transmitted_wavenumber(k[j], step)
                                       : Complex(std::sqrt(std::max(k[j] * k[j] - 2.0 * step.delta(), 0.0)), 0.0);
    spectral_norm += w[j] * std::norm(amp[j]);
  }

  const int nx = grid.nx, nt = grid.nt;
  const double dx = grid.dx();
  int split = 0;  // first index with x >= 0
  while (split < nx && grid.x(split) < 0.0) ++split;

  // Per-node phase steps across one spatial cell, reused row by row.
  const Complex i_unit(0.0, 1.0);
  std::vector<Complex> step1(nk), start1(nk), step2(nk), start2(nk);
  for (size_t j = 0; j < nk; ++j) {
    step1[j] = std::polar(1.0, k[j] * dx);
    start1[j] = std::polar(1.0, k[j] * grid.x_min);
    step2[j] = std::exp(i_unit * kprime[j] * dx);
    start2[j] = split < nx ? std::exp(i_unit * kprime[j] * grid.x(split)) : Complex(0.0);
  }

  std::vector<Complex> field(grid.size(), Complex(0.0));
  detail::parallel_rows(nt, opts.threads, [&](int it) {
    const double T = grid.t(it);
    Complex* row = field.data() + static_cast<size_t>(it) * static_cast<size_t>(nx);
    for (size_t j = 0; j < nk; ++j) {
      // w_j A(k_j) e^{-i k_j^2 T / 2}
      const Complex node_phase = w[j] * amp[j] * std::polar(1.0, -ksq_half[j] * T);
      // Region 1: e^{ikx} + r e^{-ikx}, advanced by one cell per step.
      Complex plane = start1[j];
      const Complex r = refl[j];
      for (int ix = 0; ix < split; ++ix) {
        row[ix] += node_phase * (plane + r * std::conj(plane));
        plane *= step1[j];
      }
      // Region 2: t e^{ik'x}; for evanescent k' the step factor decays.
      Complex tw = trans[j] * start2[j];
      for (int ix = split; ix < nx; ++ix) {
        row[ix] += node_phase * tw;
        tw *= step2[j];
      }
    }
  });

  // Normalize so the t_min row integrates to exactly 1 inside the window.
  std::vector<double> row0(static_cast<size_t>(nx));
  for (int ix = 0; ix < nx; ++ix) row0[static_cast<size_t>(ix)] = std::norm(field[static_cast<size_t>(ix)]);
  const double raw_norm = detail::trapezoid(row0, dx);
  if (!(raw_norm > 0.0)) throw DegenerateField("evolve_step: initial row has zero norm");
  const double full_line_norm = 2.0 * std::numbers::pi * spectral_norm;
  const double captured = raw_norm / full_line_norm;
  const double scale = 1.0 / std::sqrt(raw_norm);

  for (auto& z : field) z *= scale;
  std::vector<double> density(grid.size());
  for (size_t idx = 0; idx < field.size(); ++idx) density[idx] = std::norm(field[idx]);

  return {DensityField(grid, std::move(density)),
          WaveField{grid, std::move(field)},
          captured,
          captured < 0.999,
          scale};
}

struct SpinorResult {
  DensityField total;  // |w_up|^2 |psi_up|^2 + |w_down|^2 |psi_down|^2
  EvolveResult up;     // unit-norm up channel
  EvolveResult down;   // unit-norm down channel
};

// The Zeeman matrix is diagonal, so the spinor problem decouples into two
// independent scalar runs: up against a step of -mu_b, down against +mu_b.
// The channels are never coupled.
inline SpinorResult evolve_spinor(const SpinorPacket& spinor, const ZeemanStep& zeeman,
                                  const KQuadrature& quad, const SpacetimeGrid& grid,
                                  const EvolveOptions& opts = {}) {
  EvolveResult up = evolve_step(spinor.packet, zeeman.up_step(), quad, grid, opts);
  EvolveResult down = evolve_step(spinor.packet, zeeman.down_step(), quad, grid, opts);

  const double wu = std::norm(spinor.weight_up);
  const double wd = std::norm(spinor.weight_down);
  std::vector<double> total(grid.size());
  for (size_t idx = 0; idx < total.size(); ++idx)
    total[idx] = wu * up.density.values[idx] + wd * down.density.values[idx];

  return {DensityField(grid, std::move(total)), std::move(up), std::move(down)};
}

// ---------------------------------------------------------------------------
// Per-row observables.

enum class Region { all, left, right };  // left: x < 0, right: x >= 0

struct RowObservables {
  double norm;
  double centroid;
  double rms_width;
};

// Trapezoid moments of a density row over the selected region.
inline RowObservables row_observables(std::span<const double> density_row,
                                      const SpacetimeGrid& grid, Region region) {
  const int nx = grid.nx;
  int lo = 0, hi = nx;  // [lo, hi)
  if (region != Region::all) {
    int split = 0;
    while (split < nx && grid.x(split) < 0.0) ++split;
    if (region == Region::left) hi = split;
    else lo = split;
  }
  const double h = grid.dx();
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  for (int ix = lo; ix < hi; ++ix) {
    const double x = grid.x(ix);
    const double rho = density_row[static_cast<size_t>(ix)];
    const double wgt = (ix == lo || ix == hi - 1) ? 0.5 : 1.0;
    m0 += wgt * rho;
    m1 += wgt * rho * x;
    m2 += wgt * rho * x * x;
  }
  m0 *= h;
  m1 *= h;
  m2 *= h;
  if (m0 < 1e-9)
    throw EmptyRegion("row_observables: regional norm below 1e-9, centroid undefined");
  const double centroid = m1 / m0;
  const double var = std::max(m2 / m0 - centroid * centroid, 0.0);
  return {m0, centroid, std::sqrt(var)};
}

inline RowObservables row_observables(const DensityField& density, int t_index, Region region) {
  return row_observables(density.row(t_index), density.grid, region);
}

inline RowObservables row_observables(std::span<const Complex> field_row,
                                      const SpacetimeGrid& grid, Region region) {
  std::vector<double> rho(field_row.size());
  for (size_t idx = 0; idx < rho.size(); ++idx) rho[idx] = std::norm(field_row[idx]);
  return row_observables(std::span<const double>(rho), grid, region);
}

}  // namespace wavestep
