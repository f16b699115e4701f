#pragma once

// Core value types shared by every module.
//
// Natural units are used throughout: hbar = m = ell = 1. Energies are in
// hbar^2/(m ell^2), wave numbers in 1/ell, and time is the dimensionless
// T = hbar t/(m ell^2). No other unit system appears anywhere in the API.

#include <cmath>
#include <span>
#include <vector>

#include "wavestep/errors.hpp"

namespace wavestep {

// Piecewise-constant potential: v1 for x < 0, v2 for x > 0.
// v1 == v2 is the free case.
struct StepPotential {
  double v1 = 0.0;
  double v2 = 0.0;

  StepPotential() = default;
  StepPotential(double v1_, double v2_) : v1(v1_), v2(v2_) {
    if (!std::isfinite(v1) || !std::isfinite(v2))
      throw SchemaError("step", "potential levels must be finite");
  }

  // Height of the step seen by a wave incident from region 1.
  double delta() const { return v2 - v1; }
};

// Gaussian k-space amplitude exp(-(k-k0)^2/(2 dk^2)), initial center x0.
// k0/dk >= 3 keeps the discarded k<0 weight below 0.2%, so restricting the
// superposition to right-moving components is harmless.
struct GaussianSpectrum {
  double k0;
  double dk;
  double x0;

  GaussianSpectrum(double k0_, double dk_, double x0_)
      : k0(k0_), dk(dk_), x0(x0_) {
    if (!(dk > 0.0)) throw SchemaError("dk", "spectral width must be > 0");
    if (!(k0 > 0.0)) throw SchemaError("k0", "central wave number must be > 0");
    if (!(k0 / dk >= 3.0))
      throw SchemaError("k0", "k0/dk must be >= 3 (packet must be predominantly right-moving)");
    if (!(x0 < 0.0))
      throw SchemaError("x0", "initial center must be < 0 (incidence from region 1)");
  }

  // Reference speed for spacetime diagrams, sqrt(2E) = k0 in natural units.
  double v0() const { return k0; }
  // Central kinetic energy k0^2/2; also the working frequency hbar*omega.
  double energy() const { return 0.5 * k0 * k0; }
  // rms width of the initial |psi|^2, 1/(sqrt(2) dk).
  double rms_width() const { return 1.0 / (std::sqrt(2.0) * dk); }
};

// Uniform, endpoint-inclusive (x, T) evaluation grid. The interface at x = 0
// must lie strictly inside the spatial window.
struct SpacetimeGrid {
  double x_min, x_max;
  int nx;
  double t_min, t_max;
  int nt;

  SpacetimeGrid(double x_min_, double x_max_, int nx_, double t_min_,
                double t_max_, int nt_)
      : x_min(x_min_), x_max(x_max_), nx(nx_), t_min(t_min_), t_max(t_max_), nt(nt_) {
    if (!(x_min < 0.0 && 0.0 < x_max))
      throw SchemaError("grid", "spatial window must contain the interface: x_min < 0 < x_max");
    if (!(t_min < t_max)) throw SchemaError("grid", "t_min must be < t_max");
    if (nx < 2 || nt < 2) throw SchemaError("grid", "nx and nt must be >= 2");
  }

  double dx() const { return (x_max - x_min) / (nx - 1); }
  double dt() const { return (t_max - t_min) / (nt - 1); }

  // Endpoint-exact: x(0) == x_min and x(nx-1) == x_max bit-for-bit.
  double x(int i) const { return i == nx - 1 ? x_max : x_min + i * dx(); }
  double t(int j) const { return j == nt - 1 ? t_max : t_min + j * dt(); }

  std::vector<double> xs() const {
    std::vector<double> v(static_cast<size_t>(nx));
    for (int i = 0; i < nx; ++i) v[static_cast<size_t>(i)] = x(i);
    return v;
  }
  std::vector<double> ts() const {
    std::vector<double> v(static_cast<size_t>(nt));
    for (int j = 0; j < nt; ++j) v[static_cast<size_t>(j)] = t(j);
    return v;
  }

  size_t size() const { return static_cast<size_t>(nx) * static_cast<size_t>(nt); }

  bool operator==(const SpacetimeGrid&) const = default;
};

// grid_points(grid) -> (x positions, T times), both endpoint-inclusive.
inline std::pair<std::vector<double>, std::vector<double>> grid_points(const SpacetimeGrid& grid) {
  return {grid.xs(), grid.ts()};
}

// |psi|^2 sampled on a SpacetimeGrid. Time-major: row index = time,
// column index = position, so a row is one spatial snapshot.
struct DensityField {
  SpacetimeGrid grid;
  std::vector<double> values;  // nt * nx, row-major

  DensityField(SpacetimeGrid grid_, std::vector<double> values_)
      : grid(grid_), values(std::move(values_)) {
    if (values.size() != grid.size())
      throw SchemaError("density", "value count does not match grid size");
    for (double v : values)
      if (!(v >= 0.0))
        throw SchemaError("density", "all entries must be >= 0 and finite");
  }

  double at(int it, int ix) const {
    return values[static_cast<size_t>(it) * static_cast<size_t>(grid.nx) + static_cast<size_t>(ix)];
  }
  std::span<const double> row(int it) const {
    return {values.data() + static_cast<size_t>(it) * static_cast<size_t>(grid.nx),
            static_cast<size_t>(grid.nx)};
  }
};

namespace detail {

// Trapezoid rule on uniformly spaced samples.
inline double trapezoid(std::span<const double> y, double h) {
  if (y.size() < 2) return 0.0;
  double s = 0.5 * (y.front() + y.back());
  for (size_t i = 1; i + 1 < y.size(); ++i) s += y[i];
  return s * h;
}

}  // namespace detail

}  // namespace wavestep
