#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>

#include "../tests/support/oracles.hpp"
#include "wavestep/wavepacket.hpp"

using namespace wavestep;
using Catch::Approx;

namespace {

// Small but honest defaults for unit-scale runs; acceptance covers the
// full desk-scale grids.
const GaussianSpectrum kFig2Packet(2.35, 0.1, -30.0);
const StepPotential kFig2Step(0.0, 2.5);

double max_row_norm_deviation(const EvolveResult& r) {
  double worst = 0.0;
  for (int it = 0; it < r.density.grid.nt; ++it) {
    const double norm = row_observables(r.density, it, Region::all).norm;
    worst = std::max(worst, std::abs(norm - 1.0));
  }
  return worst;
}

}  // namespace

TEST_CASE("spectral amplitude: Gaussian envelope with the plane-wave phase") {
  CHECK(std::abs(spectral_amplitude(kFig2Packet, 2.35)) == Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(spectral_amplitude(kFig2Packet, 2.45)) ==
        Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK(std::abs(spectral_amplitude(kFig2Packet, 2.25)) ==
        Approx(std::exp(-0.5)).epsilon(1e-12));
  // Phase carries the launch position: exp(-i k x0) = exp(+70.5 i) at the
  // spectral center, so the packet sits at x0 = -30 when T = 0.
  const Complex peak = spectral_amplitude(kFig2Packet, 2.35);
  CHECK(std::arg(peak) == Approx(std::remainder(70.5, 2.0 * std::numbers::pi)).epsilon(1e-10));
}

TEST_CASE("free packet matches the closed-form spreading Gaussian") {
  const SpacetimeGrid grid(-70.0, 70.0, 701, 0.0, 8.0, 17);
  const auto quad = KQuadrature::default_for(kFig2Packet, 512);
  const auto result = evolve_step(kFig2Packet, StepPotential(0.0, 0.0), quad, grid, {2, true});

  CHECK_FALSE(result.norm_leakage);
  CHECK(result.captured_fraction == Approx(1.0).margin(1e-4));

  double max_err = 0.0;
  for (int it = 0; it < grid.nt; ++it)
    for (int ix = 0; ix < grid.nx; ++ix) {
      const double ref = oracles::free_gaussian_density(grid.x(ix), grid.t(it), 2.35, 0.1, -30.0);
      max_err = std::max(max_err, std::abs(result.density.at(it, ix) - ref));
    }
  CHECK(max_err < 1e-6);

  // Centroid rides at x0 + k0 T; width starts at 1/(sqrt(2) dk).
  for (int it = 0; it < grid.nt; ++it) {
    const auto obs = row_observables(result.density, it, Region::all);
    const double expect = -30.0 + 2.35 * grid.t(it);
    CHECK(obs.centroid == Approx(expect).epsilon(1e-6));
  }
  CHECK(row_observables(result.density, 0, Region::all).rms_width ==
        Approx(7.0710678).epsilon(0.01));
  CHECK(max_row_norm_deviation(result) < 5e-3);
}

TEST_CASE("observables: symmetric density has zero centroid; empty region throws") {
  const SpacetimeGrid grid(-10.0, 10.0, 201, 0.0, 1.0, 2);
  std::vector<double> row(201);
  for (int ix = 0; ix < 201; ++ix) {
    const double x = grid.x(ix);
    row[static_cast<size_t>(ix)] = std::exp(-x * x);
  }
  const auto obs = row_observables(std::span<const double>(row), grid, Region::all);
  CHECK(obs.centroid == Approx(0.0).margin(1e-12));

  std::vector<double> empty(201, 0.0);
  CHECK_THROWS_AS(row_observables(std::span<const double>(empty), grid, Region::all), EmptyRegion);
}

TEST_CASE("packet centered below the barrier is totally reflected") {
  const GaussianSpectrum packet(1.5, 0.1, -30.0);  // whole spectrum below kc = sqrt(5)
  const SpacetimeGrid grid(-70.0, 10.0, 401, 0.0, 40.0, 21);
  const auto quad = KQuadrature::default_for(packet, 384);
  const auto result = evolve_step(packet, kFig2Step, quad, grid, {2, true});

  const int last = grid.nt - 1;
  double right_norm = 0.0;
  try {
    right_norm = row_observables(result.density, last, Region::right).norm;
  } catch (const EmptyRegion&) {
    right_norm = 0.0;  // even emptier than the threshold
  }
  CHECK(right_norm < 1e-3);
  // Everything still accounted for on the left.
  CHECK(row_observables(result.density, last, Region::left).norm == Approx(1.0).margin(5e-3));
}

TEST_CASE("spinor evolution is the weighted sum of two scalar runs, bit for bit") {
  const SpacetimeGrid grid(-60.0, 30.0, 301, 0.0, 12.0, 7);
  const GaussianSpectrum packet(3.5, 0.1, -30.0);
  const ZeemanStep zeeman(2.5);
  const auto quad = KQuadrature::default_for(packet, 256);

  const double wu = std::sqrt(0.3), wd = std::sqrt(0.7);
  const SpinorPacket spinor(packet, wu, wd);
  const auto combined = evolve_spinor(spinor, zeeman, quad, grid, {2, true});
  const auto up = evolve_step(packet, zeeman.up_step(), quad, grid, {2, true});
  const auto down = evolve_step(packet, zeeman.down_step(), quad, grid, {2, true});

  for (size_t idx = 0; idx < combined.total.values.size(); ++idx) {
    const double expect = wu * wu * up.density.values[idx] + wd * wd * down.density.values[idx];
    REQUIRE(combined.total.values[idx] == expect);  // identical arithmetic, no drift allowed
  }
}

TEST_CASE("pure spin-up input reproduces the up channel exactly") {
  const SpacetimeGrid grid(-60.0, 30.0, 301, 0.0, 12.0, 5);
  const GaussianSpectrum packet(3.5, 0.1, -30.0);
  const auto quad = KQuadrature::default_for(packet, 256);
  const SpinorPacket spinor(packet, 1.0, 0.0);
  const auto combined = evolve_spinor(spinor, ZeemanStep(2.5), quad, grid, {2, true});
  for (size_t idx = 0; idx < combined.total.values.size(); ++idx)
    REQUIRE(combined.total.values[idx] == combined.up.density.values[idx]);
}

TEST_CASE("zero field: both spin channels see free evolution and agree") {
  const SpacetimeGrid grid(-60.0, 30.0, 301, 0.0, 12.0, 5);
  const GaussianSpectrum packet(3.5, 0.1, -30.0);
  const auto quad = KQuadrature::default_for(packet, 256);
  const SpinorPacket spinor(packet, std::numbers::sqrt2 / 2.0, std::numbers::sqrt2 / 2.0);
  const auto combined = evolve_spinor(spinor, ZeemanStep(0.0), quad, grid, {2, true});
  for (size_t idx = 0; idx < combined.total.values.size(); ++idx)
    REQUIRE(combined.up.density.values[idx] == combined.down.density.values[idx]);
}

TEST_CASE("spinor weights must form a unit spinor") {
  const GaussianSpectrum packet(3.5, 0.1, -30.0);
  CHECK_THROWS_AS(SpinorPacket(packet, 1.0, 1.0), SchemaError);
  CHECK_NOTHROW(SpinorPacket(packet, std::numbers::sqrt2 / 2.0, std::numbers::sqrt2 / 2.0));
}

TEST_CASE("a window that clips the packet raises the norm-leakage flag") {
  const SpacetimeGrid grid(-32.0, 2.0, 171, 0.0, 1.0, 3);
  const auto quad = KQuadrature::default_for(kFig2Packet, 256);
  const auto result = evolve_step(kFig2Packet, StepPotential(0.0, 0.0), quad, grid, {1, true});
  CHECK(result.norm_leakage);
  CHECK(result.captured_fraction < 0.999);
}

TEST_CASE("norm is conserved row by row only with the evanescent branch") {
  // fig-2 parameters put ~5% of the spectral weight below the branch point;
  // the clamped-k' control demonstrates why that branch cannot be dropped.
  const SpacetimeGrid grid(-60.0, 60.0, 1201, 0.0, 25.0, 26);
  const auto quad = KQuadrature::default_for(kFig2Packet, 512);

  const auto exact = evolve_step(kFig2Packet, kFig2Step, quad, grid, {2, true});
  CHECK(max_row_norm_deviation(exact) < 5e-3);

  const auto clamped = evolve_step(kFig2Packet, kFig2Step, quad, grid, {2, false});
  CHECK(max_row_norm_deviation(clamped) > 5e-3);
}

TEST_CASE("late-time norm splits cleanly into reflected plus transmitted") {
  const SpacetimeGrid grid(-60.0, 60.0, 1201, 24.0, 25.0, 3);  // lobes long separated
  const auto quad = KQuadrature::default_for(kFig2Packet, 512);
  const auto result = evolve_step(kFig2Packet, kFig2Step, quad, grid, {2, true});
  const auto left = row_observables(result.density, 2, Region::left);
  const auto right = row_observables(result.density, 2, Region::right);
  const auto all = row_observables(result.density, 2, Region::all);
  // The two regional trapezoids drop the half-cell straddling x = 0.
  CHECK(left.norm + right.norm == Approx(all.norm).margin(2e-3));
  CHECK(left.norm / all.norm == Approx(0.342).margin(0.02));  // spectrum-averaged |r|^2
}

TEST_CASE("doubling the node count does not change the converged field") {
  // The branch-aware panels keep Gauss-Legendre superalgebraic even though
  // k'(k) has a square-root branch point inside the spectral window.
  const SpacetimeGrid grid(-60.0, 60.0, 601, 11.0, 14.0, 4);
  const auto gl = KQuadrature::default_for(kFig2Packet, 512);
  const auto gl2 = KQuadrature::default_for(kFig2Packet, 1024);

  const auto a = evolve_step(kFig2Packet, kFig2Step, gl, grid, {2, true});
  const auto b = evolve_step(kFig2Packet, kFig2Step, gl2, grid, {2, true});

  double diff_nodes = 0.0;
  for (size_t idx = 0; idx < a.density.values.size(); ++idx)
    diff_nodes = std::max(diff_nodes, std::abs(a.density.values[idx] - b.density.values[idx]));
  CHECK(diff_nodes < 1e-8);
}

TEST_CASE("Gauss-Legendre and trapezoid rules agree on the free evolution") {
  const SpacetimeGrid grid(-60.0, 10.0, 351, 0.0, 6.0, 4);
  const StepPotential free_medium(0.0, 0.0);
  const auto gl = KQuadrature::default_for(kFig2Packet, 384);
  const KQuadrature tr(gl.k_lo, gl.k_hi, 8193, KQuadrature::Rule::trapezoid);

  const auto a = evolve_step(kFig2Packet, free_medium, gl, grid, {2, true});
  const auto b = evolve_step(kFig2Packet, free_medium, tr, grid, {2, true});

  double diff_rule = 0.0;
  for (size_t idx = 0; idx < a.density.values.size(); ++idx)
    diff_rule = std::max(diff_rule, std::abs(a.density.values[idx] - b.density.values[idx]));
  CHECK(diff_rule < 1e-7);
}

TEST_CASE("worker count never changes a single output bit") {
  const SpacetimeGrid grid(-60.0, 60.0, 401, 0.0, 20.0, 9);
  const auto quad = KQuadrature::default_for(kFig2Packet, 256);
  const auto serial = evolve_step(kFig2Packet, kFig2Step, quad, grid, {1, true});
  const auto threaded = evolve_step(kFig2Packet, kFig2Step, quad, grid, {3, true});
  for (size_t idx = 0; idx < serial.field.values.size(); ++idx)
    REQUIRE(serial.field.values[idx] == threaded.field.values[idx]);
}
