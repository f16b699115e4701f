#include <catch2/catch_amalgamated.hpp>

#include "wavestep/model.hpp"

using namespace wavestep;
using Catch::Approx;

TEST_CASE("grid_points: uniform spacing with inclusive endpoints") {
  const SpacetimeGrid g(-1.0, 1.0, 3, 0.0, 10.0, 2);
  const auto [xs, ts] = grid_points(g);
  REQUIRE(xs.size() == 3);
  CHECK(xs[0] == -1.0);
  CHECK(xs[1] == Approx(0.0).margin(1e-15));
  CHECK(xs[2] == 1.0);
  REQUIRE(ts.size() == 2);
  CHECK(ts[0] == 0.0);
  CHECK(ts[1] == 10.0);
}

TEST_CASE("grid_points: fig-2 style axis has spacing 0.1") {
  const SpacetimeGrid g(-60.0, 60.0, 1201, 0.0, 25.0, 600);
  CHECK(g.dx() == Approx(0.1).epsilon(1e-14));
  // Declared bounds are reproduced bit-exactly at the ends.
  CHECK(g.x(0) == -60.0);
  CHECK(g.x(1200) == 60.0);
  CHECK(g.t(0) == 0.0);
  CHECK(g.t(599) == 25.0);
}

TEST_CASE("grid spacing is uniform to rounding over the whole axis") {
  const SpacetimeGrid g(-37.5, 12.25, 641, 0.0, 17.0, 123);
  const auto xs = g.xs();
  const double h = g.dx();
  for (size_t i = 0; i + 1 < xs.size(); ++i)
    CHECK(xs[i + 1] - xs[i] == Approx(h).epsilon(1e-12));
}

TEST_CASE("grid construction rejects out-of-contract parameters") {
  CHECK_THROWS_AS(SpacetimeGrid(1.0, 2.0, 10, 0.0, 1.0, 10), SchemaError);   // interface outside
  CHECK_THROWS_AS(SpacetimeGrid(-1.0, 1.0, 1, 0.0, 1.0, 10), SchemaError);   // nx too small
  CHECK_THROWS_AS(SpacetimeGrid(-1.0, 1.0, 10, 1.0, 1.0, 10), SchemaError);  // empty time span
}

TEST_CASE("GaussianSpectrum enforces spectral and incidence invariants") {
  CHECK_NOTHROW(GaussianSpectrum(2.35, 0.1, -30.0));
  CHECK_THROWS_AS(GaussianSpectrum(2.35, -0.1, -30.0), SchemaError);
  CHECK_THROWS_AS(GaussianSpectrum(-2.35, 0.1, -30.0), SchemaError);
  CHECK_THROWS_AS(GaussianSpectrum(0.2, 0.1, -30.0), SchemaError);  // k0/dk = 2 < 3
  CHECK_THROWS_AS(GaussianSpectrum(2.35, 0.1, 5.0), SchemaError);   // x0 must be < 0

  const GaussianSpectrum p(2.35, 0.1, -30.0);
  CHECK(p.v0() == 2.35);
  CHECK(p.energy() == Approx(2.76125).epsilon(1e-14));
  CHECK(p.rms_width() == Approx(7.0710678).epsilon(1e-7));
}

TEST_CASE("DensityField rejects negative entries and size mismatches") {
  const SpacetimeGrid g(-1.0, 1.0, 3, 0.0, 1.0, 2);
  std::vector<double> ok(6, 0.5);
  CHECK_NOTHROW(DensityField(g, ok));

  std::vector<double> neg = ok;
  neg[4] = -1e-14;
  CHECK_THROWS_AS(DensityField(g, neg), SchemaError);

  CHECK_THROWS_AS(DensityField(g, std::vector<double>(5, 0.0)), SchemaError);
}

TEST_CASE("StepPotential allows equal levels and rejects non-finite ones") {
  CHECK_NOTHROW(StepPotential(1.0, 1.0));
  CHECK(StepPotential(0.0, 2.5).delta() == 2.5);
  CHECK(StepPotential(1.5, 0.5).delta() == -1.0);
  CHECK_THROWS_AS(StepPotential(0.0, std::nan("")), SchemaError);
}
