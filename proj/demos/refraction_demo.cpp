// Minimal worked example: scatter the fig2 packet off the step on a coarse
// grid, fit the outgoing worldlines and compare with the ray model.

#include <cstdio>

#include "wavestep/wavestep.hpp"

using namespace wavestep;

int main() {
  const GaussianSpectrum packet(2.35, 0.1, -30.0);
  const StepPotential step(0.0, 2.5);
  const SpacetimeGrid grid(-60.0, 60.0, 601, 0.0, 25.0, 200);

  const auto result =
      evolve_step(packet, step, KQuadrature::default_for(packet, 512), grid, {});
  const auto pred = predict_worldlines(packet, step);

  const double v0 = packet.v0();
  const auto trans =
      fit_worldline(result.density, v0, Region::right, FitDirection::forward, {19.0, 25.0});
  const auto refl =
      fit_worldline(result.density, v0, Region::left, FitDirection::backward, {19.0, 25.0});

  std::printf("arrival event:        T* = %.4f\n", pred.arrival.v0t / v0);
  std::printf("transmitted slope:    %.4f (ray model %.4f)\n", trans.slope,
              pred.rays[2].segments[0].slope);
  std::printf("reflected slope:      %.4f (ray model %.4f)\n", refl.slope,
              pred.rays[1].segments[0].slope);
  std::printf("reflected norm:       %.4f\n",
              row_observables(result.density, grid.nt - 1, Region::left).norm);
  return 0;
}
