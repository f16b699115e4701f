// Spin-1/2 packet at a Zeeman step: the two spin channels refract from
// opposite potential steps and their worldlines split.

#include <cstdio>
#include <numbers>

#include "wavestep/wavestep.hpp"

using namespace wavestep;

int main() {
  const GaussianSpectrum packet(3.5, 0.1, -30.0);
  const ZeemanStep zeeman(2.5);
  const SpinorPacket spinor(packet, std::numbers::sqrt2 / 2.0, std::numbers::sqrt2 / 2.0);
  const SpacetimeGrid grid(-70.0, 100.0, 851, 0.0, 25.0, 200);

  const auto result =
      evolve_spinor(spinor, zeeman, KQuadrature::default_for(packet, 512), grid, {});

  const double v0 = packet.v0();
  const auto up =
      fit_worldline(result.up.density, v0, Region::right, FitDirection::forward, {13.0, 25.0});
  const auto down =
      fit_worldline(result.down.density, v0, Region::right, FitDirection::forward, {13.0, 25.0});
  const auto ratios = width_ratio(packet.k0, zeeman);

  std::printf("spin-up   velocity: %.4f (decoupled dispersion %.4f)\n", v0 / up.slope,
              std::sqrt(3.5 * 3.5 + 2.0 * 2.5));
  std::printf("spin-down velocity: %.4f (decoupled dispersion %.4f)\n", v0 / down.slope,
              std::sqrt(3.5 * 3.5 - 2.0 * 2.5));
  std::printf("width ratios (up, down): predicted %.4f, %.4f\n", ratios.up, ratios.down);
  return 0;
}
