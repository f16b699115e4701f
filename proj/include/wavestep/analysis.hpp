#pragma once

// Quantitative extraction of ray-model observables from simulated density
// fields: least-squares worldline slopes from regional centroid tracks, the
// tangent-law consistency check, and broadening diagnostics.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "wavestep/errors.hpp"
#include "wavestep/model.hpp"
#include "wavestep/ray_optics.hpp"
#include "wavestep/wavepacket.hpp"

namespace wavestep {

struct TimeWindow {
  double t_begin;
  double t_end;
};

enum class FitDirection { forward, backward };

struct WorldlineFit {
  std::string label;
  double slope;      // d(v0 T)/dx = tan(theta)
  double intercept;  // v0 T at x = 0
  double residual;   // rms of the fit, in length units
  TimeWindow window; // time rows actually used
  double angle;      // arctan(slope)
  int rows_used;
};

// Least-squares worldline through the regional centroid track.
//
// Rows are taken from `window`, then filtered: only the trailing stretch
// with stable regional norm (relative change < 1e-3 per row) is kept, so a
// reflected-lobe fit automatically excludes the incident/reflected overlap,
// and only rows whose centroid moves in the requested direction survive.
// Centroids are regressed as v0*T against x; the slope is tan(theta).
inline WorldlineFit fit_worldline(const DensityField& density, double v0, Region region,
                                  FitDirection direction, TimeWindow window) {
  const SpacetimeGrid& grid = density.grid;

  struct Sample {
    double t, norm, centroid;
  };
  std::vector<Sample> rows;
  for (int it = 0; it < grid.nt; ++it) {
    const double t = grid.t(it);
    if (t < window.t_begin || t > window.t_end) continue;
    double m0 = 0.0, m1 = 0.0;
    {
      int lo = 0, hi = grid.nx;
      if (region != Region::all) {
        int split = 0;
        while (split < grid.nx && grid.x(split) < 0.0) ++split;
        if (region == Region::left) hi = split;
        else lo = split;
      }
      for (int ix = lo; ix < hi; ++ix) {
        const double wgt = (ix == lo || ix == hi - 1) ? 0.5 : 1.0;
        m0 += wgt * density.at(it, ix);
        m1 += wgt * density.at(it, ix) * grid.x(ix);
      }
      m0 *= grid.dx();
      m1 *= grid.dx();
    }
    if (m0 <= 0.0) throw EmptyRegion("fit_worldline: empty region in window");
    rows.push_back({t, m0, m1 / m0});
  }

  // Longest suffix with per-row relative norm change below 1e-3.
  size_t begin = 0;
  for (size_t r = 1; r < rows.size(); ++r) {
    const double change = std::abs(rows[r].norm - rows[r - 1].norm) /
                          std::max(rows[r].norm, rows[r - 1].norm);
    if (change >= 1e-3) begin = r;
  }
  // Direction filter: keep the suffix whose centroid motion has the right sign.
  for (size_t r = begin + 1; r < rows.size(); ++r) {
    const double dc = rows[r].centroid - rows[r - 1].centroid;
    if ((direction == FitDirection::forward && dc < 0.0) ||
        (direction == FitDirection::backward && dc > 0.0))
      begin = r;
  }
  rows.erase(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(begin));

  if (rows.size() < 8)
    throw IllConditionedFit("fit_worldline: fewer than 8 usable time rows");
  for (const auto& row : rows)
    if (row.norm < 1e-3)
      throw EmptyRegion("fit_worldline: regional norm below 1e-3 in a used row");

  double cx_min = rows.front().centroid, cx_max = cx_min;
  for (const auto& row : rows) {
    cx_min = std::min(cx_min, row.centroid);
    cx_max = std::max(cx_max, row.centroid);
  }
  if (cx_max - cx_min < 2.0 * grid.dx())
    throw IllConditionedFit("fit_worldline: centroid track spans < 2 grid spacings");

  // OLS of y = v0*T on x = centroid.
  const double n = static_cast<double>(rows.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& row : rows) {
    sx += row.centroid;
    sy += v0 * row.t;
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& row : rows) {
    sxx += (row.centroid - mx) * (row.centroid - mx);
    sxy += (row.centroid - mx) * (v0 * row.t - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss = 0.0;
  for (const auto& row : rows) {
    const double resid = v0 * row.t - (intercept + slope * row.centroid);
    ss += resid * resid;
  }

  return {"",
          slope,
          intercept,
          std::sqrt(ss / n),
          {rows.front().t, rows.back().t},
          std::atan(slope),
          static_cast<int>(rows.size())};
}

// Relative violation of n1 tan(theta1) = n2 tan(theta2) by measured fits
// (the frequency-dependent-index form of the tangent law).
inline double check_spacetime_snell(const WorldlineFit& fit_in, const WorldlineFit& fit_out,
                                    const DispersiveMedium& medium1,
                                    const DispersiveMedium& medium2) {
  const double lhs = medium1.n * fit_in.slope;
  const double rhs = medium2.n * fit_out.slope;
  return std::abs(lhs - rhs) / std::abs(lhs);
}

// ---------------------------------------------------------------------------
// Broadening diagnostics.

enum class Regime { ray_like, dispersive };

inline const char* to_string(Regime regime) {
  return regime == Regime::ray_like ? "ray-like" : "dispersive";
}

struct BroadeningDiagnostics {
  double dx;         // rms width of the initial density, 1/(sqrt(2) dk)
  double t_broad;    // dx^2: when free spreading becomes noticeable
  double t_prop;     // L/k0: transit time over the characteristic distance
  double lambda;     // 2 pi / k0
  double fresnel_f;  // dx^2 / (lambda L)
  Regime regime;     // dispersive iff F < 1
};

inline BroadeningDiagnostics broadening(const GaussianSpectrum& packet, double distance_L) {
  if (!(distance_L > 0.0))
    throw SchemaError("L", "broadening: characteristic distance must be > 0");
  const double dx = packet.rms_width();
  const double lambda = 2.0 * std::numbers::pi / packet.k0;
  const double f = dx * dx / (lambda * distance_L);
  return {dx, dx * dx, distance_L / packet.k0, lambda, f,
          f < 1.0 ? Regime::dispersive : Regime::ray_like};
}

// Transmitted/incident width ratios for the two spin channels,
// sqrt(1 +/- 2 mu B / k^2) -- equal to k'_{up,down}/k, since the scattering
// time at the interface is common to all three partial waves.
struct WidthRatios {
  double up;
  double down;
};

inline WidthRatios width_ratio(double k, const ZeemanStep& zeeman) {
  const double s = 2.0 * zeeman.mu_b / (k * k);
  if (!(s < 1.0))
    throw EvanescentRegime("width_ratio: k^2 <= 2 mu B, down channel does not propagate");
  return {std::sqrt(1.0 + s), std::sqrt(1.0 - s)};
}

}  // namespace wavestep
