#pragma once

// Run configuration, presets, density serialization, heatmap rendering and
// the end-to-end run driver.
//
// File formats:
//   CSV     line 1: "# x_min,x_max,nx,t_min,t_max,nt"; then nt rows of nx
//           comma-separated values (shortest round-trip formatting), time
//           increasing row by row. Lossless for all finite values.
//   PGM     binary P5, maxval 255, one pixel per grid point. Time increases
//           upward (the last file row is t_min). Ray overlays are drawn at
//           intensity 255 with integer line rasterization.
//   report  JSON document with fits, predictions, diagnostics and the full
//           input parameter record.
//
// All outputs are byte-deterministic for a given config; the thread count
// affects wall time only.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavestep/analysis.hpp"
#include "wavestep/errors.hpp"
#include "wavestep/model.hpp"
#include "wavestep/quadrature.hpp"
#include "wavestep/ray_optics.hpp"
#include "wavestep/wavepacket.hpp"

namespace wavestep {

using Json = nlohmann::json;

enum class RunMode { step, spinor, snell, ray };
enum class OutputKind { heatmap, csv, report };
enum class HeatmapNorm { per_frame_max, global_max };

inline const char* to_string(RunMode mode) {
  switch (mode) {
    case RunMode::step: return "step";
    case RunMode::spinor: return "spinor";
    case RunMode::snell: return "snell";
    case RunMode::ray: return "ray";
  }
  return "?";
}

struct HeatmapSpec {
  int width_px;   // must equal grid.nx (no resampling)
  int height_px;  // must equal grid.nt
  double gamma = 0.5;
  bool overlay_rays = true;
  HeatmapNorm normalization = HeatmapNorm::global_max;
};

struct RunConfig {
  RunMode mode = RunMode::step;
  std::string label = "custom";

  GaussianSpectrum packet{2.35, 0.1, -30.0};
  StepPotential step{0.0, 2.5};
  ZeemanStep zeeman{2.5};
  double weight_up = std::numbers::sqrt2 / 2.0;
  double weight_down = std::numbers::sqrt2 / 2.0;

  SpacetimeGrid grid{-60.0, 60.0, 1201, 0.0, 25.0, 600};
  KQuadrature quad = KQuadrature::default_for(packet);

  std::vector<OutputKind> outputs{OutputKind::csv, OutputKind::heatmap, OutputKind::report};
  double theta1 = std::numbers::pi / 4.0;  // snell mode
  double alpha_v = alpha_v_quantum;

  double gamma = 0.5;
  HeatmapNorm normalization = HeatmapNorm::global_max;
  bool overlay_rays = true;
  int threads = 0;
};

// Named figure presets. fig2: moderate step scattering with visible
// interference fringes; fig3: same but spectrally broad (dispersive regime);
// fig4: spin-1/2 birefringence at a Zeeman step.
inline RunConfig preset(const std::string& name) {
  RunConfig cfg;
  cfg.label = name;
  if (name == "fig2" || name == "fig3") {
    cfg.mode = RunMode::step;
    cfg.packet = GaussianSpectrum(2.35, name == "fig3" ? 0.5 : 0.1, -30.0);
    cfg.step = StepPotential(0.0, 2.5);
    cfg.grid = SpacetimeGrid(-60.0, 60.0, 1201, 0.0, 25.0, 600);
  } else if (name == "fig4") {
    cfg.mode = RunMode::spinor;
    cfg.packet = GaussianSpectrum(3.5, 0.1, -30.0);
    cfg.zeeman = ZeemanStep(2.5);
    cfg.weight_up = cfg.weight_down = std::numbers::sqrt2 / 2.0;
    // Wider window than fig2: the fast spin-up lobe reaches x ~ 68 by T = 25
    // and clipping it would visibly leak norm.
    cfg.grid = SpacetimeGrid(-70.0, 100.0, 1701, 0.0, 25.0, 600);
  } else {
    throw UnknownPreset("unknown preset '" + name + "' (expected fig2, fig3 or fig4)");
  }
  cfg.quad = KQuadrature::default_for(cfg.packet);
  return cfg;
}

namespace detail {

// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double_token(const std::string& tok, const std::filesystem::path& path) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw IoError(path.string() + ": malformed numeric token '" + tok + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Config parsing. The schema is a flat JSON object; unknown keys are errors.

namespace detail {

inline const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys = {
      "preset", "mode", "k0", "dk", "x0", "v1", "v2", "mu_b",
      "weight_up", "weight_down", "x_min", "x_max", "nx", "t_min", "t_max", "nt",
      "k_lo", "k_hi", "nodes", "rule", "theta1_deg", "alpha_v", "outputs",
      "gamma", "normalization", "overlay_rays", "threads"};
  return keys;
}

inline double require_number(const Json& j, const std::string& key) {
  if (!j.at(key).is_number()) throw SchemaError(key, "expected a number");
  return j.at(key).get<double>();
}

inline int require_int(const Json& j, const std::string& key) {
  if (!j.at(key).is_number_integer()) throw SchemaError(key, "expected an integer");
  return j.at(key).get<int>();
}

inline std::string require_string(const Json& j, const std::string& key) {
  if (!j.at(key).is_string()) throw SchemaError(key, "expected a string");
  return j.at(key).get<std::string>();
}

inline bool require_bool(const Json& j, const std::string& key) {
  if (!j.at(key).is_boolean()) throw SchemaError(key, "expected a boolean");
  return j.at(key).get<bool>();
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError("config", std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("config", "top level must be a JSON object");

  for (const auto& item : j.items())
    if (!detail::known_config_keys().count(item.key()))
      throw SchemaError(item.key(), "unknown key (schema is strict)");

  const bool has_preset = j.contains("preset");
  RunConfig cfg = has_preset ? preset(detail::require_string(j, "preset")) : RunConfig{};

  if (j.contains("mode")) {
    const std::string m = detail::require_string(j, "mode");
    if (m == "step") cfg.mode = RunMode::step;
    else if (m == "spinor") cfg.mode = RunMode::spinor;
    else if (m == "snell") cfg.mode = RunMode::snell;
    else if (m == "ray") cfg.mode = RunMode::ray;
    else throw SchemaError("mode", "expected step, spinor, snell or ray");
    if (!has_preset) cfg.label = m;
  } else if (!has_preset) {
    throw SchemaError("mode", "missing required field");
  }

  // Without a preset the physics of the packet must be spelled out.
  if (!has_preset) {
    for (const char* key : {"k0", "dk", "x0"})
      if (!j.contains(key)) throw SchemaError(key, "missing required field");
    if (cfg.mode == RunMode::spinor && !j.contains("mu_b"))
      throw SchemaError("mu_b", "missing required field");
    if ((cfg.mode == RunMode::step || cfg.mode == RunMode::ray || cfg.mode == RunMode::snell) &&
        !j.contains("v2"))
      throw SchemaError("v2", "missing required field");
  }

  const double k0 = j.contains("k0") ? detail::require_number(j, "k0") : cfg.packet.k0;
  const double dk = j.contains("dk") ? detail::require_number(j, "dk") : cfg.packet.dk;
  const double x0 = j.contains("x0") ? detail::require_number(j, "x0") : cfg.packet.x0;
  cfg.packet = GaussianSpectrum(k0, dk, x0);

  const double v1 = j.contains("v1") ? detail::require_number(j, "v1") : cfg.step.v1;
  const double v2 = j.contains("v2") ? detail::require_number(j, "v2") : cfg.step.v2;
  cfg.step = StepPotential(v1, v2);
  if (j.contains("mu_b")) cfg.zeeman = ZeemanStep(detail::require_number(j, "mu_b"));
  if (j.contains("weight_up")) cfg.weight_up = detail::require_number(j, "weight_up");
  if (j.contains("weight_down")) cfg.weight_down = detail::require_number(j, "weight_down");

  cfg.grid = SpacetimeGrid(
      j.contains("x_min") ? detail::require_number(j, "x_min") : cfg.grid.x_min,
      j.contains("x_max") ? detail::require_number(j, "x_max") : cfg.grid.x_max,
      j.contains("nx") ? detail::require_int(j, "nx") : cfg.grid.nx,
      j.contains("t_min") ? detail::require_number(j, "t_min") : cfg.grid.t_min,
      j.contains("t_max") ? detail::require_number(j, "t_max") : cfg.grid.t_max,
      j.contains("nt") ? detail::require_int(j, "nt") : cfg.grid.nt);

  KQuadrature::Rule rule = cfg.quad.rule;
  if (j.contains("rule")) {
    const std::string r = detail::require_string(j, "rule");
    if (r == "gauss-legendre") rule = KQuadrature::Rule::gauss_legendre;
    else if (r == "trapezoid") rule = KQuadrature::Rule::trapezoid;
    else throw SchemaError("rule", "expected gauss-legendre or trapezoid");
  }
  const int nodes = j.contains("nodes") ? detail::require_int(j, "nodes") : cfg.quad.n_nodes;
  if (j.contains("k_lo") || j.contains("k_hi")) {
    const double lo = j.contains("k_lo") ? detail::require_number(j, "k_lo") : cfg.quad.k_lo;
    const double hi = j.contains("k_hi") ? detail::require_number(j, "k_hi") : cfg.quad.k_hi;
    cfg.quad = KQuadrature(lo, hi, nodes, rule);
  } else if (j.contains("k0") || j.contains("dk") || !has_preset) {
    cfg.quad = KQuadrature::default_for(cfg.packet, nodes, rule);
  } else {
    cfg.quad = KQuadrature(cfg.quad.k_lo, cfg.quad.k_hi, nodes, rule);
  }

  if (j.contains("theta1_deg"))
    cfg.theta1 = detail::require_number(j, "theta1_deg") * std::numbers::pi / 180.0;
  if (j.contains("alpha_v")) cfg.alpha_v = detail::require_number(j, "alpha_v");

  if (j.contains("outputs")) {
    if (!j.at("outputs").is_array()) throw SchemaError("outputs", "expected an array of strings");
    cfg.outputs.clear();
    for (const auto& o : j.at("outputs")) {
      if (!o.is_string()) throw SchemaError("outputs", "expected an array of strings");
      const std::string s = o.get<std::string>();
      if (s == "heatmap") cfg.outputs.push_back(OutputKind::heatmap);
      else if (s == "csv") cfg.outputs.push_back(OutputKind::csv);
      else if (s == "report") cfg.outputs.push_back(OutputKind::report);
      else throw SchemaError("outputs", "unknown output kind '" + s + "'");
    }
  }

  if (j.contains("gamma")) {
    cfg.gamma = detail::require_number(j, "gamma");
    if (!(cfg.gamma > 0.0)) throw SchemaError("gamma", "display exponent must be > 0");
  }
  if (j.contains("normalization")) {
    const std::string n = detail::require_string(j, "normalization");
    if (n == "global-max") cfg.normalization = HeatmapNorm::global_max;
    else if (n == "per-frame-max") cfg.normalization = HeatmapNorm::per_frame_max;
    else throw SchemaError("normalization", "expected global-max or per-frame-max");
  }
  if (j.contains("overlay_rays")) cfg.overlay_rays = detail::require_bool(j, "overlay_rays");
  if (j.contains("threads")) {
    cfg.threads = detail::require_int(j, "threads");
    if (cfg.threads < 0) throw SchemaError("threads", "must be >= 0");
  }

  // Spinor weights must form a unit spinor; validate eagerly.
  if (cfg.mode == RunMode::spinor)
    SpinorPacket(cfg.packet, cfg.weight_up, cfg.weight_down);

  return cfg;
}

// ---------------------------------------------------------------------------
// CSV density serialization.

inline void write_csv(const DensityField& density, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  const SpacetimeGrid& g = density.grid;
  out << "# " << detail::format_double(g.x_min) << ',' << detail::format_double(g.x_max) << ','
      << g.nx << ',' << detail::format_double(g.t_min) << ',' << detail::format_double(g.t_max)
      << ',' << g.nt << '\n';
  std::string line;
  for (int it = 0; it < g.nt; ++it) {
    line.clear();
    for (int ix = 0; ix < g.nx; ++ix) {
      if (ix) line += ',';
      line += detail::format_double(density.at(it, ix));
    }
    line += '\n';
    out << line;
  }
  if (!out) throw IoError(path.string() + ": write failed");
}

inline DensityField read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  std::string header;
  if (!std::getline(in, header) || header.size() < 2 || header[0] != '#')
    throw IoError(path.string() + ": missing grid header line");
  const auto meta = detail::split_csv_line(header.substr(2));
  if (meta.size() != 6) throw IoError(path.string() + ": header must carry 6 grid fields");
  const SpacetimeGrid grid(detail::parse_double_token(meta[0], path),
                           detail::parse_double_token(meta[1], path),
                           static_cast<int>(detail::parse_double_token(meta[2], path)),
                           detail::parse_double_token(meta[3], path),
                           detail::parse_double_token(meta[4], path),
                           static_cast<int>(detail::parse_double_token(meta[5], path)));
  std::vector<double> values;
  values.reserve(grid.size());
  std::string line;
  for (int it = 0; it < grid.nt; ++it) {
    if (!std::getline(in, line)) throw IoError(path.string() + ": truncated file");
    const auto tokens = detail::split_csv_line(line);
    if (static_cast<int>(tokens.size()) != grid.nx)
      throw IoError(path.string() + ": row " + std::to_string(it) + " has wrong column count");
    for (const auto& tok : tokens) values.push_back(detail::parse_double_token(tok, path));
  }
  return DensityField(grid, std::move(values));
}

// ---------------------------------------------------------------------------
// Heatmap rendering (binary PGM, P5).

namespace detail {

// Liang-Barsky clip of a segment to [0,xmax] x [0,ymax]. Returns false when
// the segment lies fully outside.
inline bool clip_segment(double& x0, double& y0, double& x1, double& y1, double xmax, double ymax) {
  double t0 = 0.0, t1 = 1.0;
  const double dx = x1 - x0, dy = y1 - y0;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {x0, xmax - x0, y0, ymax - y0};
  for (int e = 0; e < 4; ++e) {
    if (p[e] == 0.0) {
      if (q[e] < 0.0) return false;
      continue;
    }
    const double r = q[e] / p[e];
    if (p[e] < 0.0) {
      if (r > t1) return false;
      t0 = std::max(t0, r);
    } else {
      if (r < t0) return false;
      t1 = std::min(t1, r);
    }
  }
  const double ox = x0, oy = y0;
  x0 = ox + t0 * dx;
  y0 = oy + t0 * dy;
  x1 = ox + t1 * dx;
  y1 = oy + t1 * dy;
  return true;
}

inline void draw_line(std::vector<unsigned char>& img, int nx, int nt, int x0, int y0, int x1, int y1) {
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  int x = x0, y = y0;
  for (;;) {
    if (x >= 0 && x < nx && y >= 0 && y < nt)
      img[static_cast<size_t>(nt - 1 - y) * static_cast<size_t>(nx) + static_cast<size_t>(x)] = 255;
    if (x == x1 && y == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
}

}  // namespace detail

inline void render_heatmap(const DensityField& density, const HeatmapSpec& spec,
                           const WorldlinePrediction* rays, const std::filesystem::path& path) {
  const SpacetimeGrid& g = density.grid;
  if (spec.width_px != g.nx || spec.height_px != g.nt)
    throw SchemaError("heatmap", "pixel dimensions must match the grid (one pixel per point)");
  if (!(spec.gamma > 0.0)) throw SchemaError("gamma", "display exponent must be > 0");

  std::vector<unsigned char> img(g.size(), 0);

  double global_ref = 0.0;
  if (spec.normalization == HeatmapNorm::global_max) {
    for (double v : density.values) global_ref = std::max(global_ref, v);
    if (global_ref == 0.0) throw DegenerateField("render_heatmap: all-zero density");
  }

  for (int it = 0; it < g.nt; ++it) {
    double ref = global_ref;
    if (spec.normalization == HeatmapNorm::per_frame_max) {
      ref = 0.0;
      for (int ix = 0; ix < g.nx; ++ix) ref = std::max(ref, density.at(it, ix));
      if (ref == 0.0) throw DegenerateField("render_heatmap: all-zero time row");
    }
    unsigned char* out = img.data() + static_cast<size_t>(g.nt - 1 - it) * static_cast<size_t>(g.nx);
    for (int ix = 0; ix < g.nx; ++ix) {
      const double scaled = std::pow(density.at(it, ix) / ref, spec.gamma);
      out[ix] = static_cast<unsigned char>(std::lround(255.0 * std::min(scaled, 1.0)));
    }
  }

  if (spec.overlay_rays && rays != nullptr) {
    const double dx = g.dx(), dt = g.dt();
    for (const auto& ray : rays->rays) {
      for (const auto& seg : ray.segments) {
        SpacetimeEvent b;
        if (seg.end) {
          b = *seg.end;
        } else {
          // Extend the open segment to the spatial edge it travels toward;
          // clipping trims whatever leaves through the time boundary.
          const double x_far = seg.dx_sign > 0.0 ? g.x_max : g.x_min;
          b = {x_far, seg.start.v0t + seg.slope * (x_far - seg.start.x)};
        }
        double c0 = (seg.start.x - g.x_min) / dx;
        double r0 = (seg.start.v0t / rays->v0 - g.t_min) / dt;
        double c1 = (b.x - g.x_min) / dx;
        double r1 = (b.v0t / rays->v0 - g.t_min) / dt;
        if (!detail::clip_segment(c0, r0, c1, r1, g.nx - 1.0, g.nt - 1.0)) continue;
        detail::draw_line(img, g.nx, g.nt, static_cast<int>(std::lround(c0)),
                          static_cast<int>(std::lround(r0)), static_cast<int>(std::lround(c1)),
                          static_cast<int>(std::lround(r1)));
      }
    }
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << "P5\n" << g.nx << ' ' << g.nt << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
  if (!out) throw IoError(path.string() + ": write failed");
}

}  // namespace wavestep
