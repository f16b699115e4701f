// wavestep CLI: quantum wave-packet scattering at potential steps, ray
// worldline prediction, and spacetime heatmap rendering.
//
// Exit codes: 0 success, 2 config error, 3 numerical-domain error, 4 I/O
// error. On failure a machine-readable error object is printed to stderr.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wavestep/wavestep.hpp"

namespace fs = std::filesystem;
using namespace wavestep;

namespace {

struct CommonFlags {
  std::string config_path;
  std::string preset_name;
  std::string out_dir = ".";
  bool csv = false, pgm = false, report = false;
  int nodes = 0;
  std::string grid_spec;    // "nx,nt"
  std::string window_spec;  // "xmin,xmax,tmin,tmax"
  int threads = -1;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON run configuration file");
  cmd->add_option("--preset", flags.preset_name, "named preset: fig2, fig3 or fig4")
      ->check(CLI::IsMember({"fig2", "fig3", "fig4"}));
  cmd->add_option("--out-dir", flags.out_dir, "output directory (default: .)");
  cmd->add_flag("--csv", flags.csv, "write the density field as CSV");
  cmd->add_flag("--pgm", flags.pgm, "write the heatmap as binary PGM");
  cmd->add_flag("--report", flags.report, "write the JSON report");
  cmd->add_option("--nodes", flags.nodes, "quadrature node count");
  cmd->add_option("--grid", flags.grid_spec, "grid resolution as nx,nt");
  cmd->add_option("--window", flags.window_spec, "evaluation window as xmin,xmax,tmin,tmax");
  cmd->add_option("--threads", flags.threads, "worker threads (wall time only, never output bytes)");
}

std::vector<double> parse_numbers(const std::string& text, size_t expect, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw SchemaError(flag, "malformed number '" + tok + "'");
    }
  }
  if (out.size() != expect)
    throw SchemaError(flag, "expected " + std::to_string(expect) + " comma-separated values");
  return out;
}

RunConfig build_config(const CommonFlags& flags, std::optional<RunMode> mode) {
  RunConfig cfg = [&] {
    if (!flags.config_path.empty()) {
      std::ifstream in(flags.config_path);
      if (!in) throw IoError(flags.config_path + ": cannot open config file");
      std::stringstream buf;
      buf << in.rdbuf();
      return parse_config(buf.str());
    }
    if (!flags.preset_name.empty()) return preset(flags.preset_name);
    throw SchemaError("config", "provide --config or --preset");
  }();

  if (mode) cfg.mode = *mode;  // the subcommand wins over the file

  if (!flags.grid_spec.empty() || !flags.window_spec.empty()) {
    double x_min = cfg.grid.x_min, x_max = cfg.grid.x_max;
    double t_min = cfg.grid.t_min, t_max = cfg.grid.t_max;
    int nx = cfg.grid.nx, nt = cfg.grid.nt;
    if (!flags.window_spec.empty()) {
      const auto w = parse_numbers(flags.window_spec, 4, "window");
      x_min = w[0];
      x_max = w[1];
      t_min = w[2];
      t_max = w[3];
    }
    if (!flags.grid_spec.empty()) {
      const auto g = parse_numbers(flags.grid_spec, 2, "grid");
      nx = static_cast<int>(g[0]);
      nt = static_cast<int>(g[1]);
    }
    cfg.grid = SpacetimeGrid(x_min, x_max, nx, t_min, t_max, nt);
  }
  if (flags.nodes > 0)
    cfg.quad = KQuadrature(cfg.quad.k_lo, cfg.quad.k_hi, flags.nodes, cfg.quad.rule);
  if (flags.threads >= 0) cfg.threads = flags.threads;

  if (flags.csv || flags.pgm || flags.report) {
    cfg.outputs.clear();
    if (flags.csv) cfg.outputs.push_back(OutputKind::csv);
    if (flags.pgm) cfg.outputs.push_back(OutputKind::heatmap);
    if (flags.report) cfg.outputs.push_back(OutputKind::report);
  }
  return cfg;
}

int dispatch(const CommonFlags& flags, RunMode mode) {
  const RunConfig cfg = build_config(flags, mode);
  const RunOutcome outcome = run(cfg, flags.out_dir);
  std::cout << outcome.report.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"1+1D quantum wave-packet scattering at potential steps"};
  app.require_subcommand(1);

  CommonFlags step_flags, spinor_flags, snell_flags, ray_flags;
  auto* cmd_step = app.add_subcommand("simulate-step", "scalar packet against a potential step");
  add_common_flags(cmd_step, step_flags);
  auto* cmd_spinor = app.add_subcommand("simulate-spinor", "spin-1/2 packet against a Zeeman step");
  add_common_flags(cmd_spinor, spinor_flags);
  auto* cmd_snell = app.add_subcommand("snell", "evaluate the spacetime refraction law");
  add_common_flags(cmd_snell, snell_flags);
  double theta1_deg = 45.0;
  cmd_snell->add_option("--theta1-deg", theta1_deg, "incident worldline angle in degrees");
  auto* cmd_ray = app.add_subcommand("ray", "predict ray worldlines (no simulation)");
  add_common_flags(cmd_ray, ray_flags);

  auto* cmd_render = app.add_subcommand("render", "render a density CSV as a PGM heatmap");
  std::string render_in, render_out = "heatmap.pgm";
  std::string render_norm = "global-max";
  double render_gamma = 0.5;
  CommonFlags render_flags;
  cmd_render->add_option("--in", render_in, "input density CSV")->required();
  cmd_render->add_option("--out", render_out, "output PGM path");
  cmd_render->add_option("--gamma", render_gamma, "display exponent");
  cmd_render->add_option("--normalization", render_norm, "global-max or per-frame-max")
      ->check(CLI::IsMember({"global-max", "per-frame-max"}));
  cmd_render->add_option("--config", render_flags.config_path,
                         "config for the ray overlay (optional)");
  cmd_render->add_option("--preset", render_flags.preset_name,
                         "preset for the ray overlay (optional)")
      ->check(CLI::IsMember({"fig2", "fig3", "fig4"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_step->parsed()) return dispatch(step_flags, RunMode::step);
    if (cmd_spinor->parsed()) return dispatch(spinor_flags, RunMode::spinor);
    if (cmd_snell->parsed()) {
      snell_flags.report = snell_flags.report || (!snell_flags.csv && !snell_flags.pgm);
      RunConfig cfg = build_config(snell_flags, RunMode::snell);
      cfg.theta1 = theta1_deg * std::numbers::pi / 180.0;
      const RunOutcome outcome = run(cfg, snell_flags.out_dir);
      std::cout << outcome.report.dump(2) << '\n';
      return 0;
    }
    if (cmd_ray->parsed()) return dispatch(ray_flags, RunMode::ray);
    if (cmd_render->parsed()) {
      const DensityField density = read_csv(render_in);
      std::optional<WorldlinePrediction> overlay;
      if (!render_flags.config_path.empty() || !render_flags.preset_name.empty()) {
        render_flags.grid_spec.clear();
        render_flags.window_spec.clear();
        overlay = predict_overlay(build_config(render_flags, std::nullopt));
      }
      HeatmapSpec spec{density.grid.nx, density.grid.nt, render_gamma, overlay.has_value(),
                       render_norm == "global-max" ? HeatmapNorm::global_max
                                                   : HeatmapNorm::per_frame_max};
      render_heatmap(density, spec, overlay ? &*overlay : nullptr, render_out);
      std::cout << "{\n  \"rendered\": \"" << render_out << "\"\n}\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << Json{{"error", {{"type", "config"}, {"message", e.what()}}}}.dump() << '\n';
    return 2;
  } catch (const NumericalDomainError& e) {
    std::cerr << Json{{"error", {{"type", "numerical-domain"}, {"message", e.what()}}}}.dump()
              << '\n';
    return 3;
  } catch (const IoError& e) {
    std::cerr << Json{{"error", {{"type", "io"}, {"message", e.what()}}}}.dump() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << Json{{"error", {{"type", "internal"}, {"message", e.what()}}}}.dump() << '\n';
    return 1;
  }
  return 0;
}
