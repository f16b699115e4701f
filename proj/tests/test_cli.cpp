// End-to-end exit-code contract of the CLI binary. The binary path comes in
// via WAVESTEP_CLI_PATH from the build system.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string("'") + WAVESTEP_CLI_PATH + "' " + args + " >/dev/null 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path write_temp(const char* name, const std::string& text) {
  const fs::path path = fs::temp_directory_path() / name;
  std::ofstream out(path);
  out << text;
  return path;
}

}  // namespace

TEST_CASE("cli: successful snell run exits 0") {
  CHECK(run_cli("snell --preset fig2") == 0);
}

TEST_CASE("cli: config errors exit 2") {
  const auto bad_key = write_temp("wavestep_bad_key.json", R"({"preset": "fig2", "dq": 1})");
  CHECK(run_cli("simulate-step --config '" + bad_key.string() + "'") == 2);
  const auto no_mode = write_temp("wavestep_no_mode.json", R"({"k0": 2.35})");
  CHECK(run_cli("ray --config '" + no_mode.string() + "'") == 2);
}

TEST_CASE("cli: numerical-domain errors exit 3") {
  // Snell mode with the step above the working energy: evanescent medium.
  const auto evan = write_temp("wavestep_evan.json",
                               R"({"mode": "snell", "k0": 2, "dk": 0.5, "x0": -10, "v2": 10})");
  CHECK(run_cli("snell --config '" + evan.string() + "'") == 3);
}

TEST_CASE("cli: I/O errors exit 4") {
  CHECK(run_cli("render --in /nonexistent/nowhere.csv --out /tmp/x.pgm") == 4);
}

TEST_CASE("cli: ray mode writes a report with the run record") {
  const fs::path dir = fs::temp_directory_path() / "wavestep_cli_ray";
  fs::remove_all(dir);
  CHECK(run_cli("ray --preset fig2 --out-dir '" + dir.string() + "' --report") == 0);
  CHECK(fs::exists(dir / "report.json"));
}
