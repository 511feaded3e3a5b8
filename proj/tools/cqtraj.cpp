// cqtraj: complex quantum trajectories, Born densities and extended
// probability fields for analytic 1-D stationary states.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cqt/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Complex quantum trajectories and extended probability densities"};
  app.set_help_all_flag("--help-all");

  std::string task;
  std::string state, t_span, grid, out, config_path;
  std::vector<std::string> seeds;
  std::optional<double> tol, hbar, mass, arc;
  bool masked = false;

  app.add_option("task", task, "trajectory | path | born | field-closed | field-trajectory | compare | poirier | figures");
  app.add_option("--state", state, "state spec, e.g. ho:n=1 or step:k=1,r=0.7071");
  app.add_option("--seed", seeds, "initial point a+bi (repeatable; use --seed=-1+2i for a leading minus)");
  app.add_option("--t-span", t_span, "time span t0:t1 (default: one loop)");
  app.add_option("--arc", arc, "arc length for the path task (default: one loop)");
  app.add_option("--grid", grid, "lattice xr0:xr1:n,xi0:xi1:m");
  app.add_option("--tol", tol, "integrator relative and absolute tolerance");
  app.add_option("--out", out, "output file (directory for figures); default stdout");
  app.add_flag("--masked", masked, "zero Unreached points in field output");
  app.add_option("--config", config_path, "config file (JSON or key = value lines)");
  app.add_option("--hbar", hbar, "reduced Planck constant");
  app.add_option("--mass", mass, "particle mass");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  std::string base = "{}";
  if (!config_path.empty()) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
      std::cerr << "error [ParseError]: cannot read config '" << config_path << "'\n";
      return 1;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    base = ss.str();
  }

  nlohmann::json flags = nlohmann::json::object();
  if (!task.empty()) flags["task"] = task;
  if (!state.empty()) flags["state"] = state;
  if (!seeds.empty()) flags["seeds"] = seeds;
  if (!t_span.empty()) flags["t_span"] = t_span;
  if (arc) flags["arc_length"] = *arc;
  if (!grid.empty()) flags["grid"] = grid;
  if (tol) flags["tol"] = *tol;
  if (!out.empty()) flags["output"] = out;
  if (masked) flags["masked"] = true;
  if (hbar) flags["units"]["hbar"] = *hbar;
  if (mass) flags["units"]["mass"] = *mass;

  cqt::ScenarioConfig config;
  try {
    config = cqt::parse_config(base, flags.dump());
  } catch (const cqt::Error& e) {
    std::cerr << "error [" << cqt::to_string(e.kind()) << "]: " << e.what() << '\n';
    return cqt::is_numerical(e.kind()) ? 2 : 1;
  }
  return cqt::run_scenario(config, std::cerr);
}
