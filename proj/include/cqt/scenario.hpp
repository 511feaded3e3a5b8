#pragma once

// Scenario configuration, orchestration and file export for the cqtraj CLI.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cqt/born.hpp"
#include "cqt/dynamics.hpp"
#include "cqt/extended.hpp"

namespace cqt {

enum class Task { Trajectory, Path, Born, FieldClosed, FieldTrajectory, Compare, Poirier, Figures };

std::string_view to_string(Task task);
std::optional<Task> parse_task(std::string_view name);

struct ScenarioConfig {
  std::string state;
  UnitSystem units;
  Task task = Task::Trajectory;
  std::vector<Complex> seeds;
  std::optional<std::pair<double, double>> t_span;
  std::optional<double> arc_length;
  std::optional<Lattice> grid;
  IntegratorSettings integrator;
  /// File (or directory for `figures`); empty means stdout.
  std::string output;
  bool masked = false;
};

/// Parses a config document: a JSON object, or `key = value` pairs separated
/// by commas or newlines where each value is a JSON literal and dotted keys
/// nest (`integrator.rel_tol = 1e-12`). Throws Error(ParseError) with a
/// line:column location, or Error(ValidationError) listing every bad field.
ScenarioConfig parse_config(std::string_view text);

/// Same, with a second document of the same syntax merged on top (objects
/// merge key by key, everything else is replaced); used for CLI overrides.
ScenarioConfig parse_config(std::string_view text, std::string_view overrides);

/// Checks task-specific requirements; throws ValidationError listing all
/// problems. parse_config already calls this.
void validate(const ScenarioConfig& config);

/// `xr0:xr1:n,xi0:xi1:m`.
Lattice parse_grid(std::string_view text);
/// `t0:t1`.
std::pair<double, double> parse_t_span(std::string_view text);

/// Canonical JSON of the config (stable key order) and its FNV-1a hash.
std::string canonical_json(const ScenarioConfig& config);
std::string config_hash(const ScenarioConfig& config);

/// Default figure lattice for a state: [-3,3]² for the oscillator, one box
/// width by [-1,1] for the well, one period 2π/k by [-1/k, 1/k] otherwise.
Lattice default_lattice(const StateSpec& spec, int count = 201);

struct ComparisonRecord {
  Complex seed;
  std::string verdict;
  double path_constant = 0;
  double x_r0 = 0;
  double p0 = 0;
  double max_relative_deviation = 0;
  std::size_t samples = 0;
  /// HO n=1 only: max |x_integrated(t) - x_analytic(t)| along the loop.
  std::optional<double> analytic_position_deviation;
};

struct ComparisonReport {
  std::string state;
  IntegratorSettings settings;
  std::vector<ComparisonRecord> records;
  double global_max_deviation = 0;
};

/// Trajectory-integral ρ against the closed form along each seed's loop.
ComparisonReport compare_methods(const StateSpec& spec, const std::vector<Complex>& seeds,
                                 const IntegratorSettings& settings);

std::string report_json(const ComparisonReport& report);

// CSV writers. Every file starts with `#` comment lines, then the header row.
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory, const std::string& comments);
void write_path_csv(std::ostream& os, const PathCurve& path, const std::string& comments);
void write_born_csv(std::ostream& os, const RealLineGrid& from_velocity, const RealLineGrid& direct,
                    const std::string& comments);
void write_field_csv(std::ostream& os, const ProbabilityField& field, bool masked, const std::string& comments);
void write_poirier_csv(std::ostream& os, const StateSpec& spec, const Lattice& lattice, const std::string& comments);

/// Comment block naming the task, state, config hash and integrator settings.
std::string header_comments(const ScenarioConfig& config);

/// Writes the four reference figure grids (raw and masked) into `config.output` (a
/// directory, default `figures`). Returns the files written.
std::vector<std::string> emit_figure_data(const ScenarioConfig& config);

/// Runs one scenario. Returns the process exit status: 0 success,
/// 1 validation, 2 numerical failure; diagnostics go to `log`.
int run_scenario(const ScenarioConfig& config, std::ostream& log);

}  // namespace cqt
