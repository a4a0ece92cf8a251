#pragma once

// Scenario files, presets and batch runs behind the `toa` command.
//
// Config format: one `key = value` per line, `#` starts a comment.
//
//   units.hbar, units.mass
//   packet.x0, packet.p0, packet.dx
//   potential.segment.<n>.x_left / .x_right / .v0     (n = 1, 2, ...)
//   arrival.points = -2, 5, 12
//   time.t_min, time.t_max, time.count
//   kinds = kijowski-free, pi2+, flux, classical
//   derived = pi1-lr
//   label = figure1
//   numerics.momentum_nodes, numerics.transform_cutoff,
//   numerics.space_min, numerics.space_max, numerics.space_nodes,
//   numerics.classical_samples, numerics.seed, numerics.bandwidth,
//   numerics.truncation_tolerance

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "toa/arrivals.hpp"
#include "toa/core.hpp"
#include "toa/dynamics.hpp"
#include "toa/scattering.hpp"

namespace toa {

struct Numerics {
  std::optional<std::size_t> momentum_nodes;
  std::optional<double> transform_cutoff;
  std::optional<double> space_min;
  std::optional<double> space_max;
  std::optional<std::size_t> space_nodes;
  std::optional<std::size_t> classical_samples;
  std::optional<std::uint64_t> seed;
  std::optional<double> bandwidth;
  std::optional<double> truncation_tolerance;

  friend bool operator==(const Numerics&, const Numerics&) = default;
};

struct ScenarioConfig {
  std::string label;
  PhysicalUnits units;
  GaussianSpec packet;
  std::vector<Segment> segments;
  std::vector<double> arrival_points;
  double t_min = 0.0;
  double t_max = 10.0;
  std::size_t t_count = 401;
  std::vector<CrossingKind> kinds;
  bool flux = false;
  bool classical = false;
  /// Only "pi1-lr" (Pi_1^L - Pi_1^R) is known.
  std::vector<std::string> derived;
  Numerics numerics;

  PiecewisePotential potential() const { return PiecewisePotential(segments); }
  TimeGrid times() const { return TimeGrid(t_min, t_max, t_count); }

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Thrown for malformed config text; line() is 1-based, 0 when not tied to a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::size_t line);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Parses, checks every invariant and fills unset numerics.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

std::string format_config(const ScenarioConfig& config);
void write_config(const ScenarioConfig& config, const std::filesystem::path& path);

/// Throws std::invalid_argument naming the violated invariant.
void validate(const ScenarioConfig& config);

/// Fills every unset numerics field from the packet, potential, arrival
/// points and time grid.
void resolve_numerics(ScenarioConfig& config);

/// figure1 ... figure5, defaults resolved. Throws std::invalid_argument for
/// other names.
ScenarioConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// Quantities that justify identifying the initial Gaussian with the
/// incoming asymptote.
struct ValidationReport {
  double negative_fraction = 0.0;
  double nearest_edge = 0.0;
  /// |psi0| and |psi0|^2 of the initial Gaussian at the nearest potential edge.
  double edge_amplitude = 0.0;
  double edge_density = 0.0;
  std::size_t momentum_nodes = 0;
  std::size_t space_nodes = 0;
  std::size_t transform_nodes = 0;
};

ValidationReport validation_report(const ScenarioConfig& config);
std::string format_report(const ValidationReport& report);

/// Grids a run uses, built from resolved numerics.
MomentumGrid scenario_momentum_grid(const ScenarioConfig& config);
SpatialGrid scenario_space_grid(const ScenarioConfig& config);

struct RunResult {
  std::filesystem::path manifest;
  std::vector<std::filesystem::path> csv_files;
};

/// Writes one CSV per (X, kind), flux and derived series, then manifest.json.
RunResult run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir);

/// CSV text with header T,total,left,right and 12 significant digits.
std::string format_series_csv(const DistributionSeries& series);
std::string format_values_csv(const TimeGrid& times, const std::vector<double>& values,
                              const std::string& column);

/// Writes plot.gp (gnuplot) next to the manifest and returns its path.
/// Throws std::runtime_error when a CSV listed in the manifest is missing.
std::filesystem::path emit_plot_script(const std::filesystem::path& manifest);

}  // namespace toa
