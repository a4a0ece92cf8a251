#include "toa/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "toa/classical.hpp"

namespace toa {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr double kDefaultCutoff = 30.0;
constexpr std::size_t kDefaultSamples = 100000;
constexpr std::uint64_t kDefaultSeed = 1;
constexpr double kDefaultBandwidth = 0.05;
constexpr double kLooseTruncation = 1e-5;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

double to_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw ConfigError("expected a finite number, got '" + s + "'", line);
  return v;
}

std::uint64_t to_unsigned(const std::string& s, std::size_t line) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError("expected a non-negative integer, got '" + s + "'", line);
  return v;
}

// Shortest text that parses back to the same double.
std::string number(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string file_tag(CrossingKind kind) {
  switch (kind) {
    case CrossingKind::KijowskiFree: return "kijowski";
    case CrossingKind::Proposal1: return "pi1";
    case CrossingKind::Proposal2Plus: return "pi2p";
    case CrossingKind::Proposal2Minus: return "pi2m";
    case CrossingKind::Proposal3Plus: return "pi3p";
    case CrossingKind::Proposal3Minus: return "pi3m";
  }
  return "unknown";
}

bool has_kind(const ScenarioConfig& c, CrossingKind k) {
  return std::find(c.kinds.begin(), c.kinds.end(), k) != c.kinds.end();
}

double max_abs_time(const ScenarioConfig& c) { return std::max(std::abs(c.t_min), std::abs(c.t_max)); }

PhaseBudget budget_of(const ScenarioConfig& c) {
  PhaseBudget b;
  b.t_reach = max_abs_time(c);
  b.x_reach = std::max(std::abs(*c.numerics.space_min), std::abs(*c.numerics.space_max));
  return b;
}

std::vector<double> edges_of(const ScenarioConfig& c) { return c.potential().edges(); }

double space_wavenumber(const ScenarioConfig& c) {
  const auto win = packet_window(c.packet, c.units);
  const double p_max = std::max(std::abs(win.lo), std::abs(win.hi));
  return (*c.numerics.transform_cutoff + p_max) / c.units.hbar;
}

MomentumGrid automatic_momentum_grid(const ScenarioConfig& c) {
  return packet_momentum_grid(c.packet, c.potential(), budget_of(c), c.units);
}

SpatialGrid automatic_space_grid(const ScenarioConfig& c) {
  const auto edges = edges_of(c);
  return build_spatial_grid(*c.numerics.space_min, *c.numerics.space_max, edges, space_wavenumber(c));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string context(double X, const std::string& kind, const TimeGrid& times) {
  std::ostringstream s;
  s << "X = " << X << ", kind = " << kind << ", T in [" << times.t_min() << ", " << times.t_max() << "]";
  return s.str();
}

}  // namespace

ConfigError::ConfigError(const std::string& what, std::size_t line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig c;
  c.kinds.clear();
  std::map<std::size_t, Segment> segments;
  std::map<std::size_t, std::set<std::string>> segment_fields;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const auto body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
    const auto key = trim(body.substr(0, eq));
    const auto value = trim(body.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", line);
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", line);

    if (key == "label") {
      c.label = value;
    } else if (key == "units.hbar") {
      c.units.hbar = to_double(value, line);
    } else if (key == "units.mass") {
      c.units.mass = to_double(value, line);
    } else if (key == "packet.x0") {
      c.packet.x0 = to_double(value, line);
    } else if (key == "packet.p0") {
      c.packet.p0 = to_double(value, line);
    } else if (key == "packet.dx") {
      c.packet.dx = to_double(value, line);
    } else if (key.rfind("potential.segment.", 0) == 0) {
      const auto rest = key.substr(std::string("potential.segment.").size());
      const auto dot = rest.find('.');
      if (dot == std::string::npos) throw ConfigError("expected potential.segment.<n>.<field>", line);
      const auto index = to_unsigned(rest.substr(0, dot), line);
      if (index == 0) throw ConfigError("segment numbers start at 1", line);
      const auto field = rest.substr(dot + 1);
      auto& seg = segments[index];
      if (field == "x_left")
        seg.x_left = to_double(value, line);
      else if (field == "x_right")
        seg.x_right = to_double(value, line);
      else if (field == "v0")
        seg.height = to_double(value, line);
      else
        throw ConfigError("unknown segment field '" + field + "'", line);
      segment_fields[index].insert(field);
    } else if (key == "arrival.points") {
      for (const auto& item : split_list(value)) c.arrival_points.push_back(to_double(item, line));
    } else if (key == "time.t_min") {
      c.t_min = to_double(value, line);
    } else if (key == "time.t_max") {
      c.t_max = to_double(value, line);
    } else if (key == "time.count") {
      c.t_count = to_unsigned(value, line);
    } else if (key == "kinds") {
      for (const auto& item : split_list(value)) {
        if (item == "flux") {
          c.flux = true;
        } else if (item == "classical") {
          c.classical = true;
        } else {
          try {
            c.kinds.push_back(parse_kind(item));
          } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what(), line);
          }
        }
      }
    } else if (key == "derived") {
      c.derived = split_list(value);
    } else if (key == "numerics.momentum_nodes") {
      c.numerics.momentum_nodes = to_unsigned(value, line);
    } else if (key == "numerics.transform_cutoff") {
      c.numerics.transform_cutoff = to_double(value, line);
    } else if (key == "numerics.space_min") {
      c.numerics.space_min = to_double(value, line);
    } else if (key == "numerics.space_max") {
      c.numerics.space_max = to_double(value, line);
    } else if (key == "numerics.space_nodes") {
      c.numerics.space_nodes = to_unsigned(value, line);
    } else if (key == "numerics.classical_samples") {
      c.numerics.classical_samples = to_unsigned(value, line);
    } else if (key == "numerics.seed") {
      c.numerics.seed = to_unsigned(value, line);
    } else if (key == "numerics.bandwidth") {
      c.numerics.bandwidth = to_double(value, line);
    } else if (key == "numerics.truncation_tolerance") {
      c.numerics.truncation_tolerance = to_double(value, line);
    } else {
      throw ConfigError("unknown key '" + key + "'", line);
    }
  }
  std::size_t expected = 1;
  for (const auto& [index, seg] : segments) {
    if (index != expected) throw ConfigError("potential segments must be numbered 1, 2, ... without gaps", 0);
    if (segment_fields[index].size() != 3)
      throw ConfigError("potential.segment." + std::to_string(index) + " needs x_left, x_right and v0", 0);
    c.segments.push_back(seg);
    ++expected;
  }
  try {
    validate(c);
    resolve_numerics(c);
    validate(c);
    (void)scenario_momentum_grid(c);
    (void)scenario_space_grid(c);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), 0);
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what(), 0);
  }
  return c;
}

ScenarioConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string(), 0);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string format_config(const ScenarioConfig& c) {
  std::ostringstream s;
  if (!c.label.empty()) s << "label = " << c.label << "\n";
  s << "units.hbar = " << number(c.units.hbar) << "\n";
  s << "units.mass = " << number(c.units.mass) << "\n";
  s << "packet.x0 = " << number(c.packet.x0) << "\n";
  s << "packet.p0 = " << number(c.packet.p0) << "\n";
  s << "packet.dx = " << number(c.packet.dx) << "\n";
  for (std::size_t i = 0; i < c.segments.size(); ++i) {
    const auto prefix = "potential.segment." + std::to_string(i + 1) + ".";
    s << prefix << "x_left = " << number(c.segments[i].x_left) << "\n";
    s << prefix << "x_right = " << number(c.segments[i].x_right) << "\n";
    s << prefix << "v0 = " << number(c.segments[i].height) << "\n";
  }
  s << "arrival.points =";
  for (std::size_t i = 0; i < c.arrival_points.size(); ++i)
    s << (i ? ", " : " ") << number(c.arrival_points[i]);
  s << "\n";
  s << "time.t_min = " << number(c.t_min) << "\n";
  s << "time.t_max = " << number(c.t_max) << "\n";
  s << "time.count = " << c.t_count << "\n";
  std::vector<std::string> kinds;
  for (auto k : c.kinds) kinds.emplace_back(to_string(k));
  if (c.flux) kinds.emplace_back("flux");
  if (c.classical) kinds.emplace_back("classical");
  s << "kinds =";
  for (std::size_t i = 0; i < kinds.size(); ++i) s << (i ? ", " : " ") << kinds[i];
  s << "\n";
  if (!c.derived.empty()) {
    s << "derived =";
    for (std::size_t i = 0; i < c.derived.size(); ++i) s << (i ? ", " : " ") << c.derived[i];
    s << "\n";
  }
  const auto& n = c.numerics;
  if (n.momentum_nodes) s << "numerics.momentum_nodes = " << *n.momentum_nodes << "\n";
  if (n.transform_cutoff) s << "numerics.transform_cutoff = " << number(*n.transform_cutoff) << "\n";
  if (n.space_min) s << "numerics.space_min = " << number(*n.space_min) << "\n";
  if (n.space_max) s << "numerics.space_max = " << number(*n.space_max) << "\n";
  if (n.space_nodes) s << "numerics.space_nodes = " << *n.space_nodes << "\n";
  if (n.classical_samples) s << "numerics.classical_samples = " << *n.classical_samples << "\n";
  if (n.seed) s << "numerics.seed = " << *n.seed << "\n";
  if (n.bandwidth) s << "numerics.bandwidth = " << number(*n.bandwidth) << "\n";
  if (n.truncation_tolerance)
    s << "numerics.truncation_tolerance = " << number(*n.truncation_tolerance) << "\n";
  return s.str();
}

void write_config(const ScenarioConfig& config, const fs::path& path) { write_text(path, format_config(config)); }

void validate(const ScenarioConfig& c) {
  c.units.validate();
  c.packet.validate();
  (void)c.potential();
  if (c.arrival_points.empty()) throw std::invalid_argument("arrival.points must list at least one X");
  for (double X : c.arrival_points)
    if (!std::isfinite(X)) throw std::invalid_argument("arrival.points must be finite");
  if (!(c.t_max > c.t_min)) throw std::invalid_argument("time.t_max must exceed time.t_min");
  if (c.t_count < 2) throw std::invalid_argument("time.count must be at least 2");
  std::set<CrossingKind> unique(c.kinds.begin(), c.kinds.end());
  if (unique.size() != c.kinds.size()) throw std::invalid_argument("kinds lists a distribution twice");
  for (const auto& d : c.derived) {
    if (d != "pi1-lr") throw std::invalid_argument("unknown derived series '" + d + "'");
    if (!has_kind(c, CrossingKind::Proposal1)) throw std::invalid_argument("derived pi1-lr needs kind pi1");
  }
  const auto& n = c.numerics;
  if (n.transform_cutoff && !(*n.transform_cutoff > 0.0))
    throw std::invalid_argument("numerics.transform_cutoff must be positive");
  if (n.space_min.has_value() != n.space_max.has_value())
    throw std::invalid_argument("numerics.space_min and numerics.space_max go together");
  if (n.space_min && !(*n.space_max > *n.space_min))
    throw std::invalid_argument("numerics.space_max must exceed numerics.space_min");
  if (n.space_min) {
    for (double X : c.arrival_points)
      if (X <= *n.space_min || X >= *n.space_max)
        throw std::invalid_argument("arrival point " + short_number(X) + " outside the spatial grid");
  }
  if (n.classical_samples && *n.classical_samples == 0)
    throw std::invalid_argument("numerics.classical_samples must be positive");
  if (n.bandwidth && !(*n.bandwidth > 0.0)) throw std::invalid_argument("numerics.bandwidth must be positive");
  if (n.truncation_tolerance && !(*n.truncation_tolerance > 0.0))
    throw std::invalid_argument("numerics.truncation_tolerance must be positive");
  if (n.momentum_nodes && *n.momentum_nodes == 0) throw std::invalid_argument("numerics.momentum_nodes must be positive");
  if (n.space_nodes && *n.space_nodes == 0) throw std::invalid_argument("numerics.space_nodes must be positive");
}

void resolve_numerics(ScenarioConfig& c) {
  auto& n = c.numerics;
  if (!n.transform_cutoff) n.transform_cutoff = kDefaultCutoff;
  if (!n.space_min) {
    auto must = edges_of(c);
    must.insert(must.end(), c.arrival_points.begin(), c.arrival_points.end());
    const auto [lo, hi] = packet_extent(c.packet, max_abs_time(c), must, c.units);
    n.space_min = lo;
    n.space_max = hi;
  }
  if (!n.space_nodes) n.space_nodes = automatic_space_grid(c).size();
  if (!n.momentum_nodes) n.momentum_nodes = automatic_momentum_grid(c).size();
  if (!n.classical_samples) n.classical_samples = kDefaultSamples;
  if (!n.seed) n.seed = kDefaultSeed;
  if (!n.bandwidth) n.bandwidth = kDefaultBandwidth;
  if (!n.truncation_tolerance) n.truncation_tolerance = kTruncationTolerance;
}

MomentumGrid scenario_momentum_grid(const ScenarioConfig& c) {
  auto grid = automatic_momentum_grid(c);
  const std::size_t want = *c.numerics.momentum_nodes;
  if (want < grid.size())
    throw std::invalid_argument("numerics.momentum_nodes = " + std::to_string(want) +
                                " is below the resolved minimum " + std::to_string(grid.size()));
  if (want == grid.size()) return grid;
  const std::size_t parts = (want + grid.size() - 1) / grid.size();
  std::vector<PanelSpec> panels;
  for (const auto& pn : grid.panels()) {
    const double h = (pn.hi - pn.lo) / static_cast<double>(parts);
    for (std::size_t k = 0; k < parts; ++k)
      panels.push_back({pn.lo + h * static_cast<double>(k), k + 1 == parts ? pn.hi : pn.lo + h * static_cast<double>(k + 1),
                        pn.count});
  }
  return MomentumGrid::from_panels(panels);
}

SpatialGrid scenario_space_grid(const ScenarioConfig& c) {
  auto grid = automatic_space_grid(c);
  const std::size_t want = *c.numerics.space_nodes;
  if (want < grid.size())
    throw std::invalid_argument("numerics.space_nodes = " + std::to_string(want) +
                                " is below the resolved minimum " + std::to_string(grid.size()));
  if (want == grid.size()) return grid;
  const auto edges = edges_of(c);
  return build_spatial_grid_with_count(*c.numerics.space_min, *c.numerics.space_max, edges, want);
}

std::vector<std::string> preset_names() { return {"figure1", "figure2", "figure3", "figure4", "figure5"}; }

ScenarioConfig preset(const std::string& name) {
  ScenarioConfig c;
  c.label = name;
  c.packet = {-6.0, 6.0, 1.0};
  c.segments = {{0.0, 10.0, 10.0}};
  c.arrival_points = {-2.0, 5.0, 12.0};
  c.t_min = 0.0;
  c.t_max = 10.0;
  c.t_count = 401;
  if (name == "figure1") {
    c.kinds = {CrossingKind::KijowskiFree, CrossingKind::Proposal2Plus};
  } else if (name == "figure2") {
    c.kinds = {CrossingKind::Proposal2Minus};
    c.flux = true;
  } else if (name == "figure3") {
    c.arrival_points = {-2.0};
    c.kinds = {CrossingKind::Proposal3Plus, CrossingKind::Proposal1};
    c.flux = true;
    c.derived = {"pi1-lr"};
  } else if (name == "figure4") {
    c.arrival_points = {5.0};
    c.kinds = {CrossingKind::Proposal1, CrossingKind::Proposal3Plus};
    c.flux = true;
  } else if (name == "figure5") {
    c.packet = {-9.0, 3.0, 1.0};
    c.arrival_points = {-5.0};
    c.t_max = 14.0;
    c.t_count = 561;
    c.kinds = {CrossingKind::Proposal1, CrossingKind::Proposal3Plus, CrossingKind::Proposal2Plus,
               CrossingKind::Proposal2Minus};
    c.flux = true;
    // Momenta near p = 0 leave a slowly decaying 1/|x| tail in psi(x, t).
    c.numerics.truncation_tolerance = kLooseTruncation;
  } else {
    throw std::invalid_argument("unknown preset '" + name + "' (figure1 ... figure5)");
  }
  validate(c);
  resolve_numerics(c);
  return c;
}

ValidationReport validation_report(const ScenarioConfig& config) {
  ScenarioConfig c = config;
  validate(c);
  resolve_numerics(c);
  ValidationReport r;
  r.negative_fraction = negative_fraction(c.packet, c.units);
  const auto edges = edges_of(c);
  if (!edges.empty()) {
    r.nearest_edge = *std::min_element(edges.begin(), edges.end(), [&](double a, double b) {
      return std::abs(a - c.packet.x0) < std::abs(b - c.packet.x0);
    });
    r.edge_amplitude = std::abs(free_gaussian(c.packet, r.nearest_edge, 0.0, c.units));
    r.edge_density = r.edge_amplitude * r.edge_amplitude;
  }
  r.momentum_nodes = scenario_momentum_grid(c).size();
  r.space_nodes = *c.numerics.space_nodes;
  if (has_kind(c, CrossingKind::Proposal1))
    r.transform_nodes =
        make_pi1_numerics(scenario_space_grid(c), *c.numerics.transform_cutoff, c.arrival_points, c.units,
                          *c.numerics.truncation_tolerance)
            .transform.size();
  return r;
}

std::string format_report(const ValidationReport& r) {
  std::ostringstream s;
  s.precision(6);
  s << "negative-momentum fraction        " << r.negative_fraction << "\n";
  s << "nearest potential edge            " << r.nearest_edge << "\n";
  s << "initial |psi| at that edge        " << r.edge_amplitude << "\n";
  s << "initial |psi|^2 at that edge      " << r.edge_density << "\n";
  s << "momentum nodes                    " << r.momentum_nodes << "\n";
  s << "spatial nodes                     " << r.space_nodes << "\n";
  if (r.transform_nodes > 0) s << "transform nodes                   " << r.transform_nodes << "\n";
  return s.str();
}

std::string format_series_csv(const DistributionSeries& series) {
  std::string out = "T,total,left,right\n";
  char buf[128];
  for (std::size_t n = 0; n < series.times.count(); ++n) {
    std::snprintf(buf, sizeof buf, "%.11e,%.11e,%.11e,%.11e\n", series.times[n], series.total[n], series.left[n],
                  series.right[n]);
    out += buf;
  }
  return out;
}

std::string format_values_csv(const TimeGrid& times, const std::vector<double>& values, const std::string& column) {
  if (values.size() != times.count()) throw std::invalid_argument("values do not match the time grid");
  std::string out = "T," + column + "\n";
  char buf[96];
  for (std::size_t n = 0; n < times.count(); ++n) {
    std::snprintf(buf, sizeof buf, "%.11e,%.11e\n", times[n], values[n]);
    out += buf;
  }
  return out;
}

RunResult run_scenario(const ScenarioConfig& config, const fs::path& out_dir) {
  ScenarioConfig c = config;
  validate(c);
  resolve_numerics(c);
  fs::create_directories(out_dir);
  RunResult result;
  const auto potential = c.potential();
  const auto times = c.times();
  const auto report = validation_report(c);

  json manifest;
  manifest["label"] = c.label;
  manifest["config"] = format_config(c);
  manifest["units"] = {{"hbar", c.units.hbar}, {"mass", c.units.mass}};
  manifest["packet"] = {{"x0", c.packet.x0}, {"p0", c.packet.p0}, {"dx", c.packet.dx}};
  manifest["time"] = {{"t_min", c.t_min}, {"t_max", c.t_max}, {"count", c.t_count}};
  manifest["smallness"] = {{"negative_fraction", report.negative_fraction},
                           {"nearest_edge", report.nearest_edge},
                           {"edge_amplitude", report.edge_amplitude},
                           {"edge_density", report.edge_density}};
  const auto& n = c.numerics;
  manifest["numerics"] = {{"momentum_nodes", report.momentum_nodes},
                          {"transform_cutoff", *n.transform_cutoff},
                          {"transform_nodes", report.transform_nodes},
                          {"space_min", *n.space_min},
                          {"space_max", *n.space_max},
                          {"space_nodes", *n.space_nodes},
                          {"nodes_per_oscillation", kNodesPerOscillation},
                          {"panel_nodes", kPanelNodes},
                          {"truncation_tolerance", *n.truncation_tolerance}};
  if (c.classical)
    manifest["classical"] = {{"samples", *n.classical_samples},
                             {"seed", *n.seed},
                             {"bandwidth", *n.bandwidth},
                             {"density", "product of position and momentum Gaussians (dx, hbar/(2 dx))"}};
  manifest["series"] = json::array();
  manifest["ratios"] = json::array();
  manifest["overlaps"] = json::array();

  const auto grid = scenario_momentum_grid(c);
  const auto phi = gaussian_asymptote(c.packet, grid, c.units);
  std::optional<Pi1Numerics> pi1_numerics;
  if (has_kind(c, CrossingKind::Proposal1))
    pi1_numerics = make_pi1_numerics(scenario_space_grid(c), *n.transform_cutoff, c.arrival_points, c.units,
                                     *n.truncation_tolerance);
  std::optional<ClassicalEnsemble> ensemble;
  if (c.classical) ensemble = sample_gaussian_ensemble(c.packet, *n.classical_samples, *n.seed, c.units);

  auto emit = [&](const std::string& name, const std::string& text, double X, const std::string& kind,
                  const std::string& column, const std::vector<double>& values) {
    const auto path = out_dir / name;
    write_text(path, text);
    result.csv_files.push_back(path);
    const auto pk = find_peak(values, times);
    manifest["series"].push_back({{"X", X},
                                  {"kind", kind},
                                  {"file", name},
                                  {"column", column},
                                  {"peak_time", pk.time},
                                  {"peak_height", pk.height}});
  };

  for (double X : c.arrival_points) {
    const auto stem = "X" + short_number(X) + "_";
    Bundle bundle;
    try {
      bundle = series_bundle(phi, potential, X, times, {c.kinds, c.flux}, pi1_numerics ? &*pi1_numerics : nullptr);
    } catch (const std::exception& e) {
      std::string kinds;
      for (auto k : c.kinds) kinds += std::string(kinds.empty() ? "" : " ") + std::string(to_string(k));
      if (c.flux) kinds += kinds.empty() ? "flux" : " flux";
      throw std::runtime_error(context(X, kinds, times) + ": " + e.what());
    }
    for (const auto& s : bundle.series)
      emit(stem + file_tag(s.kind) + ".csv", format_series_csv(s), X, std::string(to_string(s.kind)), "total", s.total);
    if (bundle.flux) emit(stem + "flux.csv", format_values_csv(times, bundle.flux->values, "flux"), X, "flux", "flux",
                          bundle.flux->values);
    for (const auto& d : c.derived) {
      if (d != "pi1-lr") continue;
      const auto& s = bundle.at(CrossingKind::Proposal1);
      std::vector<double> diff(s.left.size());
      for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = s.left[i] - s.right[i];
      emit(stem + "pi1-lr.csv", format_values_csv(times, diff, "value"), X, "pi1-lr", "value", diff);
    }
    if (ensemble) {
      DistributionSeries s;
      try {
        const auto events = trace_arrivals(*ensemble, potential, X, c.t_max, c.units);
        s = classical_distribution(events, X, times, *n.bandwidth);
      } catch (const std::exception& e) {
        throw std::runtime_error(context(X, "classical", times) + ": " + e.what());
      }
      emit(stem + "classical.csv", format_series_csv(s), X, "classical", "total", s.total);
    }
    if (has_kind(c, CrossingKind::Proposal1) && has_kind(c, CrossingKind::Proposal3Plus)) {
      const auto p1 = find_peak(bundle.at(CrossingKind::Proposal1).total, times);
      const auto p3 = find_peak(bundle.at(CrossingKind::Proposal3Plus).total, times);
      manifest["ratios"].push_back(
          {{"X", X}, {"numerator", "pi3+"}, {"denominator", "pi1"}, {"peak_ratio", p3.height / p1.height}});
    }
    if (has_kind(c, CrossingKind::KijowskiFree) && has_kind(c, CrossingKind::Proposal2Plus)) {
      const auto& a = bundle.at(CrossingKind::KijowskiFree).total;
      const auto& b = bundle.at(CrossingKind::Proposal2Plus).total;
      double diff = 0.0, peak = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        diff = std::max(diff, std::abs(a[i] - b[i]));
        peak = std::max(peak, std::max(a[i], b[i]));
      }
      manifest["overlaps"].push_back({{"X", X},
                                      {"pair", {"kijowski-free", "pi2+"}},
                                      {"max_abs_difference", diff},
                                      {"relative_to_peak", peak > 0.0 ? diff / peak : 0.0}});
    }
  }
  result.manifest = out_dir / "manifest.json";
  write_text(result.manifest, manifest.dump(2) + "\n");
  return result;
}

}  // namespace toa
