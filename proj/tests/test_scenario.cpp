#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "toa/scenario.hpp"

using namespace toa;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(label = small
packet.x0 = -6
packet.p0 = 6
packet.dx = 1
potential.segment.1.x_left = 0
potential.segment.1.x_right = 10
potential.segment.1.v0 = 10
arrival.points = -2, 12
time.t_min = 0
time.t_max = 5
time.count = 51
kinds = pi3+, pi2-, flux, classical
numerics.classical_samples = 2000
)";

fs::path scratch(const std::string& name) {
  static std::mt19937_64 rng(std::random_device{}());
  auto dir = fs::temp_directory_path() / ("toa-test-" + name + "-" + std::to_string(rng()));
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return 9999;
}

}  // namespace

TEST_CASE("presets resolve and round-trip through the config format") {
  for (const auto& name : preset_names()) {
    const auto c = preset(name);
    CAPTURE(name);
    CHECK(c.label == name);
    CHECK(c.numerics.space_min.has_value());
    CHECK(c.numerics.momentum_nodes.has_value());
    CHECK(parse_config(format_config(c)) == c);
  }
  CHECK_THROWS_AS(preset("figure6"), std::invalid_argument);
  const auto f5 = preset("figure5");
  CHECK(f5.packet == GaussianSpec{-9.0, 3.0, 1.0});
  CHECK(f5.arrival_points == std::vector<double>{-5.0});
  const auto f1 = preset("figure1");
  CHECK(f1.arrival_points == std::vector<double>{-2.0, 5.0, 12.0});
  CHECK(f1.times().count() == 401);
}

TEST_CASE("config parsing") {
  const auto c = parse_config(kSmall);
  CHECK(c.label == "small");
  CHECK(c.segments.size() == 1);
  CHECK(c.segments[0].height == 10.0);
  CHECK(c.kinds == std::vector<CrossingKind>{CrossingKind::Proposal3Plus, CrossingKind::Proposal2Minus});
  CHECK(c.flux);
  CHECK(c.classical);
  CHECK(*c.numerics.classical_samples == 2000);
  CHECK(*c.numerics.seed == 1);
  CHECK(*c.numerics.bandwidth == 0.05);
  CHECK(*c.numerics.transform_cutoff == 30.0);
  CHECK(*c.numerics.space_min < -2.0);
  CHECK(*c.numerics.space_max > 12.0);
  CHECK(parse_config(format_config(c)) == c);

  const std::string formatted = format_config(c);
  CHECK(formatted.find("numerics.bandwidth = 0.05\n") != std::string::npos);

  SUBCASE("errors carry line numbers") {
    const std::string base = "packet.x0 = -6\npacket.p0 = 6\narrival.points = 1\n";
    CHECK(error_line(base + "packet.speed = 3\n") == 4);
    CHECK(error_line(base + "packet.x0 = 1\n") == 4);
    CHECK(error_line("packet.x0 = abc\n") == 1);
    CHECK(error_line("# comment\n\nnonsense\n") == 3);
    CHECK(error_line(base + "kinds = pi9\n") == 4);
    CHECK(error_line(base + "time.count = -3\n") == 4);
    CHECK(error_line(base + "potential.segment.0.v0 = 1\n") == 4);
    CHECK(error_line(base + "potential.segment.1.height = 1\n") == 4);
  }
  SUBCASE("invariants are checked after parsing") {
    const std::string base = "packet.x0 = -6\npacket.p0 = 6\narrival.points = 1\n";
    CHECK_THROWS_AS(parse_config("packet.x0 = -6\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "potential.segment.2.x_left = 0\npotential.segment.2.x_right = 1\n"
                                        "potential.segment.2.v0 = 1\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(base + "potential.segment.1.x_left = 0\npotential.segment.1.v0 = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "packet.dx = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "time.t_max = -1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "derived = pi1-lr\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "kinds = pi1, pi1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "numerics.space_min = -5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "numerics.space_min = 2\nnumerics.space_max = 5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "numerics.momentum_nodes = 10\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "units.mass = 0\n"), ConfigError);
    CHECK(error_line(base + "units.mass = 0\n") == 0);
  }
}

TEST_CASE("requested node counts") {
  auto c = parse_config(kSmall);
  const auto auto_nodes = *c.numerics.momentum_nodes;
  CHECK(scenario_momentum_grid(c).size() == auto_nodes);
  c.numerics.momentum_nodes = 2 * auto_nodes;
  CHECK(scenario_momentum_grid(c).size() == 2 * auto_nodes);
  c.numerics.momentum_nodes = auto_nodes - 1;
  CHECK_THROWS_AS(scenario_momentum_grid(c), std::invalid_argument);
  const auto space = *c.numerics.space_nodes;
  c.numerics.space_nodes = space + 1000;
  CHECK(scenario_space_grid(c).size() >= space + 1000);
}

TEST_CASE("validation report") {
  const auto r = validation_report(preset("figure1"));
  CHECK(r.negative_fraction < 1e-30);
  CHECK(r.nearest_edge == 0.0);
  CHECK(r.edge_amplitude == doctest::Approx(std::pow(2.0 * pi, -0.25) * std::exp(-36.0 / 4.0)));
  CHECK(r.edge_density == doctest::Approx(r.edge_amplitude * r.edge_amplitude));
  const auto text = format_report(r);
  CHECK(text.find("negative-momentum fraction") != std::string::npos);
}

TEST_CASE("CSV formatting") {
  DistributionSeries s;
  s.times = TimeGrid(0.0, 1.0, 3);
  s.left = {0.5, 1.0, 0.25};
  s.right = {0.0, 0.125, 0.0};
  s.total = {0.5, 1.125, 0.25};
  const auto text = format_series_csv(s);
  CHECK(text.rfind("T,total,left,right\n", 0) == 0);
  CHECK(text.find("5.00000000000e-01,1.12500000000e+00,1.00000000000e+00,1.25000000000e-01\n") != std::string::npos);
  CHECK(format_values_csv(s.times, {1.0, 2.0, 3.0}, "flux").rfind("T,flux\n0.00000000000e+00,1.00000000000e+00\n", 0) == 0);
  CHECK_THROWS_AS(format_values_csv(s.times, {1.0}, "flux"), std::invalid_argument);
}

TEST_CASE("runs write CSVs, a manifest and a plot script") {
  const auto c = parse_config(kSmall);
  const auto dir = scratch("run");
  const auto r = run_scenario(c, dir);
  CHECK(r.csv_files.size() == 8);
  for (const auto& f : r.csv_files) CHECK(fs::exists(f));
  CHECK(fs::exists(dir / "X-2_pi3p.csv"));
  CHECK(fs::exists(dir / "X12_pi2m.csv"));
  CHECK(fs::exists(dir / "X12_flux.csv"));
  CHECK(fs::exists(dir / "X-2_classical.csv"));

  const auto csv = slurp(dir / "X12_pi3p.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 52);

  const auto manifest = nlohmann::json::parse(slurp(r.manifest));
  CHECK(manifest["label"] == "small");
  CHECK(manifest["series"].size() == 8);
  CHECK(manifest["smallness"]["negative_fraction"].get<double>() < 1e-30);
  CHECK(manifest["classical"]["seed"] == 1);
  CHECK(parse_config(manifest["config"].get<std::string>()) == c);
  for (const auto& s : manifest["series"])
    if (s["kind"] == "pi3+" && s["X"] == 12.0) CHECK(std::abs(s["peak_time"].get<double>() - 23.0 / 6.0) < 0.3);

  // deterministic, classical part included
  const auto again = scratch("again");
  run_scenario(c, again);
  for (const auto& f : r.csv_files) CHECK(slurp(f) == slurp(again / f.filename()));

  const auto script = emit_plot_script(r.manifest);
  const auto text = slurp(script);
  CHECK(text.find("set datafile separator ','") != std::string::npos);
  CHECK(text.find("set multiplot layout 2,1") != std::string::npos);
  CHECK(text.find("'X12_flux.csv'") != std::string::npos);

  fs::remove(dir / "X12_flux.csv");
  CHECK_THROWS_AS(emit_plot_script(r.manifest), std::runtime_error);
  fs::remove_all(dir);
  fs::remove_all(again);
}

TEST_CASE("a run without kinds writes only the manifest") {
  auto text = std::string(kSmall);
  text.replace(text.find("kinds = pi3+, pi2-, flux, classical"), 35, "kinds =");
  const auto c = parse_config(text);
  const auto dir = scratch("empty");
  const auto r = run_scenario(c, dir);
  CHECK(r.csv_files.empty());
  CHECK(fs::exists(r.manifest));
  CHECK(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}) == 1);
  fs::remove_all(dir);
}

TEST_CASE("figure styles in the plot script") {
  const auto dir = scratch("fig2");
  auto c = preset("figure2");
  c.t_count = 41;
  c.numerics.momentum_nodes.reset();
  c.numerics.space_nodes.reset();
  resolve_numerics(c);
  const auto r = run_scenario(c, dir);
  const auto text = slurp(emit_plot_script(r.manifest));
  CHECK(text.find("'X12_pi2m.csv' every ::1 using 1:3") != std::string::npos);
  CHECK(text.find("'X12_flux.csv' every ::1 using 1:2 with lines dt 2") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("plot scripts from hand-written manifests") {
  const auto dir = scratch("plot");
  auto touch = [&](const std::string& name) { std::ofstream(dir / name) << "T,total,left,right\n"; };
  auto write_manifest = [&](const nlohmann::json& m) { std::ofstream(dir / "manifest.json") << m.dump(2); };

  SUBCASE("a single series gives a single plot line") {
    touch("X5_pi3p.csv");
    write_manifest({{"label", "one"}, {"series", {{{"X", 5.0}, {"kind", "pi3+"}, {"file", "X5_pi3p.csv"}}}}});
    const auto text = slurp(emit_plot_script(dir / "manifest.json"));
    CHECK(std::count(text.begin(), text.end(), '\\') == 0);
    CHECK(text.find("multiplot") == std::string::npos);
    CHECK(text.find("plot 'X5_pi3p.csv' every ::1 using 1:2 with lines dt 1 lw 2 title 'Pi_{3,+}'\n") !=
          std::string::npos);
  }
  SUBCASE("figure3 uses four styles") {
    nlohmann::json series = nlohmann::json::array();
    for (const auto& [kind, file] : std::vector<std::pair<std::string, std::string>>{
             {"pi3+", "X-2_pi3p.csv"}, {"pi1", "X-2_pi1.csv"}, {"flux", "X-2_flux.csv"}, {"pi1-lr", "X-2_pi1-lr.csv"}}) {
      touch(file);
      series.push_back({{"X", -2.0}, {"kind", kind}, {"file", file}});
    }
    write_manifest({{"label", "figure3"}, {"series", series}});
    const auto text = slurp(emit_plot_script(dir / "manifest.json"));
    CHECK(text.find("'X-2_pi3p.csv' every ::1 using 1:2 with lines dt 1") != std::string::npos);
    CHECK(text.find("'X-2_pi1.csv' every ::1 using 1:2 with lines dt '__ '") != std::string::npos);
    CHECK(text.find("'X-2_pi1-lr.csv' every ::1 using 1:2 with lines dt '- '") != std::string::npos);
    CHECK(text.find("'X-2_flux.csv' every ::1 using 1:2 with points") != std::string::npos);
  }
  SUBCASE("unreadable manifests") {
    std::ofstream(dir / "manifest.json") << "{ not json";
    CHECK_THROWS_AS(emit_plot_script(dir / "manifest.json"), std::runtime_error);
    CHECK_THROWS_AS(emit_plot_script(dir / "absent.json"), std::runtime_error);
  }
  fs::remove_all(dir);
}
