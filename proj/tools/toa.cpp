#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "toa/scenario.hpp"

namespace fs = std::filesystem;

namespace {

fs::path output_dir(const std::string& flag, const std::string& fallback) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("TOA_OUT_DIR"); env != nullptr && *env != '\0') return fs::path(env) / fallback;
  return fs::path("toa-out") / fallback;
}

void print_run(const toa::RunResult& r) {
  for (const auto& f : r.csv_files) std::cout << f.string() << "\n";
  std::cout << r.manifest.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-of-arrival distributions for wave packets scattering off piecewise-constant potentials"};
  app.require_subcommand(1);

  std::string config_path, out_flag, preset_name, manifest_path;

  auto* run = app.add_subcommand("run", "Run a scenario file");
  run->add_option("config", config_path, "Scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_flag, "Output directory (default $TOA_OUT_DIR/<label> or toa-out/<label>)");

  auto* pre = app.add_subcommand("preset", "Run one of the built-in figure scenarios");
  pre->add_option("name", preset_name, "figure1 ... figure5")
      ->required()
      ->check(CLI::IsMember(toa::preset_names()));
  pre->add_option("--out", out_flag, "Output directory (default $TOA_OUT_DIR/<name> or toa-out/<name>)");

  auto* val = app.add_subcommand("validate", "Check a scenario file and print its smallness parameters");
  val->add_option("config", config_path, "Scenario file")->required()->check(CLI::ExistingFile);

  auto* plot = app.add_subcommand("plot", "Write a gnuplot script for a run manifest");
  plot->add_option("manifest", manifest_path, "manifest.json of a run")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto config = toa::load_config(config_path);
      const auto fallback = config.label.empty() ? fs::path(config_path).stem().string() : config.label;
      const auto dir = output_dir(out_flag, fallback);
      fs::create_directories(dir);
      toa::write_config(config, dir / "config.toa");
      print_run(toa::run_scenario(config, dir));
    } else if (*pre) {
      const auto config = toa::preset(preset_name);
      const auto dir = output_dir(out_flag, preset_name);
      fs::create_directories(dir);
      toa::write_config(config, dir / "config.toa");
      const auto result = toa::run_scenario(config, dir);
      print_run(result);
      std::cout << toa::emit_plot_script(result.manifest).string() << "\n";
    } else if (*val) {
      const auto config = toa::load_config(config_path);
      std::cout << toa::format_report(toa::validation_report(config));
    } else if (*plot) {
      std::cout << toa::emit_plot_script(manifest_path).string() << "\n";
    }
  } catch (const toa::ConfigError& e) {
    std::cerr << "toa: " << (config_path.empty() ? std::string() : config_path + ": ") << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "toa: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
