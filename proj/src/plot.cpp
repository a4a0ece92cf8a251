#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "toa/scenario.hpp"

namespace toa {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Style {
  int column = 2;
  std::string with = "lines";
  std::string dash = "1";
  std::string title;
};

std::string display_name(const std::string& kind) {
  static const std::map<std::string, std::string> names = {
      {"kijowski-free", "Pi_K"}, {"pi1", "Pi_1"},   {"pi2+", "Pi_{2,+}"}, {"pi2-", "Pi_{2,-}"},
      {"pi3+", "Pi_{3,+}"},      {"pi3-", "Pi_{3,-}"}, {"flux", "J"},       {"pi1-lr", "Pi_1^L - Pi_1^R"},
      {"classical", "Pi_cl"}};
  const auto it = names.find(kind);
  return it == names.end() ? kind : it->second;
}

// Line styles follow the figure captions of the reproduced figures.
Style style_for(const std::string& label, const std::string& kind, std::size_t x_index) {
  Style s;
  s.title = display_name(kind);
  if (label == "figure1") {
    static const char* by_x[] = {"1", "3", "2"};
    s.dash = by_x[x_index % 3];
  } else if (label == "figure2") {
    if (kind == "pi2-") {
      s.column = 3;
      s.title = "Pi_{2,-}^L";
    } else {
      s.dash = "2";
    }
  } else if (label == "figure3" || label == "figure4") {
    if (kind == "flux") {
      s.with = "points pt 7 ps 0.3";
    } else if (kind == "pi1") {
      s.dash = label == "figure3" ? "'__ '" : "2";
    } else if (kind == "pi1-lr") {
      s.dash = "'- '";
    }
  } else if (label == "figure5") {
    if (kind == "pi3+") s.dash = "2";
    if (kind != "flux" && kind != "pi3+") s.dash = "3";
  } else {
    static const std::map<std::string, std::string> dashes = {{"flux", "2"}, {"pi1", "3"}, {"pi1-lr", "4"}};
    const auto it = dashes.find(kind);
    if (it != dashes.end()) s.dash = it->second;
  }
  return s;
}

}  // namespace

fs::path emit_plot_script(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open manifest " + manifest_path.string());
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("manifest " + manifest_path.string() + " is not valid JSON: " + e.what());
  }
  const auto dir = manifest_path.parent_path();
  const std::string label = manifest.value("label", "");
  const auto& series = manifest.at("series");

  std::vector<double> xs;
  for (const auto& s : series) {
    const auto file = s.at("file").get<std::string>();
    if (!fs::exists(dir / file)) throw std::runtime_error("manifest lists missing CSV " + (dir / file).string());
    const double X = s.at("X").get<double>();
    if (std::find(xs.begin(), xs.end(), X) == xs.end()) xs.push_back(X);
  }

  const std::string stem = label.empty() ? "toa" : label;
  std::ostringstream g;
  g << "# gnuplot script for " << manifest_path.filename().string() << "\n";
  g << "set datafile separator ','\n";
  g << "set terminal pngcairo size 900," << 300 * std::max<std::size_t>(xs.size(), 1) << "\n";
  g << "set output '" << stem << ".png'\n";
  g << "set xlabel 'T'\n";
  g << "set key top right\n";
  if (xs.size() > 1) g << "set multiplot layout " << xs.size() << ",1\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    g << "set title 'X = " << xs[i] << "'\n";
    std::vector<std::string> lines;
    for (const auto& s : series) {
      if (s.at("X").get<double>() != xs[i]) continue;
      const auto kind = s.at("kind").get<std::string>();
      const auto st = style_for(label, kind, i);
      std::ostringstream line;
      line << "'" << s.at("file").get<std::string>() << "' every ::1 using 1:" << st.column << " with " << st.with;
      if (st.with == "lines") line << " dt " << st.dash << " lw 2";
      line << " title '" << st.title << "'";
      lines.push_back(line.str());
    }
    g << "plot ";
    for (std::size_t k = 0; k < lines.size(); ++k) g << (k ? ", \\\n     " : "") << lines[k];
    g << "\n";
  }
  if (xs.size() > 1) g << "unset multiplot\n";

  const auto out = dir / "plot.gp";
  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + out.string());
  f << g.str();
  return out;
}

}  // namespace toa
