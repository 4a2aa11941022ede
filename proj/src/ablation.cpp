#include "vmark/ablation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "vmark/errors.hpp"

namespace vmark {

namespace fs = std::filesystem;

Rgb hsv_to_rgb(double h, double s, double v) {
  h = std::fmod(std::fmod(h, 360.0) + 360.0, 360.0);
  const double c = v * s;
  const double x = c * (1.0 - std::fabs(std::fmod(h / 60.0, 2.0) - 1.0));
  const double m = v - c;
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(h / 60.0)) {
    case 0: r = c, g = x; break;
    case 1: r = x, g = c; break;
    case 2: g = c, b = x; break;
    case 3: g = x, b = c; break;
    case 4: r = x, b = c; break;
    default: r = c, b = x; break;
  }
  auto to8 = [](double u) { return static_cast<std::uint8_t>(std::lround(std::clamp(u, 0.0, 1.0) * 255.0)); };
  return {to8(r + m), to8(g + m), to8(b + m)};
}

std::vector<Rgb> hsv_palette(double s, double v) {
  std::vector<Rgb> out;
  for (double h : {0.0, 60.0, 240.0, 120.0}) out.push_back(hsv_to_rgb(h, s, v));
  return out;
}

namespace {

AblationGrid mask_grid() {
  AblationGrid g{"mask", {"Rendering style", "alpha", "beta", "Contour (w)"}, {}};
  g.rows.push_back({"", {"No mask", "--", "--", "--"}, [](RunConfig& c) { c.style.semantic_markers = false; }});
  for (double a : {0.2, 0.3, 0.5}) {
    g.rows.push_back({"", {"Mask fill (palette)", a == 0.2 ? "0.2" : a == 0.3 ? "0.3" : "0.5", "--", "off"},
                      [a](RunConfig& c) {
                        c.style.alpha = a;
                        c.style.contour_width = 0;
                      }});
  }
  g.rows.push_back({"", {"Mask fill (all-red)", "0.3", "--", "off"}, [](RunConfig& c) {
                      c.style.alpha = 0.3;
                      c.style.contour_width = 0;
                      c.style.palette = {colors::kRed};
                    }});
  for (int w : {2, 3, 5}) {
    g.rows.push_back({"", {"Mask + contour (palette)", "0.3", "1.0", "w=" + std::to_string(w)}, [w](RunConfig& c) {
                        c.style.alpha = 0.3;
                        c.style.beta = 1.0;
                        c.style.contour_width = w;
                      }});
  }
  return g;
}

AblationGrid index_grid() {
  AblationGrid g{"index", {"Size", "Color", "Position"}, {}};
  auto row = [&](const std::string& block, int size, const std::string& color_name, Rgb color,
                 const std::string& pos_name, IndexPosition pos) {
    g.rows.push_back({block, {std::to_string(size), color_name, pos_name}, [=](RunConfig& c) {
                        c.style.draw_index = true;
                        c.style.index_font_height = size;
                        c.style.index_color = color;
                        c.style.index_position = pos;
                      }});
  };
  const std::pair<const char*, IndexPosition> positions[] = {
      {"Top Left", IndexPosition::top_left},       {"Top Right", IndexPosition::top_right},
      {"Center", IndexPosition::center},           {"Bottom Left", IndexPosition::bottom_left},
      {"Bottom Right", IndexPosition::bottom_right}, {"Find region", IndexPosition::find_region}};
  for (const auto& [name, pos] : positions) row("Position ablation", 40, "Black", colors::kBlack, name, pos);
  for (int size : {20, 30, 38, 40}) {
    row("Size ablation", size, "Black", colors::kBlack, "Bottom Right", IndexPosition::bottom_right);
  }
  row("Color ablation", 38, "Black", colors::kBlack, "Bottom Right", IndexPosition::bottom_right);
  row("Color ablation", 38, "Red", colors::kRed, "Bottom Right", IndexPosition::bottom_right);
  row("Color ablation", 38, "Blue", colors::kBlue, "Bottom Right", IndexPosition::bottom_right);
  return g;
}

AblationGrid color_grid() {
  AblationGrid g{"color", {"Color config"}, {}};
  auto fixed = [](RunConfig& c) {
    c.style.alpha = 0.3;
    c.style.beta = 1.0;
    c.style.contour_width = 3;
  };
  g.rows.push_back({"", {"RGB palette"}, [fixed](RunConfig& c) {
                      fixed(c);
                      c.style.palette = StyleConfig{}.palette;
                    }});
  g.rows.push_back({"", {"HSV palette (high S/V)"}, [fixed](RunConfig& c) {
                      fixed(c);
                      c.style.palette = hsv_palette(1.0, 1.0);
                    }});
  g.rows.push_back({"", {"HSV palette (low S/V)"}, [fixed](RunConfig& c) {
                      fixed(c);
                      c.style.palette = hsv_palette(0.5, 0.6);
                    }});
  return g;
}

AblationGrid tag_grid() {
  AblationGrid g{"tag", {"Tag strategy"}, {}};
  const std::pair<const char*, TagStrategy> rows[] = {{"No nouns", TagStrategy::none},
                                                      {"All nouns", TagStrategy::all_nouns},
                                                      {"Single noun", TagStrategy::single_noun},
                                                      {"Subject nouns", TagStrategy::subject_nouns}};
  for (const auto& [name, strategy] : rows) {
    g.rows.push_back({"", {name}, [strategy = strategy](RunConfig& c) { c.tag_strategy = strategy; }});
  }
  return g;
}

std::string slug(const std::vector<std::string>& keys) {
  std::string s;
  for (const auto& k : keys) {
    if (!s.empty()) s += "__";
    for (char ch : k) {
      const bool keep = std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-';
      s += keep ? static_cast<char>(std::tolower(static_cast<unsigned char>(ch))) : '_';
    }
  }
  return s;
}

}  // namespace

std::vector<std::string> ablation_grid_names() { return {"mask", "index", "color", "tag"}; }

AblationGrid ablation_grid(std::string_view name) {
  if (name == "mask") return mask_grid();
  if (name == "index") return index_grid();
  if (name == "color") return color_grid();
  if (name == "tag") return tag_grid();
  throw ConfigError("unknown ablation grid: " + std::string(name));
}

AblationResult run_ablation(const RunConfig& base, const AblationGrid& grid, Backends& backends) {
  AblationResult result;
  result.grid = grid;
  const fs::path root = base.output_root / "ablation" / grid.name;
  result.json = {{"grid", grid.name}, {"key_headers", grid.key_headers}, {"rows", nlohmann::json::array()}};
  for (const auto& row : grid.rows) {
    RunConfig config = base;
    row.apply(config);
    config.output_root = root / slug(row.keys);
    const RunSummary summary = run_pipeline(config, backends);
    result.rows.push_back({row.block, row.keys, summary.report});
    result.json["rows"].push_back({{"block", row.block}, {"keys", row.keys}, {"metrics", to_json(summary.report)}});
  }
  result.text = format_table(grid.key_headers, result.rows);
  fs::create_directories(root);
  std::ofstream(root / (grid.name + ".txt"), std::ios::binary) << result.text;
  std::ofstream(root / (grid.name + ".json"), std::ios::binary) << result.json.dump(2) << '\n';
  return result;
}

}  // namespace vmark
