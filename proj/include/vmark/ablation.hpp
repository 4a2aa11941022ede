#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vmark/pipeline.hpp"

namespace vmark {

struct AblationRow {
  std::string block;              // sub-block heading, may be empty
  std::vector<std::string> keys;  // row label cells
  std::function<void(RunConfig&)> apply;
};

struct AblationGrid {
  std::string name;
  std::vector<std::string> key_headers;
  std::vector<AblationRow> rows;
};

/// Grids: "mask" (fill / contour rendering), "index" (frame-index
/// placement, size and colour), "color" (palette parameterisation) and
/// "tag" (tag proposal strategy).
AblationGrid ablation_grid(std::string_view name);
std::vector<std::string> ablation_grid_names();

/// Converts HSV (h in degrees, s and v in [0,1]) to 8-bit RGB.
Rgb hsv_to_rgb(double h, double s, double v);
std::vector<Rgb> hsv_palette(double s, double v);

struct AblationResult {
  AblationGrid grid;
  std::vector<TableRow> rows;
  std::string text;
  nlohmann::json json;
};

/// Runs the base config once per row under <output_root>/ablation/<grid>/
/// and writes <grid>.txt and <grid>.json next to the row directories.
/// Rows with identical keys share a run directory.
AblationResult run_ablation(const RunConfig& base, const AblationGrid& grid, Backends& backends);

}  // namespace vmark
