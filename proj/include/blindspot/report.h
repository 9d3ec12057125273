#pragma once

#include <string>
#include <vector>

#include "blindspot/regions.h"

namespace blindspot {

struct PlotStyle {
  int width = 960;
  int height = 540;
  std::string bar_fill = "#d9534f";
  std::string baseline_color = "#1f3a93";
  int font_size = 12;
  int margin = 20;
  size_t max_regions = 20;

  void validate() const;
};

// Horizontal error-rate bars, one per region in report order, on a [0, 1]
// axis with a dashed line at the baseline error rate. Standalone SVG 1.1.
std::string render_error_plot_svg(const RegionReport& report, const PlotStyle& style = {});

// Writes render_error_plot_svg to `path`. Throws IoError.
void render_error_plot(const RegionReport& report, const PlotStyle& style, const std::string& path);

// Fixed-width table: condition, support, coverage, errors, error_rate.
std::string render_text_table(const RegionReport& report);

// "condition,support,coverage,errors,error_rate" plus one row per region.
std::string render_csv(const RegionReport& report);

// Canonical JSON text: sorted keys, two-space indent, trailing newline.
std::string render_json(const nlohmann::json& json);

struct ReportPaths {
  std::string json;
  std::string csv;
  std::string svg;
  std::string table;
};

// Writes <stem>.json, <stem>.csv, <stem>.svg and the text table into
// out_dir (created if needed). The table file is table.txt for the default
// stem and table<suffix>.txt for stems of the form report<suffix>.
ReportPaths write_report_files(const RegionReport& report, const std::string& out_dir,
                               const std::string& stem = "report", const PlotStyle& style = {});

// Writes `text` to `path` exactly. Throws IoError.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace blindspot
