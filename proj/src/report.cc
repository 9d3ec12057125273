#include "blindspot/report.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "blindspot/csv.h"
#include "blindspot/error.h"
#include "blindspot/format.h"

namespace blindspot {
namespace {

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string px(double v) { return format_fixed(v, 2); }

}  // namespace

void PlotStyle::validate() const {
  static const std::regex hex("#[0-9a-fA-F]{6}");
  if (width <= 0 || height <= 0 || font_size <= 0 || margin < 0) {
    throw Error(ErrorKind::kInvalidArgument, "plot dimensions must be positive");
  }
  if (max_regions < 1) throw Error(ErrorKind::kInvalidArgument, "max_regions must be at least 1");
  if (!std::regex_match(bar_fill, hex) || !std::regex_match(baseline_color, hex)) {
    throw Error(ErrorKind::kInvalidArgument, "colors must be #rrggbb");
  }
}

std::string render_error_plot_svg(const RegionReport& report, const PlotStyle& style) {
  style.validate();
  const size_t shown = std::min(report.regions.size(), style.max_regions);
  const double font = style.font_size;
  const double char_w = 0.6 * font;

  size_t longest = 0;
  for (size_t i = 0; i < shown; ++i) longest = std::max(longest, report.regions[i].condition.text().size());
  const double label_w = std::min(style.width / 2.0, static_cast<double>(longest) * char_w + font);
  const double rate_w = 6.0 * char_w;
  const double title_h = 2.0 * font;
  const double axis_h = 2.5 * font;

  const double x0 = style.margin + label_w;
  const double plot_w = std::max(1.0, style.width - x0 - style.margin - rate_w);
  const double y0 = style.margin + title_h;
  const double plot_h = std::max(1.0, style.height - y0 - style.margin - axis_h);
  const double slot = plot_h / static_cast<double>(std::max<size_t>(shown, 1));
  const double bar_h = 0.7 * slot;

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << style.width
      << "\" height=\"" << style.height << "\" viewBox=\"0 0 " << style.width << ' ' << style.height
      << "\" font-family=\"sans-serif\" font-size=\"" << style.font_size << "\">\n";
  svg << "<rect class=\"background\" x=\"0\" y=\"0\" width=\"" << style.width << "\" height=\""
      << style.height << "\" fill=\"#ffffff\"/>\n";
  svg << "<text class=\"title\" x=\"" << px(style.width / 2.0) << "\" y=\"" << px(style.margin + font)
      << "\" text-anchor=\"middle\">Error rate by region (" << split_tag_name(report.split)
      << ", n=" << report.n_total << ", baseline " << format_fixed(report.baseline_error_rate, 3)
      << ")</text>\n";

  for (size_t i = 0; i < shown; ++i) {
    const auto& region = report.regions[i];
    const double y = y0 + slot * static_cast<double>(i) + (slot - bar_h) / 2.0;
    const double len = std::clamp(region.error_rate, 0.0, 1.0) * plot_w;
    const double mid = y + bar_h / 2.0 + font / 3.0;
    svg << "<rect class=\"bar\" x=\"" << px(x0) << "\" y=\"" << px(y) << "\" width=\"" << px(len)
        << "\" height=\"" << px(bar_h) << "\" fill=\"" << style.bar_fill << "\"/>\n";
    svg << "<text class=\"label\" x=\"" << px(x0 - font / 2.0) << "\" y=\"" << px(mid)
        << "\" text-anchor=\"end\">" << xml_escape(region.condition.text()) << "</text>\n";
    svg << "<text class=\"value\" x=\"" << px(x0 + len + font / 3.0) << "\" y=\"" << px(mid) << "\">"
        << format_fixed(region.error_rate, 3) << "</text>\n";
  }

  const double axis_y = y0 + plot_h;
  svg << "<line class=\"axis\" x1=\"" << px(x0) << "\" y1=\"" << px(axis_y) << "\" x2=\""
      << px(x0 + plot_w) << "\" y2=\"" << px(axis_y) << "\" stroke=\"#000000\"/>\n";
  svg << "<line class=\"axis\" x1=\"" << px(x0) << "\" y1=\"" << px(y0) << "\" x2=\"" << px(x0)
      << "\" y2=\"" << px(axis_y) << "\" stroke=\"#000000\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double x = x0 + plot_w * t / 4.0;
    svg << "<line class=\"tick\" x1=\"" << px(x) << "\" y1=\"" << px(axis_y) << "\" x2=\"" << px(x)
        << "\" y2=\"" << px(axis_y + font / 3.0) << "\" stroke=\"#000000\"/>\n";
    svg << "<text class=\"tick-label\" x=\"" << px(x) << "\" y=\"" << px(axis_y + 1.3 * font)
        << "\" text-anchor=\"middle\">" << format_fixed(t / 4.0, 2) << "</text>\n";
  }
  svg << "<text class=\"axis-title\" x=\"" << px(x0 + plot_w / 2.0) << "\" y=\""
      << px(axis_y + 2.4 * font) << "\" text-anchor=\"middle\">error rate</text>\n";

  const double base_x = x0 + std::clamp(report.baseline_error_rate, 0.0, 1.0) * plot_w;
  svg << "<line class=\"baseline\" x1=\"" << px(base_x) << "\" y1=\"" << px(y0) << "\" x2=\""
      << px(base_x) << "\" y2=\"" << px(axis_y) << "\" stroke=\"" << style.baseline_color
      << "\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"/>\n";
  svg << "</svg>\n";
  return svg.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIoError, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorKind::kIoError, "write failed for '" + path + "'");
}

void render_error_plot(const RegionReport& report, const PlotStyle& style, const std::string& path) {
  write_text_file(path, render_error_plot_svg(report, style));
}

std::string render_text_table(const RegionReport& report) {
  const std::vector<std::string> header{"condition", "support", "coverage", "errors", "error_rate"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : report.regions) {
    rows.push_back({r.condition.text(), std::to_string(r.support), std::to_string(r.coverage),
                    std::to_string(r.errors_in_region), format_fixed(r.error_rate, 3)});
  }
  std::vector<size_t> widths;
  for (const auto& h : header) widths.push_back(h.size());
  for (const auto& row : rows) {
    for (size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (size_t c = 0; c < cells.size(); ++c) {
      const std::string pad(widths[c] - cells[c].size(), ' ');
      if (c == 0) {
        out += cells[c] + pad;
      } else {
        out += "  " + pad + cells[c];
      }
    }
    return out + "\n";
  };
  std::string text = line(header);
  for (const auto& row : rows) text += line(row);
  return text;
}

std::string render_csv(const RegionReport& report) {
  std::ostringstream out;
  csv::write_record(out, {"condition", "support", "coverage", "errors", "error_rate"});
  for (const auto& r : report.regions) {
    csv::write_record(out, {r.condition.text(), std::to_string(r.support), std::to_string(r.coverage),
                            std::to_string(r.errors_in_region), format_shortest(r.error_rate)});
  }
  return out.str();
}

std::string render_json(const nlohmann::json& json) { return json.dump(2) + "\n"; }

ReportPaths write_report_files(const RegionReport& report, const std::string& out_dir,
                               const std::string& stem, const PlotStyle& style) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::kIoError, "cannot create '" + out_dir + "': " + ec.message());
  const std::filesystem::path dir(out_dir);
  std::string table_stem = "table";
  if (stem.rfind("report", 0) == 0) {
    table_stem += stem.substr(6);
  } else {
    table_stem = stem + "_table";
  }
  ReportPaths paths{(dir / (stem + ".json")).string(), (dir / (stem + ".csv")).string(),
                    (dir / (stem + ".svg")).string(), (dir / (table_stem + ".txt")).string()};
  write_text_file(paths.json, render_json(report.to_json()));
  write_text_file(paths.csv, render_csv(report));
  render_error_plot(report, style, paths.svg);
  write_text_file(paths.table, render_text_table(report));
  return paths;
}

}  // namespace blindspot
