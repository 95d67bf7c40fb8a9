#pragma once

#include <map>
#include <string>
#include <vector>

namespace scaffold {

struct Series {
  std::string label;
  std::string color;  // any SVG color string
  std::vector<double> xs;
  std::vector<double> ys;
};

// Minimal deterministic line chart: axes, ticks, legend, one polyline per
// series. No external plotting dependency; output is plain SVG 1.1.
void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series);

// Rows of a comma-separated file as column-name -> cell text. Cells may be
// empty; no quoting (none of the artifact's writers emit quoted cells).
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::map<std::string, std::string>> rows;
};

CsvTable read_csv(const std::string& path);

}  // namespace scaffold
