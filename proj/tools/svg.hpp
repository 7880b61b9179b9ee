#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace vegspot::svg {

struct Series {
  std::vector<double> x, y;
  std::string color = "#1f77b4";
  std::string label;
  bool markers = false;
};

// Line/scatter chart with linear axes and tick labels.
struct Chart {
  std::string title, xlabel, ylabel;
  std::vector<Series> series;
  bool zeroLine = false;
  void write(const std::filesystem::path& path) const;
};

// Cell raster: value[j][i] indexes into palette, rows bottom to top.
struct Raster {
  std::string title, xlabel, ylabel;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  std::vector<std::vector<int>> value;
  std::vector<std::string> palette;
  std::vector<std::string> legend;  // one entry per palette colour
  void write(const std::filesystem::path& path) const;
};

}  // namespace vegspot::svg
