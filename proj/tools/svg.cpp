#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "vegspot/errors.hpp"

namespace vegspot::svg {

namespace {

constexpr double W = 640, H = 420, ML = 70, MR = 20, MT = 36, MB = 50;

std::string num(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.2f", x);
  return b;
}

std::string tick(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.4g", x);
  return b;
}

std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

std::ofstream open(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw Error("IOError", "cannot write " + p.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return out;
}

void frame(std::ofstream& out, const std::string& title, const std::string& xl, const std::string& yl,
           double x0, double x1, double y0, double y1) {
  auto X = [&](double x) { return ML + (x - x0) / (x1 - x0) * (W - ML - MR); };
  auto Y = [&](double y) { return H - MB - (y - y0) / (y1 - y0) * (H - MT - MB); };
  out << "<rect x=\"" << ML << "\" y=\"" << MT << "\" width=\"" << W - ML - MR << "\" height=\""
      << H - MT - MB << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double xv = x0 + (x1 - x0) * k / 5, yv = y0 + (y1 - y0) * k / 5;
    out << "<text x=\"" << num(X(xv)) << "\" y=\"" << num(H - MB + 16) << "\" text-anchor=\"middle\">"
        << tick(xv) << "</text>\n";
    out << "<text x=\"" << num(ML - 6) << "\" y=\"" << num(Y(yv) + 4) << "\" text-anchor=\"end\">"
        << tick(yv) << "</text>\n";
  }
  out << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << esc(title)
      << "</text>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << esc(xl)
      << "</text>\n";
  out << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << H / 2
      << ")\">" << esc(yl) << "</text>\n";
}

}  // namespace

void Chart::write(const std::filesystem::path& path) const {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      x0 = std::min(x0, s.x[k]);
      x1 = std::max(x1, s.x[k]);
      y0 = std::min(y0, s.y[k]);
      y1 = std::max(y1, s.y[k]);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (zeroLine) y0 = std::min(y0, 0.0), y1 = std::max(y1, 0.0);
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto out = open(path);
  frame(out, title, xlabel, ylabel, x0, x1, y0, y1);
  auto X = [&](double x) { return ML + (x - x0) / (x1 - x0) * (W - ML - MR); };
  auto Y = [&](double y) { return H - MB - (y - y0) / (y1 - y0) * (H - MT - MB); };
  if (zeroLine)
    out << "<line x1=\"" << ML << "\" x2=\"" << W - MR << "\" y1=\"" << num(Y(0)) << "\" y2=\"" << num(Y(0))
        << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  int legendRow = 0;
  for (const auto& s : series) {
    if (s.markers) {
      for (std::size_t k = 0; k < s.x.size(); ++k)
        if (std::isfinite(s.x[k]) && std::isfinite(s.y[k]))
          out << "<circle cx=\"" << num(X(s.x[k])) << "\" cy=\"" << num(Y(s.y[k])) << "\" r=\"3\" fill=\""
              << s.color << "\"/>\n";
    } else {
      out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t k = 0; k < s.x.size(); ++k)
        if (std::isfinite(s.x[k]) && std::isfinite(s.y[k]))
          out << num(X(s.x[k])) << ',' << num(Y(s.y[k])) << ' ';
      out << "\"/>\n";
    }
    if (!s.label.empty()) {
      const double ly = MT + 16 + 16 * legendRow++;
      out << "<rect x=\"" << W - MR - 120 << "\" y=\"" << ly - 9 << "\" width=\"10\" height=\"10\" fill=\""
          << s.color << "\"/>\n<text x=\"" << W - MR - 105 << "\" y=\"" << ly << "\">" << esc(s.label)
          << "</text>\n";
    }
  }
  out << "</svg>\n";
}

void Raster::write(const std::filesystem::path& path) const {
  auto out = open(path);
  frame(out, title, xlabel, ylabel, x0, x1, y0, y1);
  const std::size_t ny = value.size(), nx = ny ? value[0].size() : 0;
  const double cw = (W - ML - MR) / std::max<std::size_t>(nx, 1), ch = (H - MT - MB) / std::max<std::size_t>(ny, 1);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const int v = value[j][i];
      if (v < 0 || v >= static_cast<int>(palette.size())) continue;
      out << "<rect x=\"" << num(ML + i * cw) << "\" y=\"" << num(H - MB - (j + 1) * ch) << "\" width=\""
          << num(cw + 0.3) << "\" height=\"" << num(ch + 0.3) << "\" fill=\"" << palette[v] << "\"/>\n";
    }
  for (std::size_t k = 0; k < legend.size() && k < palette.size(); ++k) {
    const double ly = MT + 16 + 16 * k;
    out << "<rect x=\"" << W - MR - 120 << "\" y=\"" << ly - 9 << "\" width=\"10\" height=\"10\" fill=\""
        << palette[k] << "\" stroke=\"black\"/>\n<text x=\"" << W - MR - 105 << "\" y=\"" << ly << "\">"
        << esc(legend[k]) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace vegspot::svg
