#include "qready/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace qready {

SvgWriter::SvgWriter(double width, double height) : width_(width), height_(height) {}

std::string SvgWriter::num(double v) {
  if (std::abs(v) < 5e-3) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string SvgWriter::escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void SvgWriter::rect(double x, double y, double w, double h, const std::string& fill,
                     const std::string& extra) {
  body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" +
           num(h) + "\" fill=\"" + fill + "\"" + (extra.empty() ? "" : " " + extra) + "/>\n";
}

void SvgWriter::line(double x1, double y1, double x2, double y2, const std::string& stroke,
                     double stroke_width, const std::string& extra) {
  body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" +
           num(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(stroke_width) + "\"" +
           (extra.empty() ? "" : " " + extra) + "/>\n";
}

void SvgWriter::circle(double cx, double cy, double r, const std::string& fill) {
  body_ += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) + "\" fill=\"" +
           fill + "\"/>\n";
}

void SvgWriter::triangle(double cx, double cy, double size, bool up, const std::string& fill) {
  const double h = size * 0.866;
  const double tip = up ? cy - h / 2 : cy + h / 2;
  const double base = up ? cy + h / 2 : cy - h / 2;
  body_ += "<polygon points=\"" + num(cx) + "," + num(tip) + " " + num(cx - size / 2) + "," +
           num(base) + " " + num(cx + size / 2) + "," + num(base) + "\" fill=\"" + fill + "\"/>\n";
}

void SvgWriter::text(double x, double y, const std::string& s, double size,
                     const std::string& anchor, const std::string& extra) {
  body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + num(size) +
           "\" font-family=\"sans-serif\" text-anchor=\"" + anchor + "\"" +
           (extra.empty() ? "" : " " + extra) + ">" + escape(s) + "</text>\n";
}

void SvgWriter::raw(const std::string& s) { body_ += s; }

std::string SvgWriter::finish() const {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width_) + "\" height=\"" +
         num(height_) + "\" viewBox=\"0 0 " + num(width_) + " " + num(height_) + "\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + body_ + "</svg>\n";
}

std::string heat_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  // dark blue -> yellow -> dark red
  struct Stop {
    double t, r, g, b;
  };
  static constexpr Stop stops[] = {
      {0.0, 8, 29, 88}, {0.35, 65, 182, 196}, {0.65, 254, 224, 139}, {1.0, 165, 0, 38}};
  std::size_t i = 0;
  while (i + 2 < std::size(stops) && t > stops[i + 1].t) ++i;
  const Stop& a = stops[i];
  const Stop& b = stops[i + 1];
  const double u = (t - a.t) / (b.t - a.t);
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(a.r + u * (b.r - a.r))),
                static_cast<int>(std::lround(a.g + u * (b.g - a.g))),
                static_cast<int>(std::lround(a.b + u * (b.b - a.b))));
  return buf;
}

}  // namespace qready
