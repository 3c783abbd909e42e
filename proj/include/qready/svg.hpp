#pragma once

#include <string>

namespace qready {

/// Minimal append-only SVG builder. Coordinates are printed with fixed
/// precision so output is byte-stable across runs.
class SvgWriter {
 public:
  SvgWriter(double width, double height);

  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& extra = {});
  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double stroke_width = 1.0, const std::string& extra = {});
  void circle(double cx, double cy, double r, const std::string& fill);
  /// Triangle centred on (cx, cy); up = apex at the top.
  void triangle(double cx, double cy, double size, bool up, const std::string& fill);
  void text(double x, double y, const std::string& s, double size = 11.0,
            const std::string& anchor = "start", const std::string& extra = {});
  void raw(const std::string& s);

  std::string finish() const;

  static std::string num(double v);
  static std::string escape(const std::string& s);

 private:
  double width_;
  double height_;
  std::string body_;
};

/// Linear interpolation through a blue-white-red style ramp, t in [0, 1].
std::string heat_color(double t);

}  // namespace qready
