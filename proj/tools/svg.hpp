#pragma once

// Flat SVG 1.1 scenes for planar results: circles, polylines, points,
// rectangles and half-plane boundary lines clipped to the view.

#include <sconvex/core.hpp>

#include <string>
#include <vector>

namespace sconvex::cli {

class SvgScene {
 public:
  explicit SvgScene(Box view, double width_px = 640.0);

  void add_rect(const Box& b, const std::string& style);
  void add_circle(const Vec& center, double radius, const std::string& style);
  void add_polyline(const std::vector<Vec>& pts, const std::string& style, bool closed);
  void add_points(const std::vector<Vec>& pts, double radius_px, const std::string& style);
  // The line {z : <normal, z - point> = 0}, clipped to the view box.
  void add_halfplane_line(const Vec& point, const Vec& normal, const std::string& style);
  void add_text(const Vec& at, const std::string& text, const std::string& style);

  std::string str() const;

 private:
  double sx(double x) const;
  double sy(double y) const;

  Box view_;
  double width_;
  double height_;
  double scale_;
  std::vector<std::string> items_;
};

}  // namespace sconvex::cli
