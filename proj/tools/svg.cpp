#include "svg.hpp"

#include <cstdio>
#include <sstream>

namespace sconvex::cli {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace

SvgScene::SvgScene(Box view, double width_px) : view_(std::move(view)), width_(width_px) {
  if (view_.dim() != 2) throw std::invalid_argument("SVG scenes are planar");
  const Vec ext = view_.extent();
  scale_ = width_ / ext[0];
  height_ = ext[1] * scale_;
}

double SvgScene::sx(double x) const { return (x - view_.lower[0]) * scale_; }
double SvgScene::sy(double y) const { return (view_.upper[1] - y) * scale_; }

void SvgScene::add_rect(const Box& b, const std::string& style) {
  items_.push_back("<rect x=\"" + num(sx(b.lower[0])) + "\" y=\"" + num(sy(b.upper[1])) +
                   "\" width=\"" + num(b.extent()[0] * scale_) + "\" height=\"" +
                   num(b.extent()[1] * scale_) + "\" " + style + "/>");
}

void SvgScene::add_circle(const Vec& center, double radius, const std::string& style) {
  items_.push_back("<circle cx=\"" + num(sx(center[0])) + "\" cy=\"" + num(sy(center[1])) +
                   "\" r=\"" + num(radius * scale_) + "\" " + style + "/>");
}

void SvgScene::add_polyline(const std::vector<Vec>& pts, const std::string& style, bool closed) {
  std::string coords;
  for (const Vec& p : pts) coords += num(sx(p[0])) + "," + num(sy(p[1])) + " ";
  items_.push_back(std::string(closed ? "<polygon" : "<polyline") + " points=\"" + coords +
                   "\" " + style + "/>");
}

void SvgScene::add_points(const std::vector<Vec>& pts, double radius_px, const std::string& style) {
  for (const Vec& p : pts) {
    items_.push_back("<circle cx=\"" + num(sx(p[0])) + "\" cy=\"" + num(sy(p[1])) + "\" r=\"" +
                     num(radius_px) + "\" " + style + "/>");
  }
}

void SvgScene::add_halfplane_line(const Vec& point, const Vec& normal, const std::string& style) {
  Vec dir(2);
  dir << -normal[1], normal[0];
  // Parametric clip of point + s dir against the view box.
  double lo = -kInf;
  double hi = kInf;
  for (int i = 0; i < 2; ++i) {
    if (std::abs(dir[i]) < 1e-15) {
      if (point[i] < view_.lower[i] || point[i] > view_.upper[i]) return;
      continue;
    }
    double a = (view_.lower[i] - point[i]) / dir[i];
    double b = (view_.upper[i] - point[i]) / dir[i];
    if (a > b) std::swap(a, b);
    lo = std::max(lo, a);
    hi = std::min(hi, b);
  }
  if (!(lo < hi)) return;
  const Vec p = point + lo * dir;
  const Vec q = point + hi * dir;
  items_.push_back("<line x1=\"" + num(sx(p[0])) + "\" y1=\"" + num(sy(p[1])) + "\" x2=\"" +
                   num(sx(q[0])) + "\" y2=\"" + num(sy(q[1])) + "\" " + style + "/>");
}

void SvgScene::add_text(const Vec& at, const std::string& text, const std::string& style) {
  items_.push_back("<text x=\"" + num(sx(at[0])) + "\" y=\"" + num(sy(at[1])) + "\" " + style +
                   ">" + text + "</text>");
}

std::string SvgScene::str() const {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(width_)
     << "\" height=\"" << num(height_) << "\" viewBox=\"0 0 " << num(width_) << " "
     << num(height_) << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& item : items_) os << item << "\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace sconvex::cli
