#include "facelm/svg.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>

namespace facelm {

std::string svg_num(double v) {
  auto s = fmt::format("{:.2f}", v);
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
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

SvgDocument::SvgDocument(double width, double height) : width_(width), height_(height) {}

std::string SvgDocument::x(double v) const { return svg_num(std::clamp(v, 0.0, width_)); }
std::string SvgDocument::y(double v) const { return svg_num(std::clamp(v, 0.0, height_)); }

void SvgDocument::rect(double x0, double y0, double w, double h, std::string_view attrs) {
  const double x1 = std::clamp(x0 + w, 0.0, width_);
  const double y1 = std::clamp(y0 + h, 0.0, height_);
  x0 = std::clamp(x0, 0.0, width_);
  y0 = std::clamp(y0, 0.0, height_);
  body_.push_back(fmt::format(R"(<rect x="{}" y="{}" width="{}" height="{}" {}/>)", svg_num(x0),
                              svg_num(y0), svg_num(x1 - x0), svg_num(y1 - y0), attrs));
}

void SvgDocument::line(double x1, double y1, double x2, double y2, std::string_view attrs) {
  body_.push_back(fmt::format(R"(<line x1="{}" y1="{}" x2="{}" y2="{}" {}/>)", x(x1), y(y1),
                              x(x2), y(y2), attrs));
}

void SvgDocument::circle(double cx, double cy, double r, std::string_view attrs) {
  body_.push_back(
      fmt::format(R"(<circle cx="{}" cy="{}" r="{}" {}/>)", x(cx), y(cy), svg_num(r), attrs));
}

void SvgDocument::polyline(std::span<const Point> pts, std::string_view attrs) {
  std::string points;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i > 0) points += ' ';
    points += x(pts[i].x) + ',' + y(pts[i].y);
  }
  body_.push_back(fmt::format(R"(<polyline points="{}" {}/>)", points, attrs));
}

void SvgDocument::path(std::string_view d, std::string_view attrs) {
  body_.push_back(fmt::format(R"(<path d="{}" {}/>)", d, attrs));
}

void SvgDocument::text(double tx, double ty, std::string_view content, std::string_view attrs) {
  body_.push_back(fmt::format(R"(<text x="{}" y="{}" {}>{}</text>)", x(tx), y(ty), attrs,
                              xml_escape(content)));
}

void SvgDocument::raw(std::string element) { body_.push_back(std::move(element)); }

std::string SvgDocument::str() const {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += fmt::format(
      R"(<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{0}" height="{1}" viewBox="0 0 {0} {1}">)",
      svg_num(width_), svg_num(height_));
  out += '\n';
  for (const auto& e : body_) {
    out += "  ";
    out += e;
    out += '\n';
  }
  out += "</svg>\n";
  return out;
}

void SvgDocument::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << str();
}

}  // namespace facelm
