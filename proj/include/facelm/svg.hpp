#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "facelm/dataset.hpp"

namespace facelm {

/// Minimal self-contained SVG 1.1 writer. Every coordinate passed in is
/// clamped to the viewport and printed with two decimals, so output is
/// byte-stable for identical input.
class SvgDocument {
 public:
  SvgDocument(double width, double height);

  double width() const { return width_; }
  double height() const { return height_; }

  void rect(double x, double y, double w, double h, std::string_view attrs);
  void line(double x1, double y1, double x2, double y2, std::string_view attrs);
  void circle(double cx, double cy, double r, std::string_view attrs);
  void polyline(std::span<const Point> pts, std::string_view attrs);
  void path(std::string_view d, std::string_view attrs);
  void text(double x, double y, std::string_view content, std::string_view attrs);
  void raw(std::string element);

  std::string str() const;
  void save(const std::filesystem::path& path) const;

  /// Formats a viewport coordinate (clamped).
  std::string x(double v) const;
  std::string y(double v) const;

 private:
  double width_;
  double height_;
  std::vector<std::string> body_;
};

std::string xml_escape(std::string_view text);

/// Fixed two-decimal formatting used for every number in emitted SVG.
std::string svg_num(double v);

}  // namespace facelm
