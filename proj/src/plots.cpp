#include "facelm/plots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

namespace facelm {

namespace {

constexpr std::string_view kFont = R"(font-family="sans-serif")";

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  double px_lo = 0.0;
  double px_hi = 1.0;

  double map(double v) const { return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo); }
};

std::string capitalize(std::string_view s) {
  std::string out(s);
  if (!out.empty()) out[0] = static_cast<char>(out[0] - 'a' + 'A');
  return out;
}

void draw_frame(SvgDocument& svg, const Axis& ax, const Axis& ay, int ticks) {
  svg.rect(ax.px_lo, std::min(ay.px_lo, ay.px_hi), ax.px_hi - ax.px_lo,
           std::abs(ay.px_hi - ay.px_lo), R"(fill="none" stroke="#333333" stroke-width="1")");
  for (int i = 0; i <= ticks; ++i) {
    const double t = static_cast<double>(i) / ticks;
    const double vx = ax.lo + t * (ax.hi - ax.lo);
    const double vy = ay.lo + t * (ay.hi - ay.lo);
    const double px = ax.map(vx);
    const double py = ay.map(vy);
    const double base_y = std::max(ay.px_lo, ay.px_hi);
    svg.line(px, base_y, px, base_y + 4, R"(stroke="#333333")");
    svg.text(px, base_y + 16, fmt::format("{:.2f}", vx),
             fmt::format(R"({} font-size="10" text-anchor="middle")", kFont));
    svg.line(ax.px_lo - 4, py, ax.px_lo, py, R"(stroke="#333333")");
    svg.text(ax.px_lo - 6, py + 3, fmt::format("{:.2f}", vy),
             fmt::format(R"({} font-size="10" text-anchor="end")", kFont));
  }
}

void zone_mark(SvgDocument& svg, Zone zone, double px, double py, std::string_view extra) {
  switch (zone) {
    case Zone::WithinQuartiles:
      svg.circle(px, py, 1.6,
                 fmt::format(R"(class="{}" fill="#1f77b4" stroke="none"{})", kMarkQuartileClass,
                             extra));
      break;
    case Zone::WithinWhiskers:
      svg.circle(px, py, 2.2,
                 fmt::format(R"(class="{}" fill="none" stroke="#2ca02c" stroke-width="0.8"{})",
                             kMarkWhiskerClass, extra));
      break;
    case Zone::Outlier: {
      const double r = 3.0;
      const auto d = fmt::format("M{} {} L{} {} M{} {} L{} {}", svg.x(px - r), svg.y(py - r),
                                 svg.x(px + r), svg.y(py + r), svg.x(px - r), svg.y(py + r),
                                 svg.x(px + r), svg.y(py - r));
      svg.path(d, fmt::format(R"(class="{}" fill="none" stroke="#d62728" stroke-width="1.2"{})",
                              kMarkOutlierClass, extra));
      break;
    }
  }
}

std::pair<double, double> padded_range(double lo, double hi) {
  if (!(hi > lo)) {
    const double c = std::isfinite(lo) ? lo : 0.0;
    return {c - 0.05, c + 0.05};
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace

std::string boxplot_file_name(Emotion emotion, FeatureMode mode) {
  return fmt::format("{}_{}_boxplot.svg", emotion_name(emotion), mode_name(mode));
}

SvgDocument render_landmark_boxplot(const LandmarkStatsTable& table,
                                    std::span<const LandmarkPosition> points) {
  if (points.empty()) throw Error("landmark boxplot needs at least one point");

  constexpr double kPlot = 520.0;
  constexpr double kLeft = 60.0, kTop = 50.0, kLegend = 200.0;
  SvgDocument svg(kLeft + kPlot + kLegend, kTop + kPlot + 50.0);

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& p : points) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  if (table.mode == FeatureMode::Absolute) {
    xmin = std::min(xmin, 0.0);
    ymin = std::min(ymin, 0.0);
    xmax = std::max(xmax, 1.0);
    ymax = std::max(ymax, 1.0);
  }
  const auto [x_lo, x_hi] = padded_range(xmin, xmax);
  const auto [y_lo, y_hi] = padded_range(ymin, ymax);
  // Image convention: y grows downward, so the face reads upright.
  const Axis ax{x_lo, x_hi, kLeft, kLeft + kPlot};
  const Axis ay{y_lo, y_hi, kTop, kTop + kPlot};

  svg.rect(0, 0, svg.width(), svg.height(), R"(fill="#ffffff")");
  svg.text(kLeft + kPlot / 2, 28,
           fmt::format("{} facial landmark boxplot ({})", capitalize(emotion_name(table.emotion)),
                       mode_name(table.mode)),
           fmt::format(R"({} font-size="16" text-anchor="middle")", kFont));
  draw_frame(svg, ax, ay, 4);

  for (const auto& p : points) {
    const Zone zone = classify_position(table, p);
    zone_mark(svg, zone, ax.map(p.x), ay.map(p.y),
              fmt::format(R"( data-sample="{}" data-landmark="{}")", p.sample, p.landmark));
  }

  const double lx = kLeft + kPlot + 20;
  const std::array<std::string_view, 3> labels = {"Within quartiles", "Within whiskers",
                                                  "Outlier"};
  const std::array<std::string_view, 3> legend_classes = {"legend legend-quartile",
                                                          "legend legend-whisker",
                                                          "legend legend-outlier"};
  svg.text(lx, kTop + 10, "Zones", fmt::format(R"({} font-size="12" font-weight="bold")", kFont));
  for (std::size_t z = 0; z < 3; ++z) {
    const double ly = kTop + 32 + 22.0 * static_cast<double>(z);
    svg.raw(fmt::format(R"(<g class="{}">)", legend_classes[z]));
    switch (static_cast<Zone>(z)) {
      case Zone::WithinQuartiles:
        svg.circle(lx + 5, ly - 4, 3, R"(fill="#1f77b4" stroke="none")");
        break;
      case Zone::WithinWhiskers:
        svg.circle(lx + 5, ly - 4, 3.5, R"(fill="none" stroke="#2ca02c" stroke-width="0.8")");
        break;
      case Zone::Outlier:
        svg.path(fmt::format("M{} {} L{} {} M{} {} L{} {}", svg.x(lx + 1), svg.y(ly - 8),
                             svg.x(lx + 9), svg.y(ly), svg.x(lx + 1), svg.y(ly), svg.x(lx + 9),
                             svg.y(ly - 8)),
                 R"(fill="none" stroke="#d62728" stroke-width="1.2")");
        break;
    }
    svg.text(lx + 16, ly,
             fmt::format("{} ({:.2f}%)", labels[z], table.zone_percentages[z]),
             fmt::format(R"({} font-size="11")", kFont));
    svg.raw("</g>");
  }
  svg.text(lx, kTop + 112, fmt::format("Points: {}", table.total_points),
           fmt::format(R"({} font-size="11")", kFont));
  svg.text(lx, kTop + 128, fmt::format("Samples: {}", table.sample_count),
           fmt::format(R"({} font-size="11")", kFont));
  return svg;
}

SvgDocument render_distribution(const DistributionSummary& summary, DistributionChart kind) {
  if (summary.total == 0) throw Error("class distribution chart needs a non-empty summary");
  static constexpr std::array<std::string_view, kNumEmotions> kColors = {
      "#d62728", "#9467bd", "#8c564b", "#7f7f7f", "#ff7f0e", "#1f77b4", "#2ca02c"};

  SvgDocument svg(640, 420);
  svg.rect(0, 0, svg.width(), svg.height(), R"(fill="#ffffff")");
  svg.text(320, 28, "Class distribution",
           fmt::format(R"({} font-size="16" text-anchor="middle")", kFont));

  if (kind == DistributionChart::Bar) {
    const double left = 60, top = 50, plot_w = 540, plot_h = 300;
    double max_pct = 0.0;
    for (double p : summary.percentages) max_pct = std::max(max_pct, p);
    const double scale_top = std::max(max_pct, 1.0);
    svg.line(left, top + plot_h, left + plot_w, top + plot_h, R"(stroke="#333333")");
    const double slot = plot_w / static_cast<double>(kNumEmotions);
    for (std::size_t i = 0; i < kNumEmotions; ++i) {
      const double h = summary.percentages[i] / scale_top * (plot_h - 20);
      const double x0 = left + slot * static_cast<double>(i) + slot * 0.15;
      const auto name = emotion_name(static_cast<Emotion>(i));
      svg.rect(x0, top + plot_h - h, slot * 0.7, h,
               fmt::format(R"(class="bar" data-emotion="{}" fill="{}")", name, kColors[i]));
      svg.text(x0 + slot * 0.35, top + plot_h - h - 4,
               fmt::format("{:.1f}%", summary.percentages[i]),
               fmt::format(R"({} font-size="11" text-anchor="middle")", kFont));
      svg.text(x0 + slot * 0.35, top + plot_h + 16, name,
               fmt::format(R"({} font-size="11" text-anchor="middle")", kFont));
    }
    return svg;
  }

  const double cx = 220, cy = 220, r = 150;
  std::size_t nonzero = 0;
  for (auto c : summary.counts) nonzero += c > 0 ? 1 : 0;

  double start = 0.0;  // degrees, clockwise from 12 o'clock
  double legend_y = 80;
  for (std::size_t i = 0; i < kNumEmotions; ++i) {
    const auto count = summary.counts[i];
    const auto name = emotion_name(static_cast<Emotion>(i));
    const std::string label = fmt::format("{:.1f}%", summary.percentages[i]);
    svg.rect(420, legend_y - 10, 12, 12, fmt::format(R"(fill="{}")", kColors[i]));
    svg.text(440, legend_y, fmt::format("{} {} ({})", name, label, count),
             fmt::format(R"({} font-size="12")", kFont));
    legend_y += 20;
    if (count == 0) continue;

    const double sweep = 360.0 * static_cast<double>(count) / static_cast<double>(summary.total);
    const std::string attrs =
        fmt::format(R"(class="wedge" data-emotion="{}" data-deg="{}" fill="{}" stroke="#ffffff")",
                    name, svg_num(sweep), kColors[i]);
    if (nonzero == 1) {
      svg.circle(cx, cy, r, attrs);
    } else {
      auto at = [&](double deg) {
        const double rad = deg * std::numbers::pi / 180.0;
        return Point{cx + r * std::sin(rad), cy - r * std::cos(rad)};
      };
      const Point a = at(start);
      const Point b = at(start + sweep);
      svg.path(fmt::format("M{} {} L{} {} A{} {} 0 {} 1 {} {} Z", svg_num(cx), svg_num(cy),
                           svg.x(a.x), svg.y(a.y), svg_num(r), svg_num(r), sweep > 180.0 ? 1 : 0,
                           svg.x(b.x), svg.y(b.y)),
               attrs);
    }
    const double mid = (start + sweep / 2.0) * std::numbers::pi / 180.0;
    svg.text(cx + 0.65 * r * std::sin(mid), cy - 0.65 * r * std::cos(mid) + 4, label,
             fmt::format(R"(class="wedge-label" data-emotion="{}" {} font-size="12" text-anchor="middle")",
                         name, kFont));
    start += sweep;
  }
  return svg;
}

SvgDocument render_learning_curves(const nn::TrainingHistory& history, std::string_view title) {
  if (history.empty()) throw Error("learning curves need at least one epoch");

  constexpr double kPanelW = 380, kPanelH = 260, kLeft = 60, kTop = 60, kGap = 80;
  SvgDocument svg(kLeft + 2 * kPanelW + kGap + 30, kTop + kPanelH + 60);
  svg.rect(0, 0, svg.width(), svg.height(), R"(fill="#ffffff")");
  svg.text(svg.width() / 2, 28, title,
           fmt::format(R"({} font-size="16" text-anchor="middle")", kFont));

  const auto n = history.size();
  for (int panel = 0; panel < 2; ++panel) {
    const bool loss = panel == 0;
    auto train_of = [&](const nn::EpochRecord& e) { return loss ? e.train_loss : e.train_accuracy; };
    auto test_of = [&](const nn::EpochRecord& e) { return loss ? e.test_loss : e.test_accuracy; };

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& e : history.epochs) {
      for (double v : {train_of(e), test_of(e)}) {
        if (!std::isfinite(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    if (!loss) {
      lo = 0.0;
      hi = 1.0;
    }
    const auto [y_lo, y_hi] = padded_range(lo, hi);
    const double x0 = kLeft + panel * (kPanelW + kGap);
    const Axis ax{1.0, std::max<double>(2.0, static_cast<double>(n)), x0, x0 + kPanelW};
    // Screen y grows downward; larger values sit higher.
    const Axis ay{y_lo, y_hi, kTop + kPanelH, kTop};
    draw_frame(svg, ax, ay, 4);
    svg.text(x0 + kPanelW / 2, kTop + kPanelH + 38, "epoch",
             fmt::format(R"({} font-size="12" text-anchor="middle")", kFont));
    svg.text(x0 + kPanelW / 2, kTop - 10, loss ? "loss" : "accuracy",
             fmt::format(R"({} font-size="13" text-anchor="middle")", kFont));

    for (int series = 0; series < 2; ++series) {
      const bool train = series == 0;
      std::vector<Point> pts;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = train ? train_of(history.epochs[i]) : test_of(history.epochs[i]);
        if (!std::isfinite(v)) continue;
        pts.push_back({ax.map(static_cast<double>(i + 1)), ay.map(v)});
      }
      if (pts.empty()) continue;
      const std::string_view color = train ? "#1f77b4" : "#ff7f0e";
      const std::string_view cls = train ? "curve-train" : "curve-test";
      if (pts.size() == 1) {
        svg.circle(pts[0].x, pts[0].y, 3,
                   fmt::format(R"(class="{} curve-marker" fill="{}")", cls, color));
      } else {
        svg.polyline(pts, fmt::format(R"(class="{}" fill="none" stroke="{}" stroke-width="1.5")",
                                      cls, color));
      }
    }
    const double lx = x0 + kPanelW - 90;
    svg.line(lx, kTop + 14, lx + 16, kTop + 14, R"(stroke="#1f77b4" stroke-width="2")");
    svg.text(lx + 20, kTop + 18, "train", fmt::format(R"({} font-size="11")", kFont));
    svg.line(lx, kTop + 30, lx + 16, kTop + 30, R"(stroke="#ff7f0e" stroke-width="2")");
    svg.text(lx + 20, kTop + 34, "test", fmt::format(R"({} font-size="11")", kFont));
  }
  return svg;
}

}  // namespace facelm
