#include "facelm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

namespace facelm {

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error("quantile of an empty sample");
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Quartiles quartiles(std::span<const double> values) {
  if (values.empty()) throw Error("quartiles of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return {quantile_sorted(sorted, 0.25), quantile_sorted(sorted, 0.5),
          quantile_sorted(sorted, 0.75)};
}

BoxplotSummary boxplot_summary(std::span<const double> values) {
  if (values.empty()) throw Error("boxplot of an empty sample");
  const auto q = quartiles(values);
  BoxplotSummary s;
  s.q1 = q.q1;
  s.median = q.median;
  s.q3 = q.q3;
  s.iqr = q.q3 - q.q1;
  s.lower_fence = q.q1 - kFenceMultiplier * s.iqr;
  s.upper_fence = q.q3 + kFenceMultiplier * s.iqr;
  s.whisker_low = std::numeric_limits<double>::infinity();
  s.whisker_high = -std::numeric_limits<double>::infinity();
  for (double v : values) {
    if (v < s.lower_fence || v > s.upper_fence) {
      s.outliers.push_back(v);
      continue;
    }
    s.whisker_low = std::min(s.whisker_low, v);
    s.whisker_high = std::max(s.whisker_high, v);
  }
  return s;
}

std::string_view zone_name(Zone zone) {
  switch (zone) {
    case Zone::WithinQuartiles: return "within_quartiles";
    case Zone::WithinWhiskers: return "within_whiskers";
    case Zone::Outlier: return "outlier";
  }
  return "unknown";
}

Zone classify_zone(Point p, const BoxplotSummary& sx, const BoxplotSummary& sy) {
  const bool x_out = p.x < sx.lower_fence || p.x > sx.upper_fence;
  const bool y_out = p.y < sy.lower_fence || p.y > sy.upper_fence;
  if (x_out || y_out) return Zone::Outlier;
  const bool x_box = p.x >= sx.q1 && p.x <= sx.q3;
  const bool y_box = p.y >= sy.q1 && p.y <= sy.q3;
  return x_box && y_box ? Zone::WithinQuartiles : Zone::WithinWhiskers;
}

std::vector<LandmarkPosition> collect_landmark_positions(const CuratedDataset& dataset,
                                                         Emotion emotion, FeatureMode mode) {
  std::vector<LandmarkPosition> out;
  std::size_t sample = 0;
  for (const auto& rec : dataset.records) {
    if (rec.emotion != emotion) continue;
    const auto fv = make_features(rec, mode);
    for (std::size_t l = 0; l < kNumLandmarks; ++l) {
      out.push_back({sample, l, fv.values[l], fv.values[kNumLandmarks + l]});
    }
    ++sample;
  }
  return out;
}

Zone classify_position(const LandmarkStatsTable& table, const LandmarkPosition& pos) {
  const auto& s = table.per_landmark.at(pos.landmark);
  return classify_zone({pos.x, pos.y}, s.x, s.y);
}

LandmarkStatsTable emotion_landmark_stats(const CuratedDataset& dataset, Emotion emotion,
                                          FeatureMode mode) {
  const auto positions = collect_landmark_positions(dataset, emotion, mode);
  const std::size_t samples = positions.size() / kNumLandmarks;
  if (samples < 2) {
    throw Error("emotion '" + std::string(emotion_name(emotion)) + "' has " +
                std::to_string(samples) + " sample(s); at least 2 are required");
  }

  LandmarkStatsTable table;
  table.emotion = emotion;
  table.mode = mode;
  table.sample_count = samples;
  table.total_points = positions.size();
  table.per_landmark.resize(kNumLandmarks);

  std::vector<double> xs(samples), ys(samples);
  for (std::size_t l = 0; l < kNumLandmarks; ++l) {
    for (std::size_t s = 0; s < samples; ++s) {
      const auto& pos = positions[s * kNumLandmarks + l];
      xs[s] = pos.x;
      ys[s] = pos.y;
    }
    table.per_landmark[l] = {boxplot_summary(xs), boxplot_summary(ys)};
  }

  for (const auto& pos : positions) {
    table.zone_counts[static_cast<std::size_t>(classify_position(table, pos))]++;
  }
  for (std::size_t z = 0; z < 3; ++z) {
    table.zone_percentages[z] =
        100.0 * static_cast<double>(table.zone_counts[z]) / static_cast<double>(table.total_points);
  }
  return table;
}

std::string_view policy_name(OutlierPolicy policy) {
  switch (policy) {
    case OutlierPolicy::None: return "none";
    case OutlierPolicy::Winsorize: return "winsorize";
    case OutlierPolicy::Drop: return "drop";
  }
  return "unknown";
}

OutlierPolicy parse_policy(std::string_view text) {
  if (text == "none") return OutlierPolicy::None;
  if (text == "winsorize") return OutlierPolicy::Winsorize;
  if (text == "drop") return OutlierPolicy::Drop;
  throw Error("unknown outlier policy '" + std::string(text) + "'");
}

ColumnFences column_fences(const Matrix& X) {
  if (X.rows() == 0) throw Error("column fences of an empty matrix");
  ColumnFences f;
  f.lower.resize(X.cols());
  f.upper.resize(X.cols());
  std::vector<double> col(X.rows());
  for (std::size_t j = 0; j < X.cols(); ++j) {
    for (std::size_t i = 0; i < X.rows(); ++i) col[i] = X(i, j);
    const auto q = quartiles(col);
    const double iqr = q.q3 - q.q1;
    f.lower[j] = q.q1 - kFenceMultiplier * iqr;
    f.upper[j] = q.q3 + kFenceMultiplier * iqr;
  }
  return f;
}

Matrix winsorize(const Matrix& X, const ColumnFences& fences) {
  Matrix out = X;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = 0; j < out.cols(); ++j) {
      out(i, j) = std::clamp(out(i, j), fences.lower[j], fences.upper[j]);
    }
  }
  return out;
}

OutlierResult handle_outliers(const Matrix& X, std::span<const int> labels, OutlierPolicy policy) {
  OutlierResult res;
  res.labels.assign(labels.begin(), labels.end());
  if (policy == OutlierPolicy::None) {
    res.X = X;
    return res;
  }
  const auto fences = column_fences(X);
  if (policy == OutlierPolicy::Winsorize) {
    res.X = winsorize(X, fences);
    return res;
  }

  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    bool outlier = false;
    for (std::size_t j = 0; j < X.cols() && !outlier; ++j) {
      outlier = X(i, j) < fences.lower[j] || X(i, j) > fences.upper[j];
    }
    (outlier ? res.removed : keep).push_back(i);
  }
  if (!labels.empty()) {
    const std::set<int> before(labels.begin(), labels.end());
    std::set<int> after;
    for (auto i : keep) after.insert(labels[i]);
    for (int c : before) {
      if (!after.contains(c)) {
        throw Error("outlier removal would eliminate every sample of class '" +
                    std::string(emotion_name(emotion_from_index(c))) + "'");
      }
    }
    res.labels.clear();
    for (auto i : keep) res.labels.push_back(labels[i]);
  }
  res.X = X.select_rows(keep);
  return res;
}

nlohmann::json to_json(const BoxplotSummary& s) {
  return {{"q1", s.q1},
          {"median", s.median},
          {"q3", s.q3},
          {"iqr", s.iqr},
          {"lower_fence", s.lower_fence},
          {"upper_fence", s.upper_fence},
          {"whisker_low", s.whisker_low},
          {"whisker_high", s.whisker_high},
          {"outliers", s.outliers}};
}

nlohmann::json to_json(const LandmarkStatsTable& t) {
  nlohmann::json landmarks = nlohmann::json::array();
  for (std::size_t l = 0; l < t.per_landmark.size(); ++l) {
    landmarks.push_back(
        {{"landmark", l}, {"x", to_json(t.per_landmark[l].x)}, {"y", to_json(t.per_landmark[l].y)}});
  }
  return {{"emotion", emotion_name(t.emotion)},
          {"mode", mode_name(t.mode)},
          {"samples", t.sample_count},
          {"total_points", t.total_points},
          {"in_quartiles_pct", t.zone_percentages[0]},
          {"in_whiskers_pct", t.zone_percentages[1]},
          {"outlier_pct", t.zone_percentages[2]},
          {"landmarks", landmarks}};
}

void write_stats_csv(std::span<const LandmarkStatsTable> tables, std::ostream& out) {
  out << "emotion,mode,landmark,axis,q1,median,q3,iqr,lower_fence,upper_fence,whisker_low,"
         "whisker_high,outlier_count\n";
  for (const auto& t : tables) {
    for (std::size_t l = 0; l < t.per_landmark.size(); ++l) {
      for (int axis = 0; axis < 2; ++axis) {
        const auto& s = axis == 0 ? t.per_landmark[l].x : t.per_landmark[l].y;
        out << emotion_name(t.emotion) << ',' << mode_name(t.mode) << ',' << l << ','
            << (axis == 0 ? 'x' : 'y') << ',' << format_decimal(s.q1) << ','
            << format_decimal(s.median) << ',' << format_decimal(s.q3) << ','
            << format_decimal(s.iqr) << ',' << format_decimal(s.lower_fence) << ','
            << format_decimal(s.upper_fence) << ',' << format_decimal(s.whisker_low) << ','
            << format_decimal(s.whisker_high) << ',' << s.outliers.size() << '\n';
      }
    }
  }
}

}  // namespace facelm
