#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "facelm/dataset.hpp"
#include "facelm/features.hpp"
#include "facelm/matrix.hpp"

namespace facelm {

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

/// Quantile p of an ascending-sorted, non-empty sample, by linear
/// interpolation at fractional rank h = p * (n - 1).
double quantile_sorted(std::span<const double> sorted, double p);

/// Throws Error on empty input.
Quartiles quartiles(std::span<const double> values);

inline constexpr double kFenceMultiplier = 1.5;

struct BoxplotSummary {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
  double lower_fence = 0.0;
  double upper_fence = 0.0;
  double whisker_low = 0.0;   // smallest datum >= lower_fence
  double whisker_high = 0.0;  // largest datum <= upper_fence
  std::vector<double> outliers;  // input order
};

BoxplotSummary boxplot_summary(std::span<const double> values);

enum class Zone { WithinQuartiles = 0, WithinWhiskers = 1, Outlier = 2 };

std::string_view zone_name(Zone zone);

/// Outlier when either coordinate leaves its fences; within_quartiles when
/// both lie inside their boxes; within_whiskers otherwise.
Zone classify_zone(Point p, const BoxplotSummary& sx, const BoxplotSummary& sy);

/// One landmark of one sample in feature space.
struct LandmarkPosition {
  std::size_t sample = 0;
  std::size_t landmark = 0;
  double x = 0.0;
  double y = 0.0;
};

struct LandmarkSummary {
  BoxplotSummary x;
  BoxplotSummary y;
};

/// Per-emotion boxplot table: one summary pair per landmark and the share of
/// points falling in each zone.
struct LandmarkStatsTable {
  Emotion emotion = Emotion::Anger;
  FeatureMode mode = FeatureMode::Absolute;
  std::size_t sample_count = 0;
  std::size_t total_points = 0;
  std::vector<LandmarkSummary> per_landmark;
  std::array<std::size_t, 3> zone_counts{};
  std::array<double, 3> zone_percentages{};  // indexed by Zone
};

/// All (sample, landmark) positions of one emotion, in dataset order.
std::vector<LandmarkPosition> collect_landmark_positions(const CuratedDataset& dataset,
                                                         Emotion emotion, FeatureMode mode);

/// Needs at least 2 samples of the emotion.
LandmarkStatsTable emotion_landmark_stats(const CuratedDataset& dataset, Emotion emotion,
                                          FeatureMode mode);

Zone classify_position(const LandmarkStatsTable& table, const LandmarkPosition& pos);

enum class OutlierPolicy { None, Winsorize, Drop };

std::string_view policy_name(OutlierPolicy policy);
OutlierPolicy parse_policy(std::string_view text);

struct ColumnFences {
  std::vector<double> lower;
  std::vector<double> upper;
};

ColumnFences column_fences(const Matrix& X);

/// Clips every value to its column's fences.
Matrix winsorize(const Matrix& X, const ColumnFences& fences);

struct OutlierResult {
  Matrix X;
  std::vector<int> labels;
  std::vector<std::size_t> removed;  // original row indices, drop policy only
};

/// Applies the policy with fences computed from X itself. Drop removes
/// every row holding an out-of-fence value and throws if a class present in
/// `labels` would disappear.
OutlierResult handle_outliers(const Matrix& X, std::span<const int> labels, OutlierPolicy policy);

nlohmann::json to_json(const BoxplotSummary& summary);
nlohmann::json to_json(const LandmarkStatsTable& table);

/// Flat CSV: emotion,mode,landmark,axis,q1,median,q3,iqr,lower_fence,...
void write_stats_csv(std::span<const LandmarkStatsTable> tables, std::ostream& out);

}  // namespace facelm
