#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "facelm/emotion.hpp"
#include "json.hpp"

namespace facelm {

inline constexpr std::size_t kNumLandmarks = 68;
inline constexpr std::size_t kFeatureDim = 2 * kNumLandmarks;

// Standard 68-point index ranges (inclusive begin, exclusive end).
inline constexpr std::size_t kJawBegin = 0, kJawEnd = 17;
inline constexpr std::size_t kBrowsBegin = 17, kBrowsEnd = 27;
inline constexpr std::size_t kNoseBegin = 27, kNoseEnd = 36;
inline constexpr std::size_t kRightEyeBegin = 36, kRightEyeEnd = 42;
inline constexpr std::size_t kLeftEyeBegin = 42, kLeftEyeEnd = 48;
inline constexpr std::size_t kMouthBegin = 48, kMouthEnd = 68;

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

using LandmarkPoints = std::array<Point, kNumLandmarks>;

enum class FrameRole { Neutral, Peak };

std::string_view role_name(FrameRole role);

struct LandmarkFrame {
  std::string subject_id;
  FrameRole role = FrameRole::Neutral;
  LandmarkPoints points{};
  bool operator==(const LandmarkFrame&) const = default;
};

struct SubjectRecord {
  std::string subject_id;
  Emotion emotion = Emotion::Anger;
  LandmarkFrame neutral;
  LandmarkFrame peak;
  bool operator==(const SubjectRecord&) const = default;
};

/// Records that passed validation: one neutral and one peak frame per
/// (subject_id, emotion), in first-appearance order of the raw input.
struct CuratedDataset {
  std::vector<SubjectRecord> records;
  std::string source;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

/// One CSV line before validation. `points` may hold any number of points
/// when built programmatically; the parser only yields 68.
struct RawFrameRow {
  std::string subject_id;
  Emotion emotion = Emotion::Anger;
  FrameRole role = FrameRole::Neutral;
  std::vector<Point> points;
  std::size_t line = 0;
};

enum class RejectReason {
  MissingNeutral,
  MissingPeak,
  BadPointCount,
  LabelMismatch,
  NonFiniteCoordinate,
};

std::string_view reason_name(RejectReason reason);

struct Rejection {
  std::string subject_id;
  Emotion emotion = Emotion::Anger;
  RejectReason reason = RejectReason::MissingNeutral;
};

struct ValidationReport {
  std::size_t accepted_count = 0;
  std::vector<Rejection> rejected;
};

struct ValidationResult {
  CuratedDataset dataset;
  ValidationReport report;
};

/// The exact header line of the landmark CSV format.
std::string landmark_csv_header();

/// Reads raw frame rows. Throws Error with the offending line number on
/// I/O failure or a malformed row.
std::vector<RawFrameRow> parse_dataset(const std::filesystem::path& path);
std::vector<RawFrameRow> parse_dataset(std::istream& in);

/// Groups rows by (subject_id, emotion) and keeps groups holding exactly one
/// neutral and one peak frame. Problems are reported, never thrown.
ValidationResult validate(const std::vector<RawFrameRow>& rows);

/// parse_dataset + validate, recording `path` as provenance.
ValidationResult load_dataset(const std::filesystem::path& path);

/// Writes the dataset in the landmark CSV format. Coordinates use the
/// shortest decimal representation that round-trips exactly.
void write_dataset_csv(const CuratedDataset& dataset, std::ostream& out);
void write_dataset_csv(const CuratedDataset& dataset, const std::filesystem::path& path);

struct DistributionSummary {
  std::array<std::size_t, kNumEmotions> counts{};
  std::array<double, kNumEmotions> percentages{};
  std::size_t total = 0;
};

DistributionSummary class_distribution(const CuratedDataset& dataset);

nlohmann::json to_json(const ValidationReport& report);
nlohmann::json to_json(const DistributionSummary& summary);

/// Shortest round-trip decimal (fixed notation) for a double.
std::string format_decimal(double value);

}  // namespace facelm
