#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "facelm/dataset.hpp"
#include "facelm/matrix.hpp"

namespace facelm {

enum class FeatureMode { Absolute, Displacement };

std::string_view mode_name(FeatureMode mode);
FeatureMode parse_mode(std::string_view text);

/// Landmarks after centering and per-axis Min-Max scaling; every
/// coordinate lies in [0, 1].
struct NormalizedFrame {
  LandmarkPoints points{};
};

/// 136 values laid out x0..x67 followed by y0..y67.
struct FeatureVector {
  std::vector<double> values;
  FeatureMode mode = FeatureMode::Absolute;
  Emotion emotion = Emotion::Anger;
  std::string subject_id;
};

/// Midpoint of the two eye centers (mean of points 36-41 and of 42-47).
Point eye_midpoint(const LandmarkFrame& frame);

/// Subtracts the eye midpoint, then maps each axis's min to 0 and max to 1
/// over the frame's own points. A zero-range axis maps to 0.5.
NormalizedFrame normalize_frame(const LandmarkFrame& frame);

FeatureVector absolute_features(const SubjectRecord& record);

/// normalize(peak) - normalize(neutral), each frame normalized on its own.
FeatureVector displacement_features(const SubjectRecord& record);

FeatureVector make_features(const SubjectRecord& record, FeatureMode mode);

struct FeatureMatrix {
  Matrix X;                // n x 136
  std::vector<int> labels; // label_index of each row's emotion
  std::vector<std::string> subject_ids;
};

/// Row i is record i of the dataset.
FeatureMatrix build_feature_matrix(const CuratedDataset& dataset, FeatureMode mode);

/// CSV with header `subject_id,emotion,f0..f135`.
void write_feature_csv(const FeatureMatrix& features, std::ostream& out);

}  // namespace facelm
