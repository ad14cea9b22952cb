#include "facelm/features.hpp"

#include <algorithm>
#include <ostream>

namespace facelm {

namespace {

Point mean_of(const LandmarkPoints& pts, std::size_t begin, std::size_t end) {
  Point m;
  for (std::size_t i = begin; i < end; ++i) {
    m.x += pts[i].x;
    m.y += pts[i].y;
  }
  const auto n = static_cast<double>(end - begin);
  return {m.x / n, m.y / n};
}

template <typename Get>
void min_max_axis(LandmarkPoints& pts, Get get) {
  double lo = get(pts[0]);
  double hi = lo;
  for (auto& p : pts) {
    lo = std::min(lo, get(p));
    hi = std::max(hi, get(p));
  }
  const double range = hi - lo;
  for (auto& p : pts) {
    double& v = get(p);
    v = range > 0.0 ? (v - lo) / range : 0.5;
  }
}

std::vector<double> flatten(const NormalizedFrame& f) {
  std::vector<double> v(kFeatureDim);
  for (std::size_t i = 0; i < kNumLandmarks; ++i) {
    v[i] = f.points[i].x;
    v[kNumLandmarks + i] = f.points[i].y;
  }
  return v;
}

}  // namespace

std::string_view mode_name(FeatureMode mode) {
  return mode == FeatureMode::Absolute ? "absolute" : "displacement";
}

FeatureMode parse_mode(std::string_view text) {
  if (text == "absolute") return FeatureMode::Absolute;
  if (text == "displacement") return FeatureMode::Displacement;
  throw Error("unknown feature mode '" + std::string(text) + "'");
}

Point eye_midpoint(const LandmarkFrame& frame) {
  const Point right = mean_of(frame.points, kRightEyeBegin, kRightEyeEnd);
  const Point left = mean_of(frame.points, kLeftEyeBegin, kLeftEyeEnd);
  return {(right.x + left.x) / 2.0, (right.y + left.y) / 2.0};
}

NormalizedFrame normalize_frame(const LandmarkFrame& frame) {
  NormalizedFrame out;
  out.points = frame.points;
  const Point mid = eye_midpoint(frame);
  for (auto& p : out.points) {
    p.x -= mid.x;
    p.y -= mid.y;
  }
  min_max_axis(out.points, [](Point& p) -> double& { return p.x; });
  min_max_axis(out.points, [](Point& p) -> double& { return p.y; });
  return out;
}

FeatureVector absolute_features(const SubjectRecord& record) {
  return {flatten(normalize_frame(record.peak)), FeatureMode::Absolute, record.emotion,
          record.subject_id};
}

FeatureVector displacement_features(const SubjectRecord& record) {
  auto peak = flatten(normalize_frame(record.peak));
  const auto neutral = flatten(normalize_frame(record.neutral));
  for (std::size_t i = 0; i < kFeatureDim; ++i) peak[i] -= neutral[i];
  return {std::move(peak), FeatureMode::Displacement, record.emotion, record.subject_id};
}

FeatureVector make_features(const SubjectRecord& record, FeatureMode mode) {
  return mode == FeatureMode::Absolute ? absolute_features(record)
                                       : displacement_features(record);
}

FeatureMatrix build_feature_matrix(const CuratedDataset& dataset, FeatureMode mode) {
  if (dataset.empty()) throw Error("cannot build features from an empty dataset");
  FeatureMatrix fm;
  fm.X = Matrix(dataset.size(), kFeatureDim);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto fv = make_features(dataset.records[i], mode);
    std::copy(fv.values.begin(), fv.values.end(), fm.X.row(i).begin());
    fm.labels.push_back(label_index(fv.emotion));
    fm.subject_ids.push_back(fv.subject_id);
  }
  return fm;
}

void write_feature_csv(const FeatureMatrix& features, std::ostream& out) {
  out << "subject_id,emotion";
  for (std::size_t j = 0; j < features.X.cols(); ++j) out << ",f" << j;
  out << '\n';
  for (std::size_t i = 0; i < features.X.rows(); ++i) {
    out << features.subject_ids[i] << ',' << emotion_name(emotion_from_index(features.labels[i]));
    for (double v : features.X.row(i)) out << ',' << format_decimal(v);
    out << '\n';
  }
}

}  // namespace facelm
