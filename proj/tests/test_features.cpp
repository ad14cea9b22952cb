#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "facelm/features.hpp"
#include "test_support.hpp"

using namespace facelm;
using namespace facelm::testing;

namespace {

LandmarkFrame frame_of(const LandmarkPoints& pts) { return {"s", FrameRole::Peak, pts}; }

void set_eyes(LandmarkPoints& pts, Point right, Point left) {
  for (std::size_t i = kRightEyeBegin; i < kRightEyeEnd; ++i) pts[i] = right;
  for (std::size_t i = kLeftEyeBegin; i < kLeftEyeEnd; ++i) pts[i] = left;
}

}  // namespace

TEST_CASE("eye midpoint of two point-like eyes") {
  LandmarkPoints pts{};
  set_eyes(pts, {10, 10}, {30, 10});
  const auto m = eye_midpoint(frame_of(pts));
  CHECK(m.x == 20.0);
  CHECK(m.y == 10.0);

  set_eyes(pts, {0, 0}, {0, 0});
  CHECK(eye_midpoint(frame_of(pts)) == Point{0, 0});
}

TEST_CASE("eye midpoint of two hexagonal eyes is between their centres") {
  LandmarkPoints pts{};
  for (std::size_t k = 0; k < 6; ++k) {
    const double a = std::numbers::pi / 3.0 * static_cast<double>(k);
    pts[kRightEyeBegin + k] = {5.0 + std::cos(a), 5.0 + std::sin(a)};
    pts[kLeftEyeBegin + k] = {9.0 + std::cos(a), 5.0 + std::sin(a)};
  }
  const auto m = eye_midpoint(frame_of(pts));
  CHECK(m.x == doctest::Approx(7.0).epsilon(1e-14));
  CHECK(m.y == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("min-max maps the extremes and the centre") {
  LandmarkPoints pts{};
  for (auto& p : pts) p = {0, 8};
  set_eyes(pts, {0, 4}, {0, 4});  // eye midpoint (0, 4): centering shifts y by -4
  pts[0] = {-2, 4};   // centered (-2, 0)
  pts[1] = {2, 12};   // centered (2, 8)
  pts[2] = {0, 8};    // centered (0, 4)
  const auto n = normalize_frame(frame_of(pts));
  CHECK(n.points[0] == Point{0, 0});
  CHECK(n.points[1] == Point{1, 1});
  CHECK(n.points[2] == Point{0.5, 0.5});
}

TEST_CASE("a frame with identical points normalizes to the centre") {
  LandmarkPoints pts{};
  for (auto& p : pts) p = {3.25, -7.5};
  for (const auto& p : normalize_frame(frame_of(pts)).points) CHECK(p == Point{0.5, 0.5});
}

TEST_CASE("normalization is translation invariant") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto pts = random_points(rng);
    auto moved = pts;
    const double tx = rng.uniform(-500, 500), ty = rng.uniform(-500, 500);
    for (auto& p : moved) p = {p.x + tx, p.y + ty};
    const auto a = normalize_frame(frame_of(pts));
    const auto b = normalize_frame(frame_of(moved));
    for (std::size_t i = 0; i < kNumLandmarks; ++i) {
      CHECK(std::abs(a.points[i].x - b.points[i].x) < 1e-12);
      CHECK(std::abs(a.points[i].y - b.points[i].y) < 1e-12);
    }
  }
}

TEST_CASE("each normalized axis spans exactly [0, 1]") {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = normalize_frame(frame_of(random_points(rng)));
    double xmin = 1, xmax = 0, ymin = 1, ymax = 0;
    for (const auto& p : n.points) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
    CHECK(xmin == 0.0);
    CHECK(xmax == 1.0);
    CHECK(ymin == 0.0);
    CHECK(ymax == 1.0);
  }
}

TEST_CASE("a canonical frame renormalizes to itself") {
  Rng rng(13);
  auto pts = random_points(rng, 0.0, 1.0);
  pts[0] = {0.0, 0.0};
  pts[1] = {1.0, 1.0};
  const auto n = normalize_frame(frame_of(pts));
  for (std::size_t i = 0; i < kNumLandmarks; ++i) {
    CHECK(std::abs(n.points[i].x - pts[i].x) < 1e-12);
    CHECK(std::abs(n.points[i].y - pts[i].y) < 1e-12);
  }
}

TEST_CASE("absolute features lay out x values then y values") {
  Rng rng(14);
  const auto rec = make_record("s", Emotion::Fear, random_points(rng), random_points(rng));
  const auto fv = absolute_features(rec);
  const auto n = normalize_frame(rec.peak);
  REQUIRE(fv.values.size() == kFeatureDim);
  CHECK(fv.values[0] == n.points[0].x);
  CHECK(fv.values[68] == n.points[0].y);
  CHECK(fv.values[67] == n.points[67].x);
  CHECK(fv.values[135] == n.points[67].y);
  CHECK(fv.mode == FeatureMode::Absolute);
  CHECK(fv.emotion == Emotion::Fear);
  for (double v : fv.values) CHECK((v >= 0.0 && v <= 1.0));

  LandmarkPoints same{};
  for (auto& p : same) p = {4, 4};
  for (double v : absolute_features(make_record("s", Emotion::Fear, same, same)).values) {
    CHECK(v == 0.5);
  }
}

TEST_CASE("uniform scaling about the eye midpoint leaves absolute features unchanged") {
  Rng rng(15);
  for (int trial = 0; trial < 50; ++trial) {
    const auto pts = random_points(rng);
    const auto m = eye_midpoint(frame_of(pts));
    auto scaled = pts;
    for (auto& p : scaled) p = {m.x + 2.0 * (p.x - m.x), m.y + 2.0 * (p.y - m.y)};
    const auto a = absolute_features(make_record("s", Emotion::Anger, pts, pts));
    const auto b = absolute_features(make_record("s", Emotion::Anger, pts, scaled));
    for (std::size_t i = 0; i < kFeatureDim; ++i) CHECK(std::abs(a.values[i] - b.values[i]) < 1e-12);
  }
}

TEST_CASE("displacement of identical frames is zero") {
  Rng rng(16);
  const auto pts = random_points(rng);
  for (double v : displacement_features(make_record("s", Emotion::Sadness, pts, pts)).values) {
    CHECK(v == 0.0);
  }
}

TEST_CASE("swapping neutral and peak negates the displacement") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_points(rng), b = random_points(rng);
    const auto d1 = displacement_features(make_record("s", Emotion::Anger, a, b));
    const auto d2 = displacement_features(make_record("s", Emotion::Anger, b, a));
    for (std::size_t i = 0; i < kFeatureDim; ++i) {
      CHECK(d1.values[i] == -d2.values[i]);
      CHECK((d1.values[i] >= -1.0 && d1.values[i] <= 1.0));
    }
  }
}

TEST_CASE("a known interior displacement is recovered in normalized units") {
  // Jaw corners fix the bounding box and eyes stay put, so both frames share
  // the centering offset and the axis ranges (200 wide, 100 tall).
  LandmarkPoints neutral{};
  for (auto& p : neutral) p = {100, 50};
  neutral[0] = {0, 0};
  neutral[16] = {200, 100};
  set_eyes(neutral, {70, 40}, {130, 40});
  auto peak = neutral;
  LandmarkPoints delta{};
  delta[30] = {10, -5};
  delta[48] = {-20, 15};
  delta[57] = {0, 30};
  for (std::size_t i = 0; i < kNumLandmarks; ++i) {
    peak[i].x += delta[i].x;
    peak[i].y += delta[i].y;
  }
  const auto d = displacement_features(make_record("s", Emotion::Happiness, neutral, peak));
  for (std::size_t i = 0; i < kNumLandmarks; ++i) {
    CHECK(d.values[i] == doctest::Approx(delta[i].x / 200.0).epsilon(1e-12));
    CHECK(d.values[kNumLandmarks + i] == doctest::Approx(delta[i].y / 100.0).epsilon(1e-12));
  }
}

TEST_CASE("feature matrix has one row and label per record") {
  Rng rng(18);
  CuratedDataset ds;
  const Emotion es[] = {Emotion::Anger, Emotion::Surprise, Emotion::Fear};
  for (int i = 0; i < 3; ++i) {
    const auto pts = random_points(rng);
    ds.records.push_back(make_record("s" + std::to_string(i), es[i], pts, pts));
  }
  const auto abs = build_feature_matrix(ds, FeatureMode::Absolute);
  CHECK(abs.X.rows() == 3);
  CHECK(abs.X.cols() == kFeatureDim);
  CHECK(abs.labels == std::vector<int>{0, 6, 3});
  CHECK(abs.subject_ids[1] == "s1");

  const auto disp = build_feature_matrix(ds, FeatureMode::Displacement);
  for (double v : disp.X.values()) CHECK(v == 0.0);
  CHECK_THROWS_AS(build_feature_matrix(CuratedDataset{}, FeatureMode::Absolute), Error);
}

TEST_CASE("feature CSV has the subject, emotion and f0..f135 header") {
  Rng rng(19);
  CuratedDataset ds;
  ds.records.push_back(make_record("s9", Emotion::Contempt, random_points(rng), random_points(rng)));
  std::ostringstream os;
  write_feature_csv(build_feature_matrix(ds, FeatureMode::Displacement), os);
  std::istringstream in(os.str());
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header.rfind("subject_id,emotion,f0,f1,", 0) == 0);
  CHECK(header.substr(header.size() - 5) == ",f135");
  CHECK(row.rfind("s9,contempt,", 0) == 0);
  CHECK(std::count(row.begin(), row.end(), ',') == 137);
}

TEST_CASE("feature modes parse by name") {
  CHECK(parse_mode("absolute") == FeatureMode::Absolute);
  CHECK(parse_mode("displacement") == FeatureMode::Displacement);
  CHECK(mode_name(FeatureMode::Displacement) == "displacement");
  CHECK_THROWS_AS(parse_mode("relative"), Error);
}
