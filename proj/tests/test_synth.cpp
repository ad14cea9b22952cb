#include <cmath>
#include <cstring>
#include <sstream>

#include "doctest.h"
#include "facelm/evaluate.hpp"
#include "facelm/stats.hpp"
#include "facelm/synth.hpp"

using namespace facelm;
using namespace facelm::synth;

TEST_CASE("noise-free samples equal template plus displacement") {
  const auto spec = separable7_spec(3, 4, 0.0);
  const auto ds = generate(spec);
  REQUIRE(ds.size() == 28);
  for (const auto& rec : ds.records) {
    const auto it = std::find_if(spec.classes.begin(), spec.classes.end(),
                                 [&](const ClassSpec& c) { return c.emotion == rec.emotion; });
    REQUIRE(it != spec.classes.end());
    for (std::size_t i = 0; i < kNumLandmarks; ++i) {
      CHECK(rec.neutral.points[i] == it->neutral_template[i]);
      CHECK(rec.peak.points[i].x == it->neutral_template[i].x + it->displacement[i].x);
      CHECK(rec.peak.points[i].y == it->neutral_template[i].y + it->displacement[i].y);
    }
  }
}

TEST_CASE("generation is bit-identical for a seed and differs across seeds") {
  const auto a = generate(separable7_spec(11));
  const auto b = generate(separable7_spec(11));
  REQUIRE(a.size() == b.size());
  CHECK(a.size() == 7 * 24);
  for (std::size_t r = 0; r < a.size(); ++r) {
    CHECK(a.records[r].subject_id == b.records[r].subject_id);
    CHECK(std::memcmp(a.records[r].peak.points.data(), b.records[r].peak.points.data(),
                      sizeof(LandmarkPoints)) == 0);
    CHECK(std::memcmp(a.records[r].neutral.points.data(), b.records[r].neutral.points.data(),
                      sizeof(LandmarkPoints)) == 0);
  }
  CHECK(a.records[0].subject_id == "syn-anger-000");
  const auto c = generate(separable7_spec(12));
  CHECK(c.records[0].peak.points != a.records[0].peak.points);
}

TEST_CASE("an injected offset creates exactly one outlier") {
  auto spec = separable7_spec(2, 10, 0.0);
  spec.injections.push_back({Emotion::Happiness, 4, 62, 0, 15.0, FrameRole::Peak});
  const auto ds = generate(spec);
  const auto t = emotion_landmark_stats(ds, Emotion::Happiness, FeatureMode::Absolute);
  CHECK(t.zone_counts[2] == 1);
  const auto other = emotion_landmark_stats(ds, Emotion::Anger, FeatureMode::Absolute);
  CHECK(other.zone_counts[2] == 0);

  const auto clean = generate(separable7_spec(2, 10, 0.0));
  const auto pick = [](const CuratedDataset& d) {
    for (const auto& r : d.records) {
      if (r.emotion == Emotion::Happiness && r.subject_id == "syn-happiness-004") return r;
    }
    throw Error("missing record");
  };
  CHECK(pick(ds).peak.points[62].x == pick(clean).peak.points[62].x + 15.0);
  CHECK(pick(ds).peak.points[62].y == pick(clean).peak.points[62].y);
}

TEST_CASE("out-of-range injections are rejected") {
  auto spec = separable7_spec(2, 5, 1.0);
  spec.injections.push_back({Emotion::Fear, 5, 10, 0, 1.0, FrameRole::Peak});
  CHECK_THROWS_AS(generate(spec), Error);
  spec.injections.back() = {Emotion::Fear, 0, 68, 0, 1.0, FrameRole::Peak};
  CHECK_THROWS_AS(generate(spec), Error);
  spec.injections.back() = {Emotion::Fear, 0, 10, 2, 1.0, FrameRole::Peak};
  CHECK_THROWS_AS(generate(spec), Error);
  spec.sigma = -1.0;
  spec.injections.clear();
  CHECK_THROWS_AS(generate(spec), Error);
}

TEST_CASE("synthetic data survives a CSV round trip without rejections") {
  const auto ds = generate(separable7_spec(4, 6, 1.5));
  std::stringstream csv;
  write_dataset_csv(ds, csv);
  const auto result = validate(parse_dataset(csv));
  CHECK(result.report.rejected.empty());
  CHECK(result.report.accepted_count == ds.size());
  REQUIRE(result.dataset.size() == ds.size());
  for (std::size_t r = 0; r < ds.size(); ++r) {
    CHECK(result.dataset.records[r].subject_id == ds.records[r].subject_id);
    CHECK(result.dataset.records[r].emotion == ds.records[r].emotion);
    CHECK(result.dataset.records[r].peak.points == ds.records[r].peak.points);
    CHECK(result.dataset.records[r].neutral.points == ds.records[r].neutral.points);
  }
}

TEST_CASE("preset displacements are at least ten noise widths apart") {
  const auto spec = separable7_spec();
  CHECK(spec.sigma == 1.0);
  double closest = INFINITY;
  for (std::size_t a = 0; a < spec.classes.size(); ++a) {
    for (std::size_t b = a + 1; b < spec.classes.size(); ++b) {
      double sq = 0.0;
      for (std::size_t i = 0; i < kNumLandmarks; ++i) {
        const double dx = spec.classes[a].displacement[i].x - spec.classes[b].displacement[i].x;
        const double dy = spec.classes[a].displacement[i].y - spec.classes[b].displacement[i].y;
        sq += dx * dx + dy * dy;
      }
      closest = std::min(closest, std::sqrt(sq));
    }
  }
  MESSAGE("closest class pair ", closest, " px");
  CHECK(closest >= 10.0 * spec.sigma);
}

TEST_CASE("noise-free data is perfectly classified by every model") {
  const auto ds = generate(separable7_spec(1, 24, 0.0));
  const auto fm = build_feature_matrix(ds, FeatureMode::Displacement);
  for (auto kind : eval::kAllModels) {
    const auto report = eval::cross_validate(kind, eval::default_config(kind), fm.X, fm.labels, 4, 1);
    CHECK_MESSAGE(report.mean_accuracy == 1.0, eval::model_name(kind));
  }
}

TEST_CASE("spec JSON accepts the preset with overrides and rejects unknown keys") {
  const auto spec = spec_from_json(nlohmann::json::parse(
      R"({"preset": "separable-7", "seed": 9, "sigma": 0.5, "samples_per_class": 3,
          "injections": [{"emotion": "fear", "sample": 1, "landmark": 30, "axis": "y",
                          "offset": -4.5, "frame": "neutral"}]})"));
  CHECK(spec.seed == 9);
  CHECK(spec.sigma == 0.5);
  REQUIRE(spec.classes.size() == 7);
  CHECK(spec.classes[0].samples == 3);
  REQUIRE(spec.injections.size() == 1);
  CHECK(spec.injections[0].emotion == Emotion::Fear);
  CHECK(spec.injections[0].axis == 1);
  CHECK(spec.injections[0].offset == -4.5);
  CHECK(spec.injections[0].frame == FrameRole::Neutral);

  const auto back = spec_from_json(to_json(spec));
  CHECK(to_json(back) == to_json(spec));

  CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse(R"({"preset": "separable-7", "noise": 1})")),
                  Error);
  CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse(R"({"preset": "blobs"})")), Error);
  CHECK_THROWS_AS(
      spec_from_json(nlohmann::json::parse(
          R"({"preset": "separable-7", "injections": [{"emotion": "fear", "sample": 0,
              "landmark": 1, "axis": "z", "offset": 1}]})")),
      Error);
  CHECK_THROWS_AS(spec_from_json(nlohmann::json::array()), Error);
}
