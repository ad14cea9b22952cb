#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "facelm/stats.hpp"
#include "facelm/synth.hpp"
#include "test_support.hpp"

using namespace facelm;
using namespace facelm::testing;

namespace {

// Sorted-list interpolation at fractional rank p * (n - 1).
double oracle_quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

BoxplotSummary summary_of(std::vector<double> v) { return boxplot_summary(v); }

}  // namespace

TEST_CASE("quartiles of a five-value list with an extreme") {
  const std::vector<double> v = {1, 2, 3, 4, 100};
  const auto q = quartiles(v);
  CHECK(q.q1 == 2.0);
  CHECK(q.median == 3.0);
  CHECK(q.q3 == 4.0);
}

TEST_CASE("quartiles interpolate between ranks") {
  const std::vector<double> v = {4, 1, 3, 2};
  const auto q = quartiles(v);
  CHECK(q.q1 == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(q.median == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(q.q3 == doctest::Approx(3.25).epsilon(1e-15));
}

TEST_CASE("quartiles of constant and single-value data") {
  const auto q = quartiles(std::vector<double>{5, 5, 5});
  CHECK(q.q1 == 5.0);
  CHECK(q.median == 5.0);
  CHECK(q.q3 == 5.0);
  const auto one = quartiles(std::vector<double>{-2.5});
  CHECK(one.q1 == -2.5);
  CHECK(one.q3 == -2.5);
  CHECK_THROWS_AS(quartiles(std::vector<double>{}), Error);
}

TEST_CASE("quartiles agree with the sorted-interpolation oracle") {
  Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> v(1 + rng.index(200));
    for (auto& x : v) x = rng.normal(0.0, 30.0);
    const auto q = quartiles(v);
    CHECK(std::abs(q.q1 - oracle_quantile(v, 0.25)) <= 1e-12);
    CHECK(std::abs(q.median - oracle_quantile(v, 0.5)) <= 1e-12);
    CHECK(std::abs(q.q3 - oracle_quantile(v, 0.75)) <= 1e-12);
  }
}

TEST_CASE("boxplot summary with one high outlier") {
  const auto s = summary_of({1, 2, 3, 4, 100});
  CHECK(s.iqr == 2.0);
  CHECK(s.lower_fence == -1.0);
  CHECK(s.upper_fence == 7.0);
  CHECK(s.whisker_low == 1.0);
  CHECK(s.whisker_high == 4.0);
  CHECK(s.outliers == std::vector<double>{100});
}

TEST_CASE("boxplot summary of constant data has zero-width fences") {
  const auto s = summary_of({5, 5, 5});
  CHECK(s.lower_fence == 5.0);
  CHECK(s.upper_fence == 5.0);
  CHECK(s.whisker_low == 5.0);
  CHECK(s.whisker_high == 5.0);
  CHECK(s.outliers.empty());
}

TEST_CASE("outliers keep input order and whiskers stay inside the fences") {
  const auto s = summary_of({50, 1, 2, 3, 4, -40, 3, 2});
  CHECK(s.outliers == std::vector<double>{50, -40});
  Rng rng(22);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(2 + rng.index(50));
    for (auto& x : v) x = rng.normal() * (rng.uniform() < 0.1 ? 20.0 : 1.0);
    const auto b = boxplot_summary(v);
    CHECK(b.whisker_low >= b.lower_fence);
    CHECK(b.whisker_high <= b.upper_fence);
    CHECK(std::find(v.begin(), v.end(), b.whisker_low) != v.end());
    CHECK(std::find(v.begin(), v.end(), b.whisker_high) != v.end());
    for (double x : v) {
      CHECK(!(x >= b.lower_fence && x < b.whisker_low));
      CHECK(!(x <= b.upper_fence && x > b.whisker_high));
    }
    for (double o : b.outliers) CHECK((o < b.lower_fence || o > b.upper_fence));
    const auto inside = std::count_if(v.begin(), v.end(), [&](double x) {
      return x >= b.lower_fence && x <= b.upper_fence;
    });
    CHECK(static_cast<std::size_t>(inside) + b.outliers.size() == v.size());
  }
}

TEST_CASE("values within the quartile box never produce outliers") {
  const auto s = summary_of({2, 2.5, 3, 3.5, 4});
  CHECK(s.outliers.empty());
}

TEST_CASE("zone classification") {
  const auto sx = summary_of({1, 2, 3, 4, 100});  // q 2..4, fences -1..7
  const auto sy = summary_of({10, 20, 30, 40, 50});
  CHECK(classify_zone({sx.median, sy.median}, sx, sy) == Zone::WithinQuartiles);
  CHECK(classify_zone({8.0, sy.median}, sx, sy) == Zone::Outlier);
  CHECK(classify_zone({8.0, 1000.0}, sx, sy) == Zone::Outlier);
  CHECK(classify_zone({3.0, 1000.0}, sx, sy) == Zone::Outlier);
  CHECK(classify_zone({5.0, sy.median}, sx, sy) == Zone::WithinWhiskers);
  CHECK(classify_zone({4.0, 40.0}, sx, sy) == Zone::WithinQuartiles);
  CHECK(classify_zone({7.0, 30.0}, sx, sy) == Zone::WithinWhiskers);
  CHECK(zone_name(Zone::Outlier) == "outlier");
}

TEST_CASE("identical samples put every point within the quartiles") {
  auto spec = synth::separable7_spec(1, 6, 0.0);
  const auto ds = synth::generate(spec);
  for (auto mode : {FeatureMode::Absolute, FeatureMode::Displacement}) {
    const auto t = emotion_landmark_stats(ds, Emotion::Fear, mode);
    CHECK(t.sample_count == 6);
    CHECK(t.total_points == 6 * 68);
    CHECK(t.zone_counts[0] == t.total_points);
    CHECK(t.zone_percentages[0] == 100.0);
  }
}

TEST_CASE("zone counts partition the points and percentages sum to 100") {
  const auto ds = synth::generate(synth::separable7_spec(4, 17, 3.0));
  for (auto e : kAllEmotions) {
    for (auto mode : {FeatureMode::Absolute, FeatureMode::Displacement}) {
      const auto t = emotion_landmark_stats(ds, e, mode);
      CHECK(t.total_points == 68 * t.sample_count);
      CHECK(t.zone_counts[0] + t.zone_counts[1] + t.zone_counts[2] == t.total_points);
      const double sum = t.zone_percentages[0] + t.zone_percentages[1] + t.zone_percentages[2];
      CHECK(std::abs(sum - 100.0) <= 0.02);
      const auto pts = collect_landmark_positions(ds, e, mode);
      std::array<std::size_t, 3> recount{};
      for (const auto& p : pts) recount[static_cast<std::size_t>(classify_position(t, p))]++;
      CHECK(recount == t.zone_counts);
    }
  }
}

TEST_CASE("landmark statistics need two samples") {
  const auto ds = synth::generate(synth::separable7_spec(1, 1, 1.0));
  CHECK_THROWS_AS(emotion_landmark_stats(ds, Emotion::Anger, FeatureMode::Absolute), Error);
}

TEST_CASE("winsorizing clips to the column fences") {
  Matrix X(5, 2);
  const double col0[] = {1, 2, 3, 4, 100};
  for (std::size_t r = 0; r < 5; ++r) {
    X(r, 0) = col0[r];
    X(r, 1) = static_cast<double>(r);
  }
  const auto fences = column_fences(X);
  CHECK(fences.lower[0] == -1.0);
  CHECK(fences.upper[0] == 7.0);
  const auto W = winsorize(X, fences);
  const double expected[] = {1, 2, 3, 4, 7};
  for (std::size_t r = 0; r < 5; ++r) {
    CHECK(W(r, 0) == expected[r]);
    CHECK(W(r, 1) == X(r, 1));
  }
}

TEST_CASE("winsorizing twice equals winsorizing once") {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    auto X = random_matrix(rng, 3 + rng.index(30), 4, 1.0);
    for (auto& v : X.values()) {
      if (rng.uniform() < 0.1) v *= 50.0;
    }
    const auto fences = column_fences(X);
    const auto once = winsorize(X, fences);
    CHECK(winsorize(once, fences) == once);
    const auto policy = handle_outliers(X, std::vector<int>(X.rows(), 0), OutlierPolicy::Winsorize);
    CHECK(policy.X == once);
  }
}

TEST_CASE("outlier-free data is unchanged by either policy") {
  Matrix X(4, 2);
  for (std::size_t r = 0; r < 4; ++r) {
    X(r, 0) = static_cast<double>(r);
    X(r, 1) = 2.0 * static_cast<double>(r);
  }
  const std::vector<int> y = {0, 1, 0, 1};
  for (auto policy : {OutlierPolicy::Winsorize, OutlierPolicy::Drop, OutlierPolicy::None}) {
    const auto res = handle_outliers(X, y, policy);
    CHECK(res.X == X);
    CHECK(res.labels == y);
    CHECK(res.removed.empty());
  }
}

TEST_CASE("drop removes the row holding the only outlier") {
  Matrix X(5, 2);
  for (std::size_t r = 0; r < 5; ++r) {
    X(r, 0) = static_cast<double>(r + 1);
    X(r, 1) = 1.0;
  }
  X(4, 0) = 100.0;
  const std::vector<int> y = {0, 1, 0, 1, 0};
  const auto res = handle_outliers(X, y, OutlierPolicy::Drop);
  CHECK(res.X.rows() == 4);
  CHECK(res.removed == std::vector<std::size_t>{4});
  CHECK(res.labels == std::vector<int>{0, 1, 0, 1});

  const std::vector<int> lonely = {0, 0, 0, 0, 1};
  CHECK_THROWS_AS(handle_outliers(X, lonely, OutlierPolicy::Drop), Error);
}

TEST_CASE("policies parse by name") {
  CHECK(parse_policy("winsorize") == OutlierPolicy::Winsorize);
  CHECK(parse_policy("drop") == OutlierPolicy::Drop);
  CHECK(parse_policy("none") == OutlierPolicy::None);
  CHECK_THROWS_AS(parse_policy("trim"), Error);
}

TEST_CASE("stats JSON mirrors the zone table and the CSV has one row per landmark") {
  const auto ds = synth::generate(synth::separable7_spec(2, 8, 1.0));
  const auto t = emotion_landmark_stats(ds, Emotion::Disgust, FeatureMode::Displacement);
  const auto j = to_json(t);
  CHECK(j.at("total_points") == 8 * 68);
  CHECK(j.at("emotion") == "disgust");
  const double sum = j.at("in_quartiles_pct").get<double>() +
                     j.at("in_whiskers_pct").get<double>() + j.at("outlier_pct").get<double>();
  CHECK(std::abs(sum - 100.0) <= 0.02);
  CHECK(j.at("landmarks").size() == 68);

  std::ostringstream os;
  const std::vector<LandmarkStatsTable> tables = {t};
  write_stats_csv(tables, os);
  const auto text = os.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 68 * 2);  // one row per landmark and axis
}
