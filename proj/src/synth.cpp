#include "facelm/synth.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include <fmt/format.h>

#include "facelm/rng.hpp"

namespace facelm::synth {

namespace {

constexpr double kPi = std::numbers::pi;

void ellipse(LandmarkPoints& pts, std::size_t begin, std::size_t count, Point c, double rx,
             double ry, double start_deg) {
  // Clockwise on screen starting at start_deg (0 = +x, 90 = up).
  for (std::size_t k = 0; k < count; ++k) {
    const double a = (start_deg - 360.0 * static_cast<double>(k) / static_cast<double>(count)) *
                     kPi / 180.0;
    pts[begin + k] = {c.x + rx * std::cos(a), c.y - ry * std::sin(a)};
  }
}

void move(LandmarkPoints& d, std::initializer_list<std::size_t> idx, double dx, double dy) {
  for (auto i : idx) {
    d[i].x += dx;
    d[i].y += dy;
  }
}

void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                         std::string_view where) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) {
      throw Error(fmt::format("unknown key '{}' in {}", key, where));
    }
  }
}

LandmarkPoints read_points(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != kNumLandmarks) {
    throw Error("synth spec: point lists must hold exactly 68 [x, y] pairs");
  }
  LandmarkPoints pts{};
  for (std::size_t i = 0; i < kNumLandmarks; ++i) {
    pts[i] = {j[i].at(0).get<double>(), j[i].at(1).get<double>()};
  }
  return pts;
}

nlohmann::json write_points(const LandmarkPoints& pts) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& p : pts) j.push_back({p.x, p.y});
  return j;
}

Injection read_injection(const nlohmann::json& j) {
  reject_unknown_keys(j, {"emotion", "sample", "landmark", "axis", "offset", "frame"},
                      "injection");
  Injection inj;
  inj.emotion = parse_emotion(j.at("emotion").get<std::string>());
  inj.sample = j.at("sample").get<std::size_t>();
  inj.landmark = j.at("landmark").get<std::size_t>();
  const auto axis = j.at("axis").get<std::string>();
  if (axis != "x" && axis != "y") throw Error("injection axis must be \"x\" or \"y\"");
  inj.axis = axis == "x" ? 0 : 1;
  inj.offset = j.at("offset").get<double>();
  if (j.contains("frame")) {
    const auto f = j.at("frame").get<std::string>();
    if (f != "neutral" && f != "peak") throw Error("injection frame must be neutral or peak");
    inj.frame = f == "neutral" ? FrameRole::Neutral : FrameRole::Peak;
  }
  return inj;
}

}  // namespace

LandmarkPoints face_template() {
  LandmarkPoints p{};
  // Jaw: lower half ellipse from the right ear (image left) to the left ear.
  for (std::size_t i = 0; i < 17; ++i) {
    const double a = kPi - kPi * static_cast<double>(i) / 16.0;
    p[i] = {100.0 + 95.0 * std::cos(a), 90.0 + 110.0 * std::sin(a)};
  }
  for (std::size_t i = 0; i < 5; ++i) {
    const double t = static_cast<double>(i) / 4.0;
    p[17 + i] = {30.0 + 55.0 * t, 55.0 - 8.0 * std::sin(kPi * t)};
    p[22 + i] = {115.0 + 55.0 * t, 55.0 - 8.0 * std::sin(kPi * t)};
  }
  for (std::size_t i = 0; i < 4; ++i) p[27 + i] = {100.0, 70.0 + 15.0 * static_cast<double>(i)};
  const double nostril_x[5] = {85.0, 92.0, 100.0, 108.0, 115.0};
  const double nostril_y[5] = {125.0, 128.0, 130.0, 128.0, 125.0};
  for (std::size_t i = 0; i < 5; ++i) p[31 + i] = {nostril_x[i], nostril_y[i]};
  // Eyes and lips start at their image-left corner and run over the top:
  // 36 corner, 37-38 upper lid, 39 corner, 40-41 lower lid.
  ellipse(p, kRightEyeBegin, 6, {65.0, 80.0}, 15.0, 6.0, 180.0);
  ellipse(p, kLeftEyeBegin, 6, {135.0, 80.0}, 15.0, 6.0, 180.0);
  ellipse(p, 48, 12, {100.0, 160.0}, 35.0, 15.0, 180.0);
  ellipse(p, 60, 8, {100.0, 160.0}, 20.0, 6.0, 180.0);
  return p;
}

LandmarkPoints expression_pattern(Emotion emotion) {
  LandmarkPoints d{};
  switch (emotion) {
    case Emotion::Anger:
      move(d, {19, 20, 21}, 4.0, 6.0);
      move(d, {22, 23, 24}, -4.0, 6.0);
      move(d, {61, 62, 63}, 0.0, 3.0);
      move(d, {65, 66, 67}, 0.0, -3.0);
      break;
    case Emotion::Contempt:
      move(d, {54}, 6.0, -8.0);
      move(d, {53, 55, 64}, 3.0, -5.0);
      break;
    case Emotion::Disgust:
      move(d, {31, 32, 33, 34, 35}, 0.0, -6.0);
      move(d, {50, 51, 52}, 0.0, -6.0);
      break;
    case Emotion::Fear:
      move(d, {17, 18, 19, 20, 21, 22, 23, 24, 25, 26}, 0.0, -5.0);
      move(d, {37, 38, 43, 44}, 0.0, -3.0);
      move(d, {48}, -6.0, 0.0);
      move(d, {54}, 6.0, 0.0);
      break;
    case Emotion::Happiness:
      move(d, {48}, -6.0, -8.0);
      move(d, {54}, 6.0, -8.0);
      move(d, {49, 53}, 0.0, -4.0);
      break;
    case Emotion::Sadness:
      move(d, {20, 21, 22, 23}, 0.0, -6.0);
      move(d, {48, 54}, 0.0, 8.0);
      break;
    case Emotion::Surprise:
      move(d, {17, 18, 19, 20, 21, 22, 23, 24, 25, 26}, 0.0, -10.0);
      move(d, {55, 56, 57, 58, 59, 65, 66, 67}, 0.0, 15.0);
      break;
  }
  return d;
}

SynthSpec separable7_spec(std::uint64_t seed, std::size_t samples_per_class, double sigma) {
  SynthSpec spec;
  spec.seed = seed;
  spec.sigma = sigma;
  const auto tmpl = face_template();
  for (auto e : kAllEmotions) {
    spec.classes.push_back({e, tmpl, expression_pattern(e), samples_per_class});
  }
  return spec;
}

CuratedDataset generate(const SynthSpec& spec) {
  if (!(spec.sigma >= 0.0)) throw Error("synth: sigma must be non-negative");
  std::set<int> seen;
  for (const auto& c : spec.classes) {
    if (!seen.insert(label_index(c.emotion)).second) {
      throw Error("synth: emotion listed twice in the synth spec");
    }
  }

  CuratedDataset ds;
  ds.source = "synth";
  Rng rng(spec.seed);
  for (const auto& c : spec.classes) {
    for (std::size_t s = 0; s < c.samples; ++s) {
      SubjectRecord rec;
      rec.subject_id = fmt::format("syn-{}-{:03}", emotion_name(c.emotion), s);
      rec.emotion = c.emotion;
      rec.neutral = {rec.subject_id, FrameRole::Neutral, c.neutral_template};
      rec.peak = {rec.subject_id, FrameRole::Peak, c.neutral_template};
      for (std::size_t i = 0; i < kNumLandmarks; ++i) {
        rec.peak.points[i].x += c.displacement[i].x;
        rec.peak.points[i].y += c.displacement[i].y;
      }
      if (spec.sigma > 0.0) {
        for (auto* frame : {&rec.neutral, &rec.peak}) {
          for (auto& p : frame->points) {
            p.x += rng.normal(0.0, spec.sigma);
            p.y += rng.normal(0.0, spec.sigma);
          }
        }
      }
      ds.records.push_back(std::move(rec));
    }
  }

  for (const auto& inj : spec.injections) {
    if (inj.landmark >= kNumLandmarks) throw Error("synth: injection landmark out of range");
    if (inj.axis != 0 && inj.axis != 1) throw Error("synth: injection axis must be 0 or 1");
    std::size_t seen_samples = 0;
    SubjectRecord* target = nullptr;
    for (auto& rec : ds.records) {
      if (rec.emotion != inj.emotion) continue;
      if (seen_samples++ == inj.sample) {
        target = &rec;
        break;
      }
    }
    if (target == nullptr) throw Error("synth: injection sample index out of range");
    auto& pt = (inj.frame == FrameRole::Peak ? target->peak : target->neutral).points[inj.landmark];
    (inj.axis == 0 ? pt.x : pt.y) += inj.offset;
  }
  return ds;
}

SynthSpec spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("synth spec must be a JSON object");
  SynthSpec spec;
  if (j.contains("preset")) {
    reject_unknown_keys(j, {"preset", "seed", "sigma", "samples_per_class", "injections"},
                        "synth spec");
    const auto preset = j.at("preset").get<std::string>();
    if (preset != "separable-7") throw Error("unknown synth preset '" + preset + "'");
    spec = separable7_spec(j.value("seed", std::uint64_t{1}),
                           j.value("samples_per_class", std::size_t{24}), j.value("sigma", 1.0));
  } else {
    reject_unknown_keys(j, {"classes", "seed", "sigma", "injections"}, "synth spec");
    spec.seed = j.value("seed", std::uint64_t{1});
    spec.sigma = j.value("sigma", 1.0);
    for (const auto& cj : j.at("classes")) {
      reject_unknown_keys(cj, {"emotion", "template", "displacement", "samples"}, "class spec");
      ClassSpec c;
      c.emotion = parse_emotion(cj.at("emotion").get<std::string>());
      c.neutral_template = read_points(cj.at("template"));
      c.displacement = read_points(cj.at("displacement"));
      c.samples = cj.at("samples").get<std::size_t>();
      spec.classes.push_back(c);
    }
  }
  if (j.contains("injections")) {
    for (const auto& ij : j.at("injections")) spec.injections.push_back(read_injection(ij));
  }
  return spec;
}

nlohmann::json to_json(const SynthSpec& spec) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& c : spec.classes) {
    classes.push_back({{"emotion", emotion_name(c.emotion)},
                       {"template", write_points(c.neutral_template)},
                       {"displacement", write_points(c.displacement)},
                       {"samples", c.samples}});
  }
  nlohmann::json injections = nlohmann::json::array();
  for (const auto& inj : spec.injections) {
    injections.push_back({{"emotion", emotion_name(inj.emotion)},
                          {"sample", inj.sample},
                          {"landmark", inj.landmark},
                          {"axis", inj.axis == 0 ? "x" : "y"},
                          {"offset", inj.offset},
                          {"frame", role_name(inj.frame)}});
  }
  return {{"seed", spec.seed}, {"sigma", spec.sigma}, {"classes", classes},
          {"injections", injections}};
}

}  // namespace facelm::synth
