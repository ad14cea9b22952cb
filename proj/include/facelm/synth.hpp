#pragma once

#include <cstdint>
#include <vector>

#include "facelm/dataset.hpp"
#include "json.hpp"

namespace facelm::synth {

struct ClassSpec {
  Emotion emotion = Emotion::Anger;
  LandmarkPoints neutral_template{};
  LandmarkPoints displacement{};  // peak = template + displacement
  std::size_t samples = 0;
};

/// Added verbatim to one coordinate after noise.
struct Injection {
  Emotion emotion = Emotion::Anger;
  std::size_t sample = 0;
  std::size_t landmark = 0;
  int axis = 0;  // 0 = x, 1 = y
  double offset = 0.0;
  FrameRole frame = FrameRole::Peak;
};

struct SynthSpec {
  std::vector<ClassSpec> classes;
  double sigma = 1.0;  // pixels
  std::vector<Injection> injections;
  std::uint64_t seed = 1;
};

/// A frontal 68-point face roughly 190 x 150 px.
LandmarkPoints face_template();

/// Class-specific expression displacement (pixels) used by the presets.
LandmarkPoints expression_pattern(Emotion emotion);

/// "separable-7": 7 emotions x 24 samples, sigma = 1 px.
SynthSpec separable7_spec(std::uint64_t seed = 1, std::size_t samples_per_class = 24,
                          double sigma = 1.0);

/// Draws, per class in spec order and per sample, 136 neutral noise values
/// (x then y for each landmark) followed by 136 peak noise values from one
/// seeded stream, then applies injections. Subject ids are
/// `syn-<emotion>-<NNN>`.
CuratedDataset generate(const SynthSpec& spec);

/// Accepts either {"preset": "separable-7", ...overrides} or an explicit
/// {"classes": [...]} document. Unknown keys are rejected.
SynthSpec spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SynthSpec& spec);

}  // namespace facelm::synth
