#include "facelm/emotion.hpp"

#include <algorithm>
#include <cctype>

namespace facelm {

namespace {

constexpr std::array<std::string_view, kNumEmotions> kNames = {
    "anger", "contempt", "disgust", "fear", "happiness", "sadness", "surprise",
};

}  // namespace

Emotion emotion_from_index(int index) {
  if (index < 0 || index >= static_cast<int>(kNumEmotions)) {
    throw Error("emotion index out of range: " + std::to_string(index));
  }
  return static_cast<Emotion>(index);
}

std::string_view emotion_name(Emotion e) { return kNames.at(static_cast<std::size_t>(e)); }

Emotion parse_emotion(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "happy") return Emotion::Happiness;
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (lower == kNames[i]) return static_cast<Emotion>(i);
  }
  throw Error("unknown emotion '" + std::string(text) + "'");
}

}  // namespace facelm
