#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace facelm {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The seven emotion categories. The enumerator order is the label index
/// used everywhere (feature matrices, confusion matrices, tie-breaking).
enum class Emotion : int {
  Anger = 0,
  Contempt,
  Disgust,
  Fear,
  Happiness,
  Sadness,
  Surprise,
};

inline constexpr std::size_t kNumEmotions = 7;

inline constexpr std::array<Emotion, kNumEmotions> kAllEmotions = {
    Emotion::Anger,     Emotion::Contempt, Emotion::Disgust, Emotion::Fear,
    Emotion::Happiness, Emotion::Sadness,  Emotion::Surprise,
};

constexpr int label_index(Emotion e) { return static_cast<int>(e); }

Emotion emotion_from_index(int index);

/// Canonical lowercase name ("anger", ..., "surprise").
std::string_view emotion_name(Emotion e);

/// Case-insensitive parse; "happy" is accepted as an alias of happiness.
/// Throws Error("unknown emotion ...") for anything else.
Emotion parse_emotion(std::string_view text);

}  // namespace facelm
