#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "cmrqa/errors.hpp"

namespace cmrqa {

// Motion-artefact severity. Underlying values follow the clinical grading
// (1 = mild ... 3 = severe) and the enum order is the severity order.
enum class ArtefactLevel : std::uint8_t { mild = 1, intermediate = 2, severe = 3 };

inline constexpr std::array<ArtefactLevel, 3> kAllLevels = {
    ArtefactLevel::mild, ArtefactLevel::intermediate, ArtefactLevel::severe};

constexpr std::size_t level_index(ArtefactLevel l) noexcept {
  return static_cast<std::size_t>(l) - 1;
}

constexpr ArtefactLevel level_from_index(std::size_t i) noexcept {
  return static_cast<ArtefactLevel>(i + 1);
}

constexpr std::string_view to_string(ArtefactLevel l) noexcept {
  switch (l) {
    case ArtefactLevel::mild: return "mild";
    case ArtefactLevel::intermediate: return "intermediate";
    case ArtefactLevel::severe: return "severe";
  }
  return "?";
}

// Accepts names ("mild", "inter", "intermediate", "severe") or grades 1..3.
inline ArtefactLevel parse_level(std::string_view s) {
  if (s == "mild" || s == "1") return ArtefactLevel::mild;
  if (s == "intermediate" || s == "inter" || s == "2") return ArtefactLevel::intermediate;
  if (s == "severe" || s == "3") return ArtefactLevel::severe;
  throw ValidationError("unknown artefact level '" + std::string(s) + "'");
}

enum class Representation : std::uint8_t { intensity, gradmag };

constexpr std::string_view to_string(Representation r) noexcept {
  return r == Representation::intensity ? "intensity" : "gradmag";
}

inline Representation parse_representation(std::string_view s) {
  if (s == "intensity" || s == "int") return Representation::intensity;
  if (s == "gradmag" || s == "mag") return Representation::gradmag;
  throw ValidationError("unknown representation '" + std::string(s) + "'");
}

enum class Architecture : std::uint8_t { resnet, efficientnet, vit };

inline constexpr std::array<Architecture, 3> kAllArchitectures = {
    Architecture::resnet, Architecture::efficientnet, Architecture::vit};

constexpr std::string_view to_string(Architecture a) noexcept {
  switch (a) {
    case Architecture::resnet: return "resnet";
    case Architecture::efficientnet: return "efficientnet";
    case Architecture::vit: return "vit";
  }
  return "?";
}

inline Architecture parse_architecture(std::string_view s) {
  if (s == "resnet") return Architecture::resnet;
  if (s == "efficientnet") return Architecture::efficientnet;
  if (s == "vit") return Architecture::vit;
  throw ValidationError("unknown architecture '" + std::string(s) + "'");
}

// Probabilities ordered (mild, intermediate, severe).
using ClassProb = std::array<double, 3>;

}  // namespace cmrqa
