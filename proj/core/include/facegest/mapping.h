#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "facegest/mouthseg.h"

namespace facegest::mapping {

enum class Vowel { A = 0, I, U, E, O };
inline constexpr std::array<Vowel, 5> kVowels = {Vowel::A, Vowel::I, Vowel::U, Vowel::E, Vowel::O};

std::string to_string(Vowel v);
Vowel vowel_from_string(const std::string& s);

enum class MouthState { Closed, SlightlyOpen, Open, Pucker };

std::string to_string(MouthState s);
MouthState mouth_state_from_string(const std::string& s);

// A point in (normalized area, aspect ratio) feature space.
struct VowelFeature {
  double norm_area = 0.0;
  double aspect = 0.0;
};

// Replaceable defaults: A wide open, I narrow slit, U small and rounded, E mid
// open and spread, O mid open and rounded.
std::array<VowelFeature, 5> default_vowel_centroids();

struct Calibration {
  double max_area = 1.0;
  double neutral_aspect = 1.0;
  std::array<VowelFeature, 5> vowel_centroids = default_vowel_centroids();
  // Standard deviation of (norm_area, aspect), floored at 1e-6.
  VowelFeature feature_scales{1.0, 1.0};

  void validate() const;
};

void to_json(nlohmann::json& j, const Calibration& c);
void from_json(const nlohmann::json& j, Calibration& c);

// Throws DataError when every shape is empty. |labeled| replaces the default
// centroids only when all five vowels have at least one non-empty shape.
Calibration calibrate(const std::vector<mouthseg::MouthShape>& shapes,
                      const std::map<Vowel, std::vector<mouthseg::MouthShape>>& labeled = {});

struct Linear {
  double gain = 1.0;
  double offset = 0.0;
};
struct Power {
  double gain = 1.0;
  double gamma = 1.0;
};
// Output is a level index 0..thresholds.size().
struct Quantize {
  std::vector<double> thresholds;
  double hysteresis = 0.0;
};
using Transform = std::variant<Linear, Power, Quantize>;

void validate(const Transform& t);

enum class Feature { Area, NormArea, BboxW, BboxH, Aspect, Angle, Lambda1, Lambda2, CursorX, CursorY };

std::string to_string(Feature f);
Feature feature_from_string(const std::string& s);

struct MappingSpec {
  std::string name;
  Feature feature = Feature::NormArea;
  Transform transform = Linear{};
  double smoother_alpha = 1.0;
  double clamp_lo = -1e300;
  double clamp_hi = 1e300;

  void validate() const;
};

void to_json(nlohmann::json& j, const MappingSpec& m);
void from_json(const nlohmann::json& j, MappingSpec& m);

struct MapperState {
  std::optional<double> smoothed;
  std::optional<int> level;
};

struct MappedValue {
  double value = 0.0;
  MapperState state;
};

// Steps the feature through normalize -> smooth -> transform -> clamp.
// Non-finite input is rejected: std::nullopt, |prev| must be kept by the caller.
// |calib| is only consulted for NormArea.
std::optional<MappedValue> apply(const MappingSpec& spec, double raw, const MapperState& prev,
                                 const Calibration* calib = nullptr);

// Level automaton used by Quantize: from |current|, climbing past thresholds[i]
// needs s > thresholds[i] + h and dropping below it needs s < thresholds[i] - h.
int quantize_level(const std::vector<double>& thresholds, double hysteresis, double s, std::optional<int> current);

// Raw feature value of |shape| (cursor features come from |cursor|).
double extract_feature(Feature f, const mouthseg::MouthShape& shape, const Calibration* calib,
                       std::optional<Point2> cursor = std::nullopt);

struct MouthStateThresholds {
  double t_closed = 0.15;
  double t_open = 0.5;
  double t_pucker_aspect = 0.9;
  double hysteresis = 0.05;
};

MouthState quantize_mouth_state(const mouthseg::MouthShape& shape, const Calibration& calib,
                                const MouthStateThresholds& thresholds = {},
                                std::optional<MouthState> previous = std::nullopt);

// Nearest standardized centroid; ties resolve in A, I, U, E, O order.
// Empty shapes select nothing.
std::optional<Vowel> classify_vowel(const mouthseg::MouthShape& shape, const Calibration& calib);

}  // namespace facegest::mapping
