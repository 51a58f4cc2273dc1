#include "facegest/mapping.h"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "facegest/errors.h"

namespace facegest::mapping {

namespace {

constexpr double kScaleFloor = 1e-6;

double normalized_area(double area, double max_area) { return std::clamp(area / max_area, 0.0, 1.0); }

// Mean computed about the first element: exact for constant input.
double shifted_mean(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x - v.front();
  return v.front() + acc / static_cast<double>(v.size());
}

double population_std(const std::vector<double>& v) {
  const double m = shifted_mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string to_string(Vowel v) {
  static constexpr const char* kNames[] = {"A", "I", "U", "E", "O"};
  return kNames[static_cast<int>(v)];
}

Vowel vowel_from_string(const std::string& s) {
  for (Vowel v : kVowels) {
    if (to_string(v) == s) return v;
  }
  if (s.size() == 1) {
    const char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    for (Vowel v : kVowels) {
      if (to_string(v)[0] == upper) return v;
    }
  }
  throw DataError("unknown vowel \"" + s + "\"");
}

std::string to_string(MouthState s) {
  switch (s) {
    case MouthState::Closed: return "closed";
    case MouthState::SlightlyOpen: return "slightly_open";
    case MouthState::Open: return "open";
    case MouthState::Pucker: return "pucker";
  }
  return "closed";
}

MouthState mouth_state_from_string(const std::string& s) {
  for (auto m : {MouthState::Closed, MouthState::SlightlyOpen, MouthState::Open, MouthState::Pucker}) {
    if (to_string(m) == s) return m;
  }
  throw DataError("unknown mouth state \"" + s + "\"");
}

std::array<VowelFeature, 5> default_vowel_centroids() {
  return {{{0.9, 1.3}, {0.15, 3.0}, {0.25, 0.8}, {0.55, 2.0}, {0.6, 0.9}}};
}

void Calibration::validate() const {
  if (!(max_area > 0.0)) throw DataError("calibration max_area must be > 0");
  for (std::size_t i = 0; i < vowel_centroids.size(); ++i) {
    for (std::size_t j = i + 1; j < vowel_centroids.size(); ++j) {
      if (vowel_centroids[i].norm_area == vowel_centroids[j].norm_area &&
          vowel_centroids[i].aspect == vowel_centroids[j].aspect) {
        throw DataError("vowel centroids must be pairwise distinct");
      }
    }
  }
}

void to_json(nlohmann::json& j, const Calibration& c) {
  nlohmann::json centroids = nlohmann::json::object();
  for (Vowel v : kVowels) {
    const auto& f = c.vowel_centroids[static_cast<int>(v)];
    centroids[to_string(v)] = {f.norm_area, f.aspect};
  }
  j = {{"max_area", c.max_area},
       {"neutral_aspect", c.neutral_aspect},
       {"vowel_centroids", centroids},
       {"feature_scales", {c.feature_scales.norm_area, c.feature_scales.aspect}}};
}

void from_json(const nlohmann::json& j, Calibration& c) {
  c = Calibration{};
  c.max_area = j.at("max_area").get<double>();
  c.neutral_aspect = j.value("neutral_aspect", 1.0);
  if (j.contains("vowel_centroids")) {
    for (const auto& [name, value] : j["vowel_centroids"].items()) {
      c.vowel_centroids[static_cast<int>(vowel_from_string(name))] = {value.at(0).get<double>(),
                                                                       value.at(1).get<double>()};
    }
  }
  if (j.contains("feature_scales")) {
    c.feature_scales = {std::max(kScaleFloor, j["feature_scales"].at(0).get<double>()),
                        std::max(kScaleFloor, j["feature_scales"].at(1).get<double>())};
  }
  c.validate();
}

Calibration calibrate(const std::vector<mouthseg::MouthShape>& shapes,
                      const std::map<Vowel, std::vector<mouthseg::MouthShape>>& labeled) {
  std::vector<double> areas, aspects;
  for (const auto& s : shapes) {
    if (s.empty) continue;
    areas.push_back(static_cast<double>(s.area));
    aspects.push_back(s.aspect_ratio);
  }
  if (areas.empty()) throw DataError("calibration needs at least one non-empty mouth shape");

  Calibration c;
  c.max_area = *std::max_element(areas.begin(), areas.end());
  c.neutral_aspect = median(aspects);
  std::vector<double> norm_areas;
  norm_areas.reserve(areas.size());
  for (double a : areas) norm_areas.push_back(normalized_area(a, c.max_area));
  c.feature_scales = {std::max(kScaleFloor, population_std(norm_areas)), std::max(kScaleFloor, population_std(aspects))};

  const bool all_labeled = std::all_of(kVowels.begin(), kVowels.end(), [&](Vowel v) {
    auto it = labeled.find(v);
    return it != labeled.end() &&
           std::any_of(it->second.begin(), it->second.end(), [](const auto& s) { return !s.empty; });
  });
  if (all_labeled) {
    for (Vowel v : kVowels) {
      std::vector<double> na, asp;
      for (const auto& s : labeled.at(v)) {
        if (s.empty) continue;
        na.push_back(normalized_area(static_cast<double>(s.area), c.max_area));
        asp.push_back(s.aspect_ratio);
      }
      c.vowel_centroids[static_cast<int>(v)] = {shifted_mean(na), shifted_mean(asp)};
    }
  }
  c.validate();
  return c;
}

void validate(const Transform& t) {
  if (const auto* p = std::get_if<Power>(&t); p && !(p->gamma > 0.0)) throw DataError("power gamma must be > 0");
  if (const auto* q = std::get_if<Quantize>(&t)) {
    if (q->hysteresis < 0.0) throw DataError("quantize hysteresis must be >= 0");
    for (std::size_t i = 1; i < q->thresholds.size(); ++i) {
      const double gap = q->thresholds[i] - q->thresholds[i - 1];
      if (!(gap > 0.0)) throw DataError("quantize thresholds must be strictly ascending");
      if (!(q->hysteresis < gap)) throw DataError("quantize hysteresis must be below the smallest threshold gap");
    }
  }
}

std::string to_string(Feature f) {
  switch (f) {
    case Feature::Area: return "area";
    case Feature::NormArea: return "norm_area";
    case Feature::BboxW: return "bbox_w";
    case Feature::BboxH: return "bbox_h";
    case Feature::Aspect: return "aspect";
    case Feature::Angle: return "angle";
    case Feature::Lambda1: return "lambda1";
    case Feature::Lambda2: return "lambda2";
    case Feature::CursorX: return "cursor_x";
    case Feature::CursorY: return "cursor_y";
  }
  return "area";
}

Feature feature_from_string(const std::string& s) {
  for (auto f : {Feature::Area, Feature::NormArea, Feature::BboxW, Feature::BboxH, Feature::Aspect, Feature::Angle,
                 Feature::Lambda1, Feature::Lambda2, Feature::CursorX, Feature::CursorY}) {
    if (to_string(f) == s) return f;
  }
  throw DataError("unknown mapping feature \"" + s + "\"");
}

void MappingSpec::validate() const {
  if (!(smoother_alpha > 0.0 && smoother_alpha <= 1.0)) throw DataError("smoother_alpha must lie in (0, 1]");
  if (!(clamp_lo < clamp_hi)) throw DataError("mapping clamp requires lo < hi");
  mapping::validate(transform);
}

void to_json(nlohmann::json& j, const MappingSpec& m) {
  nlohmann::json t;
  std::visit(
      [&](const auto& tr) {
        using T = std::decay_t<decltype(tr)>;
        if constexpr (std::is_same_v<T, Linear>) {
          t = {{"kind", "linear"}, {"gain", tr.gain}, {"offset", tr.offset}};
        } else if constexpr (std::is_same_v<T, Power>) {
          t = {{"kind", "power"}, {"gain", tr.gain}, {"gamma", tr.gamma}};
        } else {
          t = {{"kind", "quantize"}, {"thresholds", tr.thresholds}, {"hysteresis", tr.hysteresis}};
        }
      },
      m.transform);
  j = {{"name", m.name},
       {"feature", to_string(m.feature)},
       {"transform", t},
       {"smoother_alpha", m.smoother_alpha},
       {"clamp", {m.clamp_lo, m.clamp_hi}}};
}

void from_json(const nlohmann::json& j, MappingSpec& m) {
  m = MappingSpec{};
  m.feature = feature_from_string(j.at("feature").get<std::string>());
  m.name = j.value("name", to_string(m.feature));
  const auto& t = j.at("transform");
  const std::string kind = t.at("kind").get<std::string>();
  if (kind == "linear") {
    m.transform = Linear{t.value("gain", 1.0), t.value("offset", 0.0)};
  } else if (kind == "power") {
    m.transform = Power{t.value("gain", 1.0), t.value("gamma", 1.0)};
  } else if (kind == "quantize") {
    m.transform = Quantize{t.at("thresholds").get<std::vector<double>>(), t.value("hysteresis", 0.0)};
  } else {
    throw DataError("unknown transform kind \"" + kind + "\"");
  }
  m.smoother_alpha = j.value("smoother_alpha", 1.0);
  if (j.contains("clamp")) {
    m.clamp_lo = j["clamp"].at(0).get<double>();
    m.clamp_hi = j["clamp"].at(1).get<double>();
  }
  m.validate();
}

int quantize_level(const std::vector<double>& thresholds, double hysteresis, double s, std::optional<int> current) {
  const int n = static_cast<int>(thresholds.size());
  if (!current) {
    int level = 0;
    while (level < n && s > thresholds[level]) ++level;
    return level;
  }
  int level = std::clamp(*current, 0, n);
  while (level < n && s > thresholds[level] + hysteresis) ++level;
  while (level > 0 && s < thresholds[level - 1] - hysteresis) --level;
  return level;
}

std::optional<MappedValue> apply(const MappingSpec& spec, double raw, const MapperState& prev,
                                 const Calibration* calib) {
  if (!std::isfinite(raw)) return std::nullopt;
  double x = raw;
  if (spec.feature == Feature::NormArea && calib) x = normalized_area(raw, calib->max_area);

  MappedValue out;
  out.state = prev;
  const double s = prev.smoothed ? *prev.smoothed + spec.smoother_alpha * (x - *prev.smoothed) : x;
  out.state.smoothed = s;

  double v = 0.0;
  std::visit(
      [&](const auto& tr) {
        using T = std::decay_t<decltype(tr)>;
        if constexpr (std::is_same_v<T, Linear>) {
          v = tr.gain * s + tr.offset;
        } else if constexpr (std::is_same_v<T, Power>) {
          v = tr.gain * std::pow(std::max(s, 0.0), tr.gamma);
        } else {
          const int level = quantize_level(tr.thresholds, tr.hysteresis, s, prev.level);
          out.state.level = level;
          v = level;
        }
      },
      spec.transform);
  out.value = std::clamp(v, spec.clamp_lo, spec.clamp_hi);
  return out;
}

double extract_feature(Feature f, const mouthseg::MouthShape& shape, const Calibration* calib,
                       std::optional<Point2> cursor) {
  switch (f) {
    case Feature::Area: return static_cast<double>(shape.area);
    case Feature::NormArea: return calib ? normalized_area(static_cast<double>(shape.area), calib->max_area)
                                         : static_cast<double>(shape.area);
    case Feature::BboxW: return shape.bbox_w;
    case Feature::BboxH: return shape.bbox_h;
    case Feature::Aspect: return shape.aspect_ratio;
    case Feature::Angle: return shape.principal_angle;
    case Feature::Lambda1: return shape.lambda1;
    case Feature::Lambda2: return shape.lambda2;
    case Feature::CursorX: return cursor ? cursor->x : std::nan("");
    case Feature::CursorY: return cursor ? cursor->y : std::nan("");
  }
  return std::nan("");
}

MouthState quantize_mouth_state(const mouthseg::MouthShape& shape, const Calibration& calib,
                                const MouthStateThresholds& t, std::optional<MouthState> previous) {
  const double a = normalized_area(static_cast<double>(shape.area), calib.max_area);
  if (!shape.empty && a >= t.t_closed && shape.aspect_ratio < t.t_pucker_aspect) return MouthState::Pucker;

  std::optional<int> current;
  if (previous && *previous != MouthState::Pucker) current = static_cast<int>(*previous);
  // Closed=0, SlightlyOpen=1, Open=2; without a previous level the plain thresholds apply.
  int level;
  if (!current) {
    level = a < t.t_closed ? 0 : (a < t.t_open ? 1 : 2);
  } else {
    const double th[2] = {t.t_closed, t.t_open};
    level = *current;
    while (level < 2 && a >= th[level] + t.hysteresis) ++level;
    while (level > 0 && a < th[level - 1] - t.hysteresis) --level;
  }
  return static_cast<MouthState>(level);
}

std::optional<Vowel> classify_vowel(const mouthseg::MouthShape& shape, const Calibration& calib) {
  if (shape.empty) return std::nullopt;
  const double na = normalized_area(static_cast<double>(shape.area), calib.max_area);
  const double sa = calib.feature_scales.norm_area;
  const double sb = calib.feature_scales.aspect;
  // Squared distances closer than this count as ties.
  constexpr double kTie = 1e-12;
  std::optional<Vowel> best;
  double best_d = 0.0;
  for (Vowel v : kVowels) {
    const auto& c = calib.vowel_centroids[static_cast<int>(v)];
    const double da = (na - c.norm_area) / sa;
    const double db = (shape.aspect_ratio - c.aspect) / sb;
    const double d = da * da + db * db;
    if (!best || d < best_d - kTie) {
      best = v;
      best_d = d;
    }
  }
  return best;
}

}  // namespace facegest::mapping
