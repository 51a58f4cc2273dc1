#pragma once

#include <optional>
#include <utility>

#include <nlohmann/json.hpp>

#include "facegest/frameio.h"
#include "facegest/geometry.h"

namespace facegest::trackers {

// Every constant of the landmark trackers. Lengths are multiples of the
// nostril separation (NF) or the inter-ocular distance (NP) unless noted.
struct TrackerConfig {
  // NF: fraction of darkest pixels in the init region considered nostril candidates.
  double dark_fraction = 0.02;
  // NF: accepted pair distance as a fraction of the image width.
  double pair_sep_min = 0.05;
  double pair_sep_max = 0.25;
  double max_pair_tilt_deg = 30.0;
  double window_radius = 1.0;
  // MSROI geometry relative to the nostril pair.
  double msroi_offset = 2.2;
  double msroi_width = 3.5;
  double msroi_height = 2.5;
  double ema_alpha = 0.9;

  // NP: eye search radius, template half-size and nose ROI depth.
  double eye_search_radius = 0.5;
  double eye_template_half = 0.25;
  double nose_roi_depth = 1.0;
  // NP: mean absolute difference (gray levels) above which the eyes are lost.
  double sad_ceiling = 40.0;

  void validate() const;
};

void to_json(nlohmann::json& j, const TrackerConfig& c);
void from_json(const nlohmann::json& j, TrackerConfig& c);

// Inclusive pixel rectangle.
struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = -1;
  int y1 = -1;

  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

void to_json(nlohmann::json& j, const PixelRect& r);

struct NostrilState {
  Point2 left;
  Point2 right;
  double separation = 0.0;
  PixelRect search_window;
  bool lost = true;
  long frame_index = 0;
  // Luma level at or below which a pixel counts as nostril-dark; fixed at init.
  int dark_level = 0;

  friend bool operator==(const NostrilState&, const NostrilState&) = default;
};

void to_json(nlohmann::json& j, const NostrilState& s);

// Eye appearance captured at initialization (gray patches centred on each eye).
struct EyeTemplates {
  frameio::Frame left;
  frameio::Frame right;
};

struct NoseState {
  Point2 eye_left;
  Point2 eye_right;
  Point2 nose;
  Point2 smoothed_nose;
  bool lost = true;
  double eye_score = 0.0;
  EyeTemplates templates;
};

void to_json(nlohmann::json& j, const NoseState& s);

struct Screen {
  int width = 1024;
  int height = 768;
};

// Nostril finder. Searches the central 60% of the width and the upper half of
// the frame for the best-scoring pair of dark components. lost = true when no pair qualifies.
NostrilState nf_init(const frameio::Frame& frame, const TrackerConfig& config);

// Re-detects each nostril inside a window of window_radius * separation around
// its previous center, then EMA-smooths. lost = true when either nostril leaves its window.
NostrilState nf_update(const NostrilState& state, const frameio::Frame& frame, const TrackerConfig& config);

// Mouth-shadow ROI below the nostril line. Throws DomainError for a lost state.
frameio::OrientedRoi nf_msroi(const NostrilState& state, const TrackerConfig& config);

// Captures eye templates at the supplied eye positions and locates the nose.
NoseState np_init(const frameio::Frame& frame, Point2 eye_left, Point2 eye_right, const TrackerConfig& config);

// Template-matches the eyes near their previous positions, then takes the
// brightest pixel of the nose ROI below them (ties: smallest row, then column).
NoseState np_track(const NoseState& state, const frameio::Frame& frame, const TrackerConfig& config);

// screen_center + gain * (smoothed_nose - reference), clamped to the screen.
// A lost state leaves |previous| unchanged.
Point2 np_cursor(const NoseState& state, double gain, Point2 reference, const Screen& screen, Point2 previous);

struct Click {};

// Open-then-close mouth gesture with hysteresis between t_close and t_open.
class ClickDetector {
 public:
  ClickDetector() = default;
  ClickDetector(double t_open, double t_close, int min_open_frames);

  double t_open() const { return t_open_; }
  double t_close() const { return t_close_; }
  int min_open_frames() const { return min_open_frames_; }
  // 0 while idle, otherwise the number of consecutive open samples.
  int open_frames() const { return open_frames_; }

  std::optional<Click> step(double normalized_area);

 private:
  double t_open_ = 0.5;
  double t_close_ = 0.2;
  int min_open_frames_ = 3;
  int open_frames_ = 0;
};

std::pair<ClickDetector, std::optional<Click>> mouth_click(ClickDetector detector, double normalized_area);

// Head-worn camera mode: the configured ROI for every frame, never lost.
class FixedRoiTracker {
 public:
  explicit FixedRoiTracker(frameio::OrientedRoi roi) : roi_(roi) {}
  const frameio::OrientedRoi& next(const frameio::Frame&) const { return roi_; }

 private:
  frameio::OrientedRoi roi_;
};

}  // namespace facegest::trackers
