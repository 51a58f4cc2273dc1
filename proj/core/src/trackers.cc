#include "facegest/trackers.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "facegest/errors.h"
#include "facegest/mouthseg.h"

namespace facegest::trackers {

namespace {

using frameio::Frame;

Point2 ema(Point2 prev, Point2 measured, double alpha) {
  // prev + alpha * (measured - prev) keeps a fixed point exactly fixed.
  return {prev.x + alpha * (measured.x - prev.x), prev.y + alpha * (measured.y - prev.y)};
}

PixelRect clip(PixelRect r, const Frame& f) {
  return {std::max(r.x0, 0), std::max(r.y0, 0), std::min(r.x1, f.width() - 1), std::min(r.y1, f.height() - 1)};
}

PixelRect around(Point2 c, double radius) {
  const int cx = static_cast<int>(std::lround(c.x));
  const int cy = static_cast<int>(std::lround(c.y));
  const int r = static_cast<int>(std::ceil(radius));
  return {cx - r, cy - r, cx + r, cy + r};
}

PixelRect unite(PixelRect a, PixelRect b) {
  return {std::min(a.x0, b.x0), std::min(a.y0, b.y0), std::max(a.x1, b.x1), std::max(a.y1, b.y1)};
}

struct DarkBlob {
  Point2 center;
  long size = 0;
};

// Darkness-weighted centre over the component box grown by two pixels, so partly
// covered edge pixels pull the estimate below pixel resolution. Background is the
// median of the grown box's border; pixels of other components are skipped.
Point2 refine_center(const Frame& gray, PixelRect rect, const mouthseg::Labeling& labeling, int label,
                     PixelRect box, Point2 fallback) {
  constexpr int kGrow = 2;
  const PixelRect g = clip({box.x0 - kGrow, box.y0 - kGrow, box.x1 + kGrow, box.y1 + kGrow}, gray);
  auto other = [&](int x, int y) {
    if (x < rect.x0 || x > rect.x1 || y < rect.y0 || y > rect.y1) return false;
    const int l = labeling.label_at(x - rect.x0, y - rect.y0);
    return l != 0 && l != label;
  };
  std::vector<int> ring;
  for (int y = g.y0; y <= g.y1; ++y) {
    for (int x = g.x0; x <= g.x1; ++x) {
      if ((y == g.y0 || y == g.y1 || x == g.x0 || x == g.x1) && !other(x, y)) ring.push_back(gray.at(x, y));
    }
  }
  if (ring.empty()) return fallback;
  std::nth_element(ring.begin(), ring.begin() + ring.size() / 2, ring.end());
  const double bg = ring[ring.size() / 2];
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (int y = g.y0; y <= g.y1; ++y) {
    for (int x = g.x0; x <= g.x1; ++x) {
      if (other(x, y)) continue;
      const double w = std::max(0.0, bg - gray.at(x, y));
      sw += w;
      sx += w * x;
      sy += w * y;
    }
  }
  if (sw <= 0.0) return fallback;
  return {sx / sw, sy / sw};
}

// Components of pixels with luma <= dark_level inside |rect| (already clipped).
std::vector<DarkBlob> dark_blobs(const Frame& gray, PixelRect rect, int dark_level) {
  std::vector<DarkBlob> out;
  if (rect.x1 < rect.x0 || rect.y1 < rect.y0) return out;
  mouthseg::BlobMask mask(rect.x1 - rect.x0 + 1, rect.y1 - rect.y0 + 1);
  for (int y = rect.y0; y <= rect.y1; ++y) {
    for (int x = rect.x0; x <= rect.x1; ++x) {
      if (gray.at(x, y) <= dark_level) mask.set(x - rect.x0, y - rect.y0);
    }
  }
  const auto labeling = mouthseg::label_components(mask, 8);
  const std::size_t n = labeling.components.size();
  std::vector<PixelRect> boxes(n, PixelRect{rect.x1, rect.y1, rect.x0, rect.y0});
  for (int y = rect.y0; y <= rect.y1; ++y) {
    for (int x = rect.x0; x <= rect.x1; ++x) {
      const int label = labeling.label_at(x - rect.x0, y - rect.y0);
      if (label == 0) continue;
      auto& b = boxes[label - 1];
      b = {std::min(b.x0, x), std::min(b.y0, y), std::max(b.x1, x), std::max(b.y1, y)};
    }
  }
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = labeling.components[i];
    const Point2 local = c.centroid();
    out.push_back({refine_center(gray, rect, labeling, static_cast<int>(i) + 1, boxes[i],
                                 {local.x + rect.x0, local.y + rect.y0}),
                   c.size});
  }
  return out;
}

// Largest level whose cumulative count stays within the dark fraction; the
// darkest populated level when even that one exceeds it.
int dark_level_for(const Frame& gray, PixelRect rect, double fraction) {
  std::array<long, 256> hist{};
  long total = 0;
  for (int y = rect.y0; y <= rect.y1; ++y) {
    for (int x = rect.x0; x <= rect.x1; ++x) {
      ++hist[gray.at(x, y)];
      ++total;
    }
  }
  const double target = fraction * static_cast<double>(total);
  long cumulative = 0;
  int level = -1;
  int darkest = -1;
  for (int v = 0; v < 256; ++v) {
    if (hist[v] > 0 && darkest < 0) darkest = v;
    cumulative += hist[v];
    if (static_cast<double>(cumulative) <= target) level = v;
  }
  return std::max(level, darkest);
}

std::optional<DarkBlob> nearest_blob(const Frame& gray, Point2 previous, double radius, int dark_level,
                                     PixelRect& window) {
  window = clip(around(previous, radius), gray);
  std::optional<DarkBlob> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& blob : dark_blobs(gray, window, dark_level)) {
    const double d = distance(blob.center, previous);
    if (d <= radius && d < best_d) {
      best = blob;
      best_d = d;
    }
  }
  return best;
}

double mean_abs_diff(const Frame& gray, const Frame& tmpl, int cx, int cy) {
  const int hw = tmpl.width() / 2;
  const int hh = tmpl.height() / 2;
  long sum = 0;
  long count = 0;
  for (int v = 0; v < tmpl.height(); ++v) {
    for (int u = 0; u < tmpl.width(); ++u) {
      const int x = cx - hw + u;
      const int y = cy - hh + v;
      if (!gray.contains(x, y)) continue;
      sum += std::abs(static_cast<int>(gray.at(x, y)) - static_cast<int>(tmpl.at(u, v)));
      ++count;
    }
  }
  if (count * 2 < static_cast<long>(tmpl.width()) * tmpl.height()) return std::numeric_limits<double>::infinity();
  return static_cast<double>(sum) / count;
}

Frame capture_patch(const Frame& gray, Point2 center, int half) {
  Frame patch(2 * half + 1, 2 * half + 1, 1);
  const int cx = static_cast<int>(std::lround(center.x));
  const int cy = static_cast<int>(std::lround(center.y));
  for (int v = 0; v < patch.height(); ++v) {
    for (int u = 0; u < patch.width(); ++u) {
      const int x = cx - half + u;
      const int y = cy - half + v;
      patch.at(u, v) = gray.contains(x, y) ? gray.at(x, y) : 0;
    }
  }
  return patch;
}

struct Match {
  Point2 position;
  double score = std::numeric_limits<double>::infinity();
};

Match match_template(const Frame& gray, const Frame& tmpl, Point2 previous, double radius) {
  const int px = static_cast<int>(std::lround(previous.x));
  const int py = static_cast<int>(std::lround(previous.y));
  const int r = static_cast<int>(std::ceil(radius));
  Match best;
  // Row-major scan with strict '<' keeps the smallest (row, col) on ties.
  for (int y = py - r; y <= py + r; ++y) {
    for (int x = px - r; x <= px + r; ++x) {
      const double s = mean_abs_diff(gray, tmpl, x, y);
      if (s < best.score) best = {{static_cast<double>(x), static_cast<double>(y)}, s};
    }
  }
  return best;
}

std::optional<Point2> brightest_in_nose_roi(const Frame& gray, Point2 eye_left, Point2 eye_right, double depth) {
  const double interocular = distance(eye_left, eye_right);
  const double eye_y = 0.5 * (eye_left.y + eye_right.y);
  const PixelRect roi = clip({static_cast<int>(std::lround(std::min(eye_left.x, eye_right.x))),
                              static_cast<int>(std::lround(eye_y)),
                              static_cast<int>(std::lround(std::max(eye_left.x, eye_right.x))),
                              static_cast<int>(std::lround(eye_y + depth * interocular))},
                             gray);
  if (roi.x1 < roi.x0 || roi.y1 < roi.y0) return std::nullopt;
  int best = -1;
  Point2 where;
  for (int y = roi.y0; y <= roi.y1; ++y) {
    for (int x = roi.x0; x <= roi.x1; ++x) {
      if (gray.at(x, y) > best) {
        best = gray.at(x, y);
        where = {static_cast<double>(x), static_cast<double>(y)};
      }
    }
  }
  return where;
}

}  // namespace

void TrackerConfig::validate() const {
  if (!(dark_fraction > 0.0 && dark_fraction < 1.0)) throw DataError("dark_fraction must lie in (0, 1)");
  if (!(pair_sep_min > 0.0 && pair_sep_min < pair_sep_max)) throw DataError("pair_sep range must be 0 < min < max");
  if (!(max_pair_tilt_deg > 0.0)) throw DataError("max_pair_tilt must be > 0");
  for (double m : {window_radius, msroi_offset, msroi_width, msroi_height, eye_search_radius, eye_template_half,
                   nose_roi_depth, sad_ceiling}) {
    if (!(m > 0.0)) throw DataError("tracker multipliers must be > 0");
  }
  if (!(ema_alpha > 0.0 && ema_alpha <= 1.0)) throw DataError("ema_alpha must lie in (0, 1]");
}

void to_json(nlohmann::json& j, const TrackerConfig& c) {
  j = {{"dark_fraction", c.dark_fraction},
       {"pair_sep_range", {c.pair_sep_min, c.pair_sep_max}},
       {"max_pair_tilt", c.max_pair_tilt_deg},
       {"window_radius", c.window_radius},
       {"msroi_offset", c.msroi_offset},
       {"msroi_width", c.msroi_width},
       {"msroi_height", c.msroi_height},
       {"ema_alpha", c.ema_alpha},
       {"eye_search_radius", c.eye_search_radius},
       {"eye_template_half", c.eye_template_half},
       {"nose_roi_depth", c.nose_roi_depth},
       {"sad_ceiling", c.sad_ceiling}};
}

void from_json(const nlohmann::json& j, TrackerConfig& c) {
  TrackerConfig d;
  c.dark_fraction = j.value("dark_fraction", d.dark_fraction);
  if (j.contains("pair_sep_range")) {
    c.pair_sep_min = j["pair_sep_range"].at(0).get<double>();
    c.pair_sep_max = j["pair_sep_range"].at(1).get<double>();
  }
  c.max_pair_tilt_deg = j.value("max_pair_tilt", d.max_pair_tilt_deg);
  c.window_radius = j.value("window_radius", d.window_radius);
  c.msroi_offset = j.value("msroi_offset", d.msroi_offset);
  c.msroi_width = j.value("msroi_width", d.msroi_width);
  c.msroi_height = j.value("msroi_height", d.msroi_height);
  c.ema_alpha = j.value("ema_alpha", d.ema_alpha);
  c.eye_search_radius = j.value("eye_search_radius", d.eye_search_radius);
  c.eye_template_half = j.value("eye_template_half", d.eye_template_half);
  c.nose_roi_depth = j.value("nose_roi_depth", d.nose_roi_depth);
  c.sad_ceiling = j.value("sad_ceiling", d.sad_ceiling);
  c.validate();
}

void to_json(nlohmann::json& j, const PixelRect& r) { j = nlohmann::json::array({r.x0, r.y0, r.x1, r.y1}); }

void to_json(nlohmann::json& j, const NostrilState& s) {
  j = {{"left", s.left},
       {"right", s.right},
       {"separation", s.separation},
       {"search_window", s.search_window},
       {"lost", s.lost},
       {"frame_index", s.frame_index}};
}

void to_json(nlohmann::json& j, const NoseState& s) {
  j = {{"eye_left", s.eye_left},
       {"eye_right", s.eye_right},
       {"nose", s.nose},
       {"smoothed_nose", s.smoothed_nose},
       {"lost", s.lost}};
}

NostrilState nf_init(const Frame& frame, const TrackerConfig& config) {
  const Frame gray = frameio::luminance(frame);
  const PixelRect region = clip({static_cast<int>(std::lround(0.2 * gray.width())), 0,
                                 static_cast<int>(std::lround(0.8 * gray.width())) - 1, gray.height() / 2 - 1},
                                gray);
  NostrilState state;
  state.lost = true;
  state.search_window = region;
  if (region.x1 < region.x0 || region.y1 < region.y0) return state;

  const int level = dark_level_for(gray, region, config.dark_fraction);
  const auto blobs = dark_blobs(gray, region, level);
  const double min_d = config.pair_sep_min * gray.width();
  const double max_d = config.pair_sep_max * gray.width();

  double best_score = -1.0;
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    for (std::size_t j = i + 1; j < blobs.size(); ++j) {
      const auto& a = blobs[i];
      const auto& b = blobs[j];
      const double d = distance(a.center, b.center);
      if (d < min_d || d > max_d) continue;
      const double tilt = rad_to_deg(std::atan2(std::abs(b.center.y - a.center.y), std::abs(b.center.x - a.center.x)));
      if (tilt > config.max_pair_tilt_deg) continue;
      const double small = static_cast<double>(std::min(a.size, b.size));
      const double large = static_cast<double>(std::max(a.size, b.size));
      if (large >= 3.0 * small) continue;
      const double score = (small / large) * std::cos(deg_to_rad(tilt));
      if (score > best_score) {
        best_score = score;
        const bool a_left = a.center.x < b.center.x;
        state.left = a_left ? a.center : b.center;
        state.right = a_left ? b.center : a.center;
      }
    }
  }
  if (best_score < 0.0 || !(state.left.x < state.right.x)) return state;
  state.lost = false;
  state.separation = distance(state.left, state.right);
  state.dark_level = level;
  return state;
}

NostrilState nf_update(const NostrilState& state, const Frame& frame, const TrackerConfig& config) {
  NostrilState next = state;
  next.frame_index = state.frame_index + 1;
  if (state.lost) return next;

  const Frame gray = frameio::luminance(frame);
  const double radius = config.window_radius * state.separation;
  PixelRect left_window;
  PixelRect right_window;
  const auto left = nearest_blob(gray, state.left, radius, state.dark_level, left_window);
  const auto right = nearest_blob(gray, state.right, radius, state.dark_level, right_window);
  next.search_window = unite(left_window, right_window);
  if (!left || !right) {
    next.lost = true;
    return next;
  }
  const Point2 l = ema(state.left, left->center, config.ema_alpha);
  const Point2 r = ema(state.right, right->center, config.ema_alpha);
  // Both windows settled on the same blob, or the pair flipped.
  if (!(l.x < r.x) || distance(left->center, right->center) < 0.25 * state.separation) {
    next.lost = true;
    return next;
  }
  next.left = l;
  next.right = r;
  next.separation = distance(l, r);
  return next;
}

frameio::OrientedRoi nf_msroi(const NostrilState& state, const TrackerConfig& config) {
  if (state.lost) throw DomainError("MSROI requested from a lost nostril state");
  const double dx = state.right.x - state.left.x;
  const double dy = state.right.y - state.left.y;
  const double angle = std::atan2(dy, dx);
  const double sep = state.separation;
  const Point2 mid = 0.5 * (state.left + state.right);
  // Downward normal of the nostril line: the ROI's +y axis (-sin, cos).
  const Point2 normal{-std::sin(angle), std::cos(angle)};
  frameio::OrientedRoi roi;
  roi.center = mid + (config.msroi_offset * sep) * normal;
  roi.width = config.msroi_width * sep;
  roi.height = config.msroi_height * sep;
  roi.angle_deg = frameio::wrap_half_turn(rad_to_deg(angle));
  return roi;
}

NoseState np_init(const Frame& frame, Point2 eye_left, Point2 eye_right, const TrackerConfig& config) {
  if (!(eye_left.x < eye_right.x)) throw DomainError("np_init requires eye_left.x < eye_right.x");
  const Frame gray = frameio::luminance(frame);
  const double interocular = distance(eye_left, eye_right);
  const int half = std::max(2, static_cast<int>(std::lround(config.eye_template_half * interocular)));

  NoseState s;
  s.eye_left = {std::round(eye_left.x), std::round(eye_left.y)};
  s.eye_right = {std::round(eye_right.x), std::round(eye_right.y)};
  s.templates = {capture_patch(gray, s.eye_left, half), capture_patch(gray, s.eye_right, half)};
  const auto nose = brightest_in_nose_roi(gray, s.eye_left, s.eye_right, config.nose_roi_depth);
  s.lost = !nose.has_value();
  if (nose) s.nose = s.smoothed_nose = *nose;
  return s;
}

NoseState np_track(const NoseState& state, const Frame& frame, const TrackerConfig& config) {
  NoseState next = state;
  if (state.lost || state.templates.left.empty()) {
    next.lost = true;
    return next;
  }
  const Frame gray = frameio::luminance(frame);
  const double radius = config.eye_search_radius * distance(state.eye_left, state.eye_right);
  const Match l = match_template(gray, state.templates.left, state.eye_left, radius);
  const Match r = match_template(gray, state.templates.right, state.eye_right, radius);
  next.eye_score = std::max(l.score, r.score);
  if (next.eye_score > config.sad_ceiling || !(l.position.x < r.position.x)) {
    next.lost = true;
    return next;
  }
  next.eye_left = l.position;
  next.eye_right = r.position;
  const auto nose = brightest_in_nose_roi(gray, next.eye_left, next.eye_right, config.nose_roi_depth);
  if (!nose) {
    next.lost = true;
    return next;
  }
  next.nose = *nose;
  next.smoothed_nose = ema(state.smoothed_nose, *nose, config.ema_alpha);
  return next;
}

Point2 np_cursor(const NoseState& state, double gain, Point2 reference, const Screen& screen, Point2 previous) {
  if (state.lost) return previous;
  const Point2 center{(screen.width - 1) / 2.0, (screen.height - 1) / 2.0};
  const Point2 raw = center + gain * (state.smoothed_nose - reference);
  return {std::clamp(raw.x, 0.0, static_cast<double>(screen.width - 1)),
          std::clamp(raw.y, 0.0, static_cast<double>(screen.height - 1))};
}

ClickDetector::ClickDetector(double t_open, double t_close, int min_open_frames)
    : t_open_(t_open), t_close_(t_close), min_open_frames_(min_open_frames) {
  if (!(t_close > 0.0 && t_close < t_open && t_open <= 1.0)) {
    throw DataError("click thresholds must satisfy 0 < t_close < t_open <= 1");
  }
  if (min_open_frames < 1) throw DataError("min_open_frames must be >= 1");
}

std::optional<Click> ClickDetector::step(double a) {
  if (a >= t_open_) {
    ++open_frames_;
    return std::nullopt;
  }
  if (a <= t_close_ && open_frames_ > 0) {
    const bool long_enough = open_frames_ >= min_open_frames_;
    open_frames_ = 0;
    if (long_enough) return Click{};
  }
  return std::nullopt;
}

std::pair<ClickDetector, std::optional<Click>> mouth_click(ClickDetector detector, double normalized_area) {
  auto event = detector.step(normalized_area);
  return {detector, event};
}

}  // namespace facegest::trackers
