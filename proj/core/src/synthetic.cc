#include "facegest/synthetic.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "facegest/errors.h"

namespace facegest::synthetic {

using frameio::Frame;

void draw_ellipse(Frame& frame, const EllipseBlob& b) {
  const double c = std::cos(deg_to_rad(b.angle_deg));
  const double s = std::sin(deg_to_rad(b.angle_deg));
  const double reach = std::max(b.semi_w, b.semi_h) + 1.0;
  const int x0 = std::max(0, static_cast<int>(std::floor(b.center.x - reach)));
  const int x1 = std::min(frame.width() - 1, static_cast<int>(std::ceil(b.center.x + reach)));
  const int y0 = std::max(0, static_cast<int>(std::floor(b.center.y - reach)));
  const int y1 = std::min(frame.height() - 1, static_cast<int>(std::ceil(b.center.y + reach)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - b.center.x;
      const double dy = y - b.center.y;
      const double u = (dx * c + dy * s) / b.semi_w;
      const double v = (-dx * s + dy * c) / b.semi_h;
      if (u * u + v * v <= 1.0) {
        for (int ch = 0; ch < frame.channels(); ++ch) frame.at(x, y, ch) = b.value;
      }
    }
  }
}

void draw_disk(Frame& frame, Point2 center, double radius, std::uint8_t value) {
  draw_ellipse(frame, EllipseBlob{center, radius, radius, 0.0, value});
}

void fill_rect(Frame& frame, int x0, int y0, int w, int h, std::uint8_t value) {
  for (int y = std::max(0, y0); y < std::min(frame.height(), y0 + h); ++y)
    for (int x = std::max(0, x0); x < std::min(frame.width(), x0 + w); ++x)
      for (int ch = 0; ch < frame.channels(); ++ch) frame.at(x, y, ch) = value;
}

// Area-weighted disk: each pixel blends toward |value| by its 8x8 supersampled coverage.
void draw_disk_smooth(Frame& frame, Point2 center, double radius, std::uint8_t value) {
  constexpr int kSub = 8;
  const int x0 = std::max(0, static_cast<int>(std::floor(center.x - radius - 1.0)));
  const int x1 = std::min(frame.width() - 1, static_cast<int>(std::ceil(center.x + radius + 1.0)));
  const int y0 = std::max(0, static_cast<int>(std::floor(center.y - radius - 1.0)));
  const int y1 = std::min(frame.height() - 1, static_cast<int>(std::ceil(center.y + radius + 1.0)));
  const double r2 = radius * radius;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      int inside = 0;
      for (int j = 0; j < kSub; ++j) {
        for (int i = 0; i < kSub; ++i) {
          const double dx = x - 0.5 + (i + 0.5) / kSub - center.x;
          const double dy = y - 0.5 + (j + 0.5) / kSub - center.y;
          if (dx * dx + dy * dy <= r2) ++inside;
        }
      }
      if (inside == 0) continue;
      const double cover = static_cast<double>(inside) / (kSub * kSub);
      for (int ch = 0; ch < frame.channels(); ++ch) {
        const double old = frame.at(x, y, ch);
        frame.at(x, y, ch) = static_cast<std::uint8_t>(std::lround(old + cover * (value - old)));
      }
    }
  }
}

Frame render(const NostrilFace& face) {
  Frame f(face.width, face.height, 1);
  std::fill(f.pixels().begin(), f.pixels().end(), face.background);
  draw_disk_smooth(f, face.left, face.radius, face.dark);
  draw_disk_smooth(f, face.right, face.radius, face.dark);
  if (face.mouth) draw_ellipse(f, *face.mouth);
  return f;
}

std::pair<Point2, Point2> nostril_pair(Point2 mid, double sep, double roll_deg) {
  const Point2 half{0.5 * sep * std::cos(deg_to_rad(roll_deg)), 0.5 * sep * std::sin(deg_to_rad(roll_deg))};
  return {mid - half, mid + half};
}

Frame render(const NoseFace& face) {
  Frame f(face.width, face.height, 1);
  std::fill(f.pixels().begin(), f.pixels().end(), face.background);
  for (Point2 eye : {face.eye_left, face.eye_right}) {
    const int cx = static_cast<int>(std::lround(eye.x));
    const int cy = static_cast<int>(std::lround(eye.y));
    fill_rect(f, cx - 7, cy - 3, 15, 7, face.eye);
  }
  const int nx = static_cast<int>(std::lround(face.nose.x));
  const int ny = static_cast<int>(std::lround(face.nose.y));
  if (f.contains(nx, ny)) f.at(nx, ny) = face.nose_value;
  return f;
}

Frame square_frame() {
  Frame f(32, 32, 1);
  std::fill(f.pixels().begin(), f.pixels().end(), 255);
  fill_rect(f, 8, 8, 10, 10, 0);
  return f;
}

namespace {

double roll_at(const NfSessionSpec& spec, int k) {
  if (spec.roll_period <= 0) return 0.0;
  return spec.roll_amplitude_deg * std::sin(2.0 * kPi * k / spec.roll_period);
}

bool mouth_open_at(const NfSessionSpec& spec, int k) {
  const int period = spec.closed_frames + spec.open_frames;
  return period > 0 && k % period >= spec.closed_frames;
}

Point2 mid_at(const NfSessionSpec& spec, int k) { return spec.start_mid + static_cast<double>(k) * spec.velocity; }

}  // namespace

NfGroundTruth nf_ground_truth(const NfSessionSpec& spec) {
  NfGroundTruth gt;
  for (int k = 0; k < spec.frames; ++k) {
    auto [l, r] = nostril_pair(mid_at(spec, k), spec.separation, roll_at(spec, k));
    gt.left.push_back(l);
    gt.right.push_back(r);
    gt.roll_deg.push_back(roll_at(spec, k));
    gt.mouth_open.push_back(mouth_open_at(spec, k));
  }
  return gt;
}

Frame nf_session_frame(const NfSessionSpec& spec, int k) {
  NostrilFace face;
  const double roll = roll_at(spec, k);
  const Point2 mid = mid_at(spec, k);
  std::tie(face.left, face.right) = nostril_pair(mid, spec.separation, roll);
  if (mouth_open_at(spec, k)) {
    const double r = deg_to_rad(roll);
    const double offset = 2.2 * spec.separation;
    face.mouth = EllipseBlob{mid + Point2{-offset * std::sin(r), offset * std::cos(r)}, spec.mouth_semi_w,
                             spec.mouth_semi_h, roll, 10};
  }
  return render(face);
}

nlohmann::json nf_session_config(const NfSessionSpec& spec) {
  const double max_area = kPi * spec.mouth_semi_w * spec.mouth_semi_h;
  return {{"tracker", "nf"},
          {"segmentation", {{"intensity_threshold", 60}, {"red_threshold", 80}, {"connectivity", 8}, {"min_area", 4}}},
          {"calibration", {{"source", "inline"}, {"max_area", max_area}, {"neutral_aspect", 1.7}}},
          {"mappings",
           {{{"name", "level"}, {"feature", "norm_area"}, {"transform", {{"kind", "linear"}, {"gain", 1.0}, {"offset", 0.0}}},
             {"smoother_alpha", 0.5}, {"clamp", {0.0, 1.0}}},
            {{"name", "openness"}, {"feature", "norm_area"},
             {"transform", {{"kind", "quantize"}, {"thresholds", {0.15, 0.5}}, {"hysteresis", 0.05}}},
             {"smoother_alpha", 1.0}}}},
          {"click", {{"t_open", 0.5}, {"t_close", 0.2}, {"min_open_frames", 3}}},
          {"application", "circle"},
          {"app_config", {{"gain", 1.0}, {"target_radii", {30.0}}, {"tolerance", 3.0}, {"hold_ms", 200}}}};
}

NfGroundTruth write_nf_session(const std::filesystem::path& dir, const NfSessionSpec& spec) {
  std::filesystem::create_directories(dir);
  frameio::FrameSequence seq;
  seq.base_dir = dir;
  for (int k = 0; k < spec.frames; ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%04d.pgm", k);
    frameio::write_pnm_file(dir / name, nf_session_frame(spec, k));
    seq.frames.push_back({name, k * spec.frame_interval_ms});
  }
  frameio::write_manifest(seq);
  std::ofstream out(dir / "session.json");
  if (!out) throw DataError("cannot write " + (dir / "session.json").string());
  out << nf_session_config(spec).dump(2) << '\n';
  return nf_ground_truth(spec);
}

}  // namespace facegest::synthetic
