#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "facegest/frameio.h"
#include "facegest/geometry.h"

// Procedural test imagery with known ground truth.
namespace facegest::synthetic {

struct EllipseBlob {
  Point2 center;
  double semi_w = 10.0;
  double semi_h = 5.0;
  double angle_deg = 0.0;
  std::uint8_t value = 10;
};

// Paints every pixel center inside the (rotated) ellipse.
void draw_ellipse(frameio::Frame& frame, const EllipseBlob& blob);
void draw_disk(frameio::Frame& frame, Point2 center, double radius, std::uint8_t value);
// Anti-aliased variant: edge pixels blend by covered area.
void draw_disk_smooth(frameio::Frame& frame, Point2 center, double radius, std::uint8_t value);
void fill_rect(frameio::Frame& frame, int x0, int y0, int w, int h, std::uint8_t value);

struct NostrilFace {
  int width = 320;
  int height = 240;
  Point2 left{100.0, 80.0};
  Point2 right{140.0, 80.0};
  double radius = 5.0;
  std::uint8_t background = 180;
  std::uint8_t dark = 20;
  std::optional<EllipseBlob> mouth;
};

frameio::Frame render(const NostrilFace& face);

// Nostril pair of separation |sep| centred on |mid| and rolled by |roll_deg|.
std::pair<Point2, Point2> nostril_pair(Point2 mid, double sep, double roll_deg);

struct NoseFace {
  int width = 320;
  int height = 240;
  Point2 eye_left{120.0, 90.0};
  Point2 eye_right{200.0, 90.0};
  Point2 nose{160.0, 130.0};
  std::uint8_t background = 120;
  std::uint8_t eye = 30;
  std::uint8_t nose_value = 255;
};

// Eyes are 15x7 dark bars, the nose tip a single bright pixel.
frameio::Frame render(const NoseFace& face);

// 32x32 white frame with a filled 10x10 black square at (8, 8).
frameio::Frame square_frame();

struct NfSessionSpec {
  int frames = 60;
  std::int64_t frame_interval_ms = 66;
  Point2 start_mid{130.0, 70.0};
  Point2 velocity{1.0, 0.5};  // px per frame
  double separation = 40.0;
  double roll_amplitude_deg = 12.0;
  int roll_period = 40;
  // Mouth cycle: closed frames followed by open frames.
  int closed_frames = 4;
  int open_frames = 6;
  double mouth_semi_w = 24.0;
  double mouth_semi_h = 14.0;
};

struct NfGroundTruth {
  std::vector<Point2> left;
  std::vector<Point2> right;
  std::vector<double> roll_deg;
  std::vector<bool> mouth_open;
};

NfGroundTruth nf_ground_truth(const NfSessionSpec& spec);
frameio::Frame nf_session_frame(const NfSessionSpec& spec, int index);

// Writes frame_NNNN.pgm files plus manifest.json into |dir| and a matching
// session config (session.json) with inline calibration.
NfGroundTruth write_nf_session(const std::filesystem::path& dir, const NfSessionSpec& spec = {});
nlohmann::json nf_session_config(const NfSessionSpec& spec);

}  // namespace facegest::synthetic
