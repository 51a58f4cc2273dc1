#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "facegest/geometry.h"

namespace facegest::frameio {

// Row-major 8-bit image, 1 (gray) or 3 (R,G,B) interleaved channels.
class Frame {
 public:
  Frame() = default;
  // Zero-filled frame. Throws DataError on non-positive size or bad channel count.
  Frame(int width, int height, int channels);
  // Takes ownership of |pixels|; its size must equal width * height * channels.
  Frame(int width, int height, int channels, std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool is_gray() const { return channels_ == 1; }
  bool empty() const { return pixels_.empty(); }

  std::uint8_t at(int x, int y, int c = 0) const {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  std::uint8_t& at(int x, int y, int c = 0) {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  std::span<const std::uint8_t> pixels() const { return pixels_; }
  std::span<std::uint8_t> pixels() { return pixels_; }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> pixels_;
};

// Rotatable sub-image. Pixel centers sit on integer coordinates, so the plain
// rectangle with top-left (x0, y0) and size w x h has center (x0 + (w-1)/2, y0 + (h-1)/2).
// |angle_deg| rotates the ROI's x axis towards +y in image coordinates
// (counter-clockwise in the y-down frame) and lies in (-90, 90].
struct OrientedRoi {
  Point2 center;
  double width = 0.0;
  double height = 0.0;
  double angle_deg = 0.0;

  static OrientedRoi from_rect(int x0, int y0, int w, int h);
  static OrientedRoi full_frame(const Frame& frame);

  friend bool operator==(const OrientedRoi&, const OrientedRoi&) = default;
};

void to_json(nlohmann::json& j, const OrientedRoi& roi);
void from_json(const nlohmann::json& j, OrientedRoi& roi);

// Wraps an angle in degrees into (-90, 90].
double wrap_half_turn(double angle_deg);

// Binary PGM (P5) / PPM (P6) with maxval 255. Comments are accepted in the header.
// Throws ParseError naming the byte offset of the first problem.
Frame read_pnm(std::span<const std::uint8_t> bytes);
// Canonical encoding: "P5\n<w> <h>\n255\n" (or P6) followed by the raw samples.
std::vector<std::uint8_t> write_pnm(const Frame& frame);

Frame read_pnm_file(const std::filesystem::path& path);
void write_pnm_file(const std::filesystem::path& path, const Frame& frame);

// BT.601 luma with integer rounding: Y = round(0.299 R + 0.587 G + 0.114 B).
// Gray frames are returned unchanged.
Frame luminance(const Frame& frame);
std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b);

// Resamples |roi| into a round(width) x round(height) frame with the source's
// channel count. Bilinear interpolation; sample points outside the source are 0.
Frame crop_oriented(const Frame& frame, const OrientedRoi& roi);

struct SequenceEntry {
  std::string file;
  std::int64_t t_ms = 0;
};

// Recorded frame sequence: <dir>/manifest.json with {"frames": [{"file", "t_ms"}]}.
// The manifest may carry additional top-level keys (e.g. "events", "eyes");
// they are kept verbatim in |extra|.
struct FrameSequence {
  std::filesystem::path base_dir;
  std::vector<SequenceEntry> frames;
  nlohmann::json extra = nlohmann::json::object();

  // Throws DataError when the frame file is missing or unreadable.
  Frame load(std::size_t index) const;
};

// Throws DataError on a missing/invalid manifest or non-increasing timestamps.
FrameSequence load_sequence(const std::filesystem::path& dir);
void write_manifest(const FrameSequence& seq);

}  // namespace facegest::frameio
