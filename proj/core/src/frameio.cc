#include "facegest/frameio.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

#include "facegest/errors.h"

namespace facegest::frameio {

namespace {

void check_shape(int width, int height, int channels) {
  if (width < 1 || height < 1) {
    throw DataError("frame dimensions must be positive, got " + std::to_string(width) + "x" +
                    std::to_string(height));
  }
  if (channels != 1 && channels != 3) {
    throw DataError("frame must have 1 or 3 channels, got " + std::to_string(channels));
  }
}

class HeaderReader {
 public:
  HeaderReader(std::span<const std::uint8_t> bytes, std::size_t start) : bytes_(bytes), pos_(start) {}

  std::size_t pos() const { return pos_; }
  std::size_t token_start() const { return token_start_; }

  void skip_whitespace_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  // Requires at least one whitespace byte (or comment) before the token.
  long read_uint(const char* what) {
    const std::size_t before = pos_;
    skip_whitespace_and_comments();
    if (pos_ == before) throw ParseError(std::string("expected whitespace before ") + what, pos_);
    if (pos_ >= bytes_.size()) throw ParseError(std::string("truncated header, missing ") + what, pos_);
    if (!std::isdigit(bytes_[pos_])) throw ParseError(std::string("expected digit for ") + what, pos_);
    token_start_ = pos_;
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000) throw ParseError(std::string(what) + " too large", pos_);
      ++pos_;
    }
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void expect_single_whitespace() {
    if (pos_ >= bytes_.size()) throw ParseError("truncated header after maxval", pos_);
    if (!std::isspace(bytes_[pos_])) throw ParseError("expected whitespace after maxval", pos_);
    ++pos_;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_;
  std::size_t token_start_ = 0;
};

std::uint8_t sample_bilinear(const Frame& frame, double x, double y, int c) {
  // Points outside the pixel-center hull are padding.
  constexpr double kEdge = 1e-9;
  if (x < -kEdge || y < -kEdge || x > frame.width() - 1 + kEdge || y > frame.height() - 1 + kEdge) {
    return 0;
  }
  x = std::clamp(x, 0.0, static_cast<double>(frame.width() - 1));
  y = std::clamp(y, 0.0, static_cast<double>(frame.height() - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, frame.width() - 1);
  const int y1 = std::min(y0 + 1, frame.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = (1.0 - fx) * frame.at(x0, y0, c) + fx * frame.at(x1, y0, c);
  const double bottom = (1.0 - fx) * frame.at(x0, y1, c) + fx * frame.at(x1, y1, c);
  const double v = (1.0 - fy) * top + fy * bottom;
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

Frame::Frame(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
  check_shape(width, height, channels);
  pixels_.assign(static_cast<std::size_t>(width) * height * channels, 0);
}

Frame::Frame(int width, int height, int channels, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), channels_(channels), pixels_(std::move(pixels)) {
  check_shape(width, height, channels);
  if (pixels_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw DataError("pixel buffer holds " + std::to_string(pixels_.size()) + " samples, expected " +
                    std::to_string(static_cast<std::size_t>(width) * height * channels));
  }
}

OrientedRoi OrientedRoi::from_rect(int x0, int y0, int w, int h) {
  return {{x0 + (w - 1) / 2.0, y0 + (h - 1) / 2.0}, static_cast<double>(w), static_cast<double>(h), 0.0};
}

OrientedRoi OrientedRoi::full_frame(const Frame& frame) {
  return from_rect(0, 0, frame.width(), frame.height());
}

void to_json(nlohmann::json& j, const OrientedRoi& roi) {
  j = {{"center", roi.center}, {"width", roi.width}, {"height", roi.height}, {"angle", roi.angle_deg}};
}

void from_json(const nlohmann::json& j, OrientedRoi& roi) {
  roi.center = j.at("center").get<Point2>();
  roi.width = j.at("width").get<double>();
  roi.height = j.at("height").get<double>();
  roi.angle_deg = j.value("angle", 0.0);
  if (!(roi.width > 0.0) || !(roi.height > 0.0)) throw DataError("roi width and height must be > 0");
}

double wrap_half_turn(double angle_deg) {
  double a = std::fmod(angle_deg, 180.0);
  if (a <= -90.0) a += 180.0;
  if (a > 90.0) a -= 180.0;
  return a;
}

Frame read_pnm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2) throw ParseError("truncated magic number", bytes.size());
  if (bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw ParseError("unsupported magic number (expected P5 or P6)", 0);
  }
  const int channels = bytes[1] == '5' ? 1 : 3;
  HeaderReader fields(bytes, 2);
  const long width = fields.read_uint("width");
  const long height = fields.read_uint("height");
  const long maxval = fields.read_uint("maxval");
  if (maxval != 255) throw ParseError("maxval must be 255, got " + std::to_string(maxval), fields.token_start());
  if (width < 1 || height < 1) throw ParseError("image dimensions must be positive", fields.pos());
  fields.expect_single_whitespace();
  const std::size_t data_offset = fields.pos();

  const std::size_t needed = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() - data_offset < needed) {
    throw ParseError("truncated payload: expected " + std::to_string(needed) + " bytes, found " +
                         std::to_string(bytes.size() - data_offset),
                     bytes.size());
  }
  std::vector<std::uint8_t> pixels(bytes.begin() + data_offset, bytes.begin() + data_offset + needed);
  return Frame(static_cast<int>(width), static_cast<int>(height), channels, std::move(pixels));
}

std::vector<std::uint8_t> write_pnm(const Frame& frame) {
  const std::string header = std::string(frame.is_gray() ? "P5" : "P6") + "\n" +
                             std::to_string(frame.width()) + " " + std::to_string(frame.height()) +
                             "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), frame.pixels().begin(), frame.pixels().end());
  return out;
}

Frame read_pnm_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open frame file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return read_pnm(bytes);
  } catch (const ParseError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_pnm_file(const std::filesystem::path& path, const Frame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write frame file " + path.string());
  const auto bytes = write_pnm(frame);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  // Weights scaled by 1000, rounded half up.
  return static_cast<std::uint8_t>((299 * r + 587 * g + 114 * b + 500) / 1000);
}

Frame luminance(const Frame& frame) {
  if (frame.is_gray()) return frame;
  Frame out(frame.width(), frame.height(), 1);
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) {
      out.at(x, y) = luma(frame.at(x, y, 0), frame.at(x, y, 1), frame.at(x, y, 2));
    }
  }
  return out;
}

Frame crop_oriented(const Frame& frame, const OrientedRoi& roi) {
  const int out_w = std::max(1, static_cast<int>(std::lround(roi.width)));
  const int out_h = std::max(1, static_cast<int>(std::lround(roi.height)));
  Frame out(out_w, out_h, frame.channels());

  const double theta = deg_to_rad(roi.angle_deg);
  const double c = roi.angle_deg == 0.0 ? 1.0 : std::cos(theta);
  const double s = roi.angle_deg == 0.0 ? 0.0 : std::sin(theta);
  const double half_w = (out_w - 1) / 2.0;
  const double half_h = (out_h - 1) / 2.0;

  for (int v = 0; v < out_h; ++v) {
    const double dv = v - half_h;
    for (int u = 0; u < out_w; ++u) {
      const double du = u - half_w;
      // ROI x axis is (c, s), y axis is (-s, c).
      const double x = roi.center.x + du * c - dv * s;
      const double y = roi.center.y + du * s + dv * c;
      for (int ch = 0; ch < frame.channels(); ++ch) out.at(u, v, ch) = sample_bilinear(frame, x, y, ch);
    }
  }
  return out;
}

Frame FrameSequence::load(std::size_t index) const {
  const auto path = base_dir / frames.at(index).file;
  if (!std::filesystem::exists(path)) throw DataError("missing frame file: " + frames.at(index).file);
  return read_pnm_file(path);
}

FrameSequence load_sequence(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw DataError("cannot open " + manifest_path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("frames") || !doc["frames"].is_array()) {
    throw DataError(manifest_path.string() + ": expected an object with a \"frames\" array");
  }

  FrameSequence seq;
  seq.base_dir = dir;
  for (const auto& item : doc["frames"]) {
    SequenceEntry entry;
    try {
      entry.file = item.at("file").get<std::string>();
      entry.t_ms = item.at("t_ms").get<std::int64_t>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError(manifest_path.string() + ": bad frame entry: " + e.what());
    }
    if (!seq.frames.empty() && entry.t_ms <= seq.frames.back().t_ms) {
      throw DataError(manifest_path.string() + ": timestamps must be strictly increasing (at " + entry.file +
                      ")");
    }
    seq.frames.push_back(std::move(entry));
  }
  doc.erase("frames");
  seq.extra = std::move(doc);
  return seq;
}

void write_manifest(const FrameSequence& seq) {
  nlohmann::json doc = seq.extra.is_object() ? seq.extra : nlohmann::json::object();
  auto& frames = doc["frames"] = nlohmann::json::array();
  for (const auto& f : seq.frames) frames.push_back({{"file", f.file}, {"t_ms", f.t_ms}});
  std::ofstream out(seq.base_dir / "manifest.json");
  if (!out) throw DataError("cannot write manifest in " + seq.base_dir.string());
  out << doc.dump(2) << '\n';
}

}  // namespace facegest::frameio
