#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "facegest/errors.h"
#include "facegest/frameio.h"
#include "generators.h"
#include "oracles.h"

using namespace facegest;
using frameio::Frame;
using frameio::OrientedRoi;

namespace {

std::vector<std::uint8_t> bytes(const std::string& header, std::vector<std::uint8_t> payload) {
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

std::size_t parse_offset(const std::vector<std::uint8_t>& b) {
  try {
    frameio::read_pnm(b);
  } catch (const ParseError& e) {
    return e.offset();
  }
  ADD_FAILURE() << "expected ParseError";
  return 0;
}

}  // namespace

TEST(ReadPnm, DecodesGrayP5) {
  const auto f = frameio::read_pnm(bytes("P5 2 2 255\n", {0, 255, 10, 20}));
  EXPECT_EQ(f.width(), 2);
  EXPECT_EQ(f.height(), 2);
  EXPECT_EQ(f.channels(), 1);
  EXPECT_EQ(f.at(0, 0), 0);
  EXPECT_EQ(f.at(1, 0), 255);
  EXPECT_EQ(f.at(0, 1), 10);
  EXPECT_EQ(f.at(1, 1), 20);
}

TEST(ReadPnm, DecodesRgbP6) {
  const auto f = frameio::read_pnm(bytes("P6\n3 1\n255\n", {255, 0, 0, 0, 255, 0, 0, 0, 255}));
  EXPECT_EQ(f.channels(), 3);
  EXPECT_EQ(f.at(0, 0, 0), 255);
  EXPECT_EQ(f.at(0, 0, 1), 0);
  EXPECT_EQ(f.at(1, 0, 1), 255);
  EXPECT_EQ(f.at(2, 0, 2), 255);
}

TEST(ReadPnm, AcceptsHeaderComments) {
  const auto f = frameio::read_pnm(bytes("P5\n# made by hand\n1 1\n# max\n255\n", {42}));
  EXPECT_EQ(f.at(0, 0), 42);
}

TEST(ReadPnm, ErrorsNameByteOffset) {
  EXPECT_EQ(parse_offset(bytes("P7 1 1 255\n", {0})), 0u);
  // maxval 65535 starts at byte 7.
  EXPECT_EQ(parse_offset(bytes("P5 1 1 65535\n", {0, 0})), 7u);
  // Payload of 4 bytes expected after the 11-byte header, 3 present.
  EXPECT_EQ(parse_offset(bytes("P5 2 2 255\n", {1, 2, 3})), 14u);
  EXPECT_THROW(frameio::read_pnm(bytes("P5 x 2 255\n", {})), ParseError);
  EXPECT_THROW(frameio::read_pnm(bytes("P5 0 2 255\n", {})), ParseError);
  EXPECT_THROW(frameio::read_pnm(bytes("P5 2", {})), ParseError);
}

TEST(WritePnm, CanonicalHeader) {
  Frame f(1, 1, 1);
  EXPECT_EQ(frameio::write_pnm(f), bytes("P5\n1 1\n255\n", {0}));
  const auto rgb = frameio::write_pnm(Frame(2, 1, 3));
  EXPECT_EQ(rgb.size(), std::string("P6\n2 1\n255\n").size() + 6);
  EXPECT_EQ(rgb[1], '6');
}

TEST(WritePnm, RoundTripsRandomFrames) {
  gen::Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const Frame f = gen::random_frame(rng);
    const auto encoded = frameio::write_pnm(f);
    EXPECT_EQ(frameio::read_pnm(encoded), f);
    EXPECT_EQ(frameio::write_pnm(frameio::read_pnm(encoded)), encoded);
  }
}

TEST(FrameShape, RejectsBadBuffers) {
  EXPECT_THROW(Frame(0, 1, 1), DataError);
  EXPECT_THROW(Frame(1, 1, 2), DataError);
  EXPECT_THROW(Frame(2, 2, 1, std::vector<std::uint8_t>(3)), DataError);
}

TEST(Luminance, KnownValues) {
  Frame f(2, 1, 3, {255, 255, 255, 255, 0, 0});
  const auto y = frameio::luminance(f);
  EXPECT_EQ(y.channels(), 1);
  EXPECT_EQ(y.at(0, 0), 255);
  EXPECT_EQ(y.at(1, 0), 76);
}

TEST(Luminance, GrayPassThrough) {
  gen::Rng rng(3);
  Frame g(5, 4, 1);
  for (auto& p : g.pixels()) p = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  EXPECT_EQ(frameio::luminance(g), g);
}

TEST(Luminance, MatchesExactRounding) {
  // Exact rational rounding of 0.299 R + 0.587 G + 0.114 B, half up.
  for (int r = 0; r < 256; r += 5)
    for (int g = 0; g < 256; g += 7)
      for (int b = 0; b < 256; b += 3) {
        const long num = 299L * r + 587L * g + 114L * b;
        const long expect = num / 1000 + (num % 1000 >= 500 ? 1 : 0);
        ASSERT_EQ(frameio::luma(r, g, b), expect) << r << "," << g << "," << b;
      }
}

TEST(Luminance, ConstantImagesMapToThemselves) {
  for (int v = 0; v < 256; ++v) EXPECT_EQ(frameio::luma(v, v, v), v);
}

TEST(CropOriented, AngleZeroIsRectangularCrop) {
  gen::Rng rng(5);
  Frame f(30, 20, 3);
  for (auto& p : f.pixels()) p = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  const auto crop = frameio::crop_oriented(f, OrientedRoi::from_rect(4, 3, 11, 7));
  ASSERT_EQ(crop.width(), 11);
  ASSERT_EQ(crop.height(), 7);
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 11; ++x)
      for (int c = 0; c < 3; ++c) ASSERT_EQ(crop.at(x, y, c), f.at(x + 4, y + 3, c));
}

TEST(CropOriented, OutsideFrameIsZero) {
  Frame f(10, 10, 1);
  for (auto& p : f.pixels()) p = 200;
  const auto crop = frameio::crop_oriented(f, {{100.0, 100.0}, 8.0, 6.0, 30.0});
  for (auto p : crop.pixels()) EXPECT_EQ(p, 0);
}

TEST(CropOriented, FullFrameRoiIsIdentity) {
  gen::Rng rng(8);
  for (int i = 0; i < 20; ++i) {
    const auto f = gen::random_frame(rng);
    EXPECT_EQ(frameio::crop_oriented(f, OrientedRoi::full_frame(f)), f);
  }
}

TEST(CropOriented, RotatedMatchesReferenceResampler) {
  oracle::Image img{64, 48, {}};
  Frame f(64, 48, 1);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 64; ++x) {
      const auto v = static_cast<std::uint8_t>((3 * x + 2 * y) % 256);
      f.at(x, y) = v;
      img.px.push_back(v);
    }
  for (double angle : {45.0, -30.0, 12.5, 90.0}) {
    const OrientedRoi roi{{31.5, 23.0}, 30.0, 20.0, angle};
    const auto crop = frameio::crop_oriented(f, roi);
    const auto ref = oracle::resample(img, 31.5, 23.0, 30, 20, angle);
    for (int v = 0; v < 20; ++v)
      for (int u = 0; u < 30; ++u)
        ASSERT_LE(std::abs(int(crop.at(u, v)) - int(ref.at(u, v))), 1) << "angle " << angle << " at " << u << "," << v;
  }
}

TEST(OrientedRoi, JsonRoundTrip) {
  const OrientedRoi roi{{1.5, 2.25}, 10.0, 4.0, -12.0};
  const auto back = nlohmann::json(roi).get<OrientedRoi>();
  EXPECT_EQ(back, roi);
  EXPECT_DOUBLE_EQ(frameio::wrap_half_turn(-90.0), 90.0);
  EXPECT_DOUBLE_EQ(frameio::wrap_half_turn(135.0), -45.0);
  EXPECT_DOUBLE_EQ(frameio::wrap_half_turn(90.0), 90.0);
}

TEST(FrameSequence, ManifestRoundTripAndErrors) {
  const auto dir = std::filesystem::temp_directory_path() / "facegest_seq_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  frameio::FrameSequence seq;
  seq.base_dir = dir;
  seq.frames = {{"a.pgm", 0}, {"b.pgm", 40}};
  frameio::write_manifest(seq);
  frameio::write_pnm_file(dir / "a.pgm", Frame(2, 2, 1));
  const auto loaded = frameio::load_sequence(dir);
  ASSERT_EQ(loaded.frames.size(), 2u);
  EXPECT_EQ(loaded.frames[1].t_ms, 40);
  EXPECT_EQ(loaded.load(0), Frame(2, 2, 1));
  try {
    loaded.load(1);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("b.pgm"), std::string::npos);
  }
  std::ofstream(dir / "manifest.json") << R"({"frames":[{"file":"a.pgm","t_ms":5},{"file":"a.pgm","t_ms":5}]})";
  EXPECT_THROW(frameio::load_sequence(dir), DataError);
  std::filesystem::remove_all(dir);
}
