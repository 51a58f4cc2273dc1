#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "facegest/frameio.h"
#include "facegest/geometry.h"

namespace facegest::mouthseg {

struct SegmentationParams {
  // A pixel is shadow when its luma is below |intensity_threshold| and, for
  // color input, its red sample is below |red_threshold|.
  int intensity_threshold = 60;
  int red_threshold = 80;
  int connectivity = 8;  // 4 or 8
  int min_area = 0;

  void validate() const;
};

void to_json(nlohmann::json& j, const SegmentationParams& p);
void from_json(const nlohmann::json& j, SegmentationParams& p);

class BlobMask {
 public:
  BlobMask() = default;
  BlobMask(int width, int height) : width_(width), height_(height), bits_(std::size_t(width) * height, 0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool test(int x, int y) const { return bits_[std::size_t(y) * width_ + x] != 0; }
  void set(int x, int y, bool on = true) { bits_[std::size_t(y) * width_ + x] = on ? 1 : 0; }
  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  std::size_t count() const;
  bool none() const { return count() == 0; }

  friend bool operator==(const BlobMask&, const BlobMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Segmented-blob statistics. Coordinates are (column, row) of pixel centers.
// Second moments are central and normalized by area.
struct MouthShape {
  long area = 0;
  int bbox_w = 0;
  int bbox_h = 0;
  double aspect_ratio = 0.0;
  Point2 centroid;
  double mu20 = 0.0;
  double mu02 = 0.0;
  double mu11 = 0.0;
  double principal_angle = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  bool empty = true;

  friend bool operator==(const MouthShape&, const MouthShape&) = default;
};

void to_json(nlohmann::json& j, const MouthShape& s);
void from_json(const nlohmann::json& j, MouthShape& s);

struct PrincipalAxes {
  double angle_deg = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

// One connected component of a mask. |first| is the first pixel met in raster order.
struct Component {
  long size = 0;
  int first_x = 0;
  int first_y = 0;
  double sum_x = 0.0;
  double sum_y = 0.0;

  Point2 centroid() const { return {sum_x / size, sum_y / size}; }
};

// Per-pixel label image (0 = background, 1..n = component index + 1) plus summaries.
struct Labeling {
  int width = 0;
  int height = 0;
  std::vector<int> labels;
  std::vector<Component> components;

  int label_at(int x, int y) const { return labels[std::size_t(y) * width + x]; }
};

BlobMask threshold_shadow(const frameio::Frame& roi_frame, const SegmentationParams& params);

// Two-pass union-find labeling at 4- or 8-connectivity. Components are numbered
// in raster order of their first pixel.
Labeling label_components(const BlobMask& mask, int connectivity);

// Largest component with size >= min_area; ties go to the component whose first
// raster-order pixel (min row, then min column within that row) comes first.
BlobMask largest_component(const BlobMask& mask, const SegmentationParams& params);

MouthShape shape_stats(const BlobMask& blob);

// Eigen-decomposition of [[mu20, mu11], [mu11, mu02]]. Throws DomainError on an empty shape.
PrincipalAxes principal_axes(const MouthShape& shape);

// threshold -> largest component -> statistics.
MouthShape segment(const frameio::Frame& roi_frame, const SegmentationParams& params);

}  // namespace facegest::mouthseg
