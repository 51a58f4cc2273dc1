#include "facegest/mouthseg.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "facegest/errors.h"

namespace facegest::mouthseg {

namespace {

__extension__ typedef __int128 Int128;

class DisjointSet {
 public:
  int make() {
    parent_.push_back(static_cast<int>(parent_.size()));
    return parent_.back();
  }
  int find(int a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // Keep the smaller (earlier) label as root.
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<int> parent_;
};

}  // namespace

void SegmentationParams::validate() const {
  if (intensity_threshold < 0 || intensity_threshold > 255 || red_threshold < 0 || red_threshold > 255) {
    throw DataError("segmentation thresholds must lie in [0, 255]");
  }
  if (connectivity != 4 && connectivity != 8) throw DataError("connectivity must be 4 or 8");
  if (min_area < 0) throw DataError("min_area must be >= 0");
}

void to_json(nlohmann::json& j, const SegmentationParams& p) {
  j = {{"intensity_threshold", p.intensity_threshold},
       {"red_threshold", p.red_threshold},
       {"connectivity", p.connectivity},
       {"min_area", p.min_area}};
}

void from_json(const nlohmann::json& j, SegmentationParams& p) {
  SegmentationParams d;
  p.intensity_threshold = j.value("intensity_threshold", d.intensity_threshold);
  p.red_threshold = j.value("red_threshold", d.red_threshold);
  p.connectivity = j.value("connectivity", d.connectivity);
  p.min_area = j.value("min_area", d.min_area);
  p.validate();
}

void to_json(nlohmann::json& j, const MouthShape& s) {
  j = {{"area", s.area},
       {"bbox_w", s.bbox_w},
       {"bbox_h", s.bbox_h},
       {"aspect_ratio", s.aspect_ratio},
       {"centroid", s.centroid},
       {"mu20", s.mu20},
       {"mu02", s.mu02},
       {"mu11", s.mu11},
       {"principal_angle", s.principal_angle},
       {"lambda1", s.lambda1},
       {"lambda2", s.lambda2},
       {"empty", s.empty}};
}

void from_json(const nlohmann::json& j, MouthShape& s) {
  s.area = j.at("area").get<long>();
  s.bbox_w = j.value("bbox_w", 0);
  s.bbox_h = j.value("bbox_h", 0);
  s.aspect_ratio = j.value("aspect_ratio", 0.0);
  s.centroid = j.contains("centroid") ? j["centroid"].get<Point2>() : Point2{};
  s.mu20 = j.value("mu20", 0.0);
  s.mu02 = j.value("mu02", 0.0);
  s.mu11 = j.value("mu11", 0.0);
  s.principal_angle = j.value("principal_angle", 0.0);
  s.lambda1 = j.value("lambda1", 0.0);
  s.lambda2 = j.value("lambda2", 0.0);
  s.empty = j.value("empty", s.area == 0);
}

std::size_t BlobMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

BlobMask threshold_shadow(const frameio::Frame& roi_frame, const SegmentationParams& params) {
  BlobMask mask(roi_frame.width(), roi_frame.height());
  const bool gray = roi_frame.is_gray();
  for (int y = 0; y < roi_frame.height(); ++y) {
    for (int x = 0; x < roi_frame.width(); ++x) {
      bool shadow;
      if (gray) {
        shadow = roi_frame.at(x, y) < params.intensity_threshold;
      } else {
        const auto r = roi_frame.at(x, y, 0);
        shadow = frameio::luma(r, roi_frame.at(x, y, 1), roi_frame.at(x, y, 2)) < params.intensity_threshold &&
                 r < params.red_threshold;
      }
      if (shadow) mask.set(x, y);
    }
  }
  return mask;
}

Labeling label_components(const BlobMask& mask, int connectivity) {
  const int w = mask.width();
  const int h = mask.height();
  Labeling out;
  out.width = w;
  out.height = h;
  out.labels.assign(std::size_t(w) * h, -1);

  // Pass 1: provisional labels from already-visited neighbours (W, NW, N, NE).
  DisjointSet sets;
  auto provisional = [&](int x, int y) { return out.labels[std::size_t(y) * w + x]; };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.test(x, y)) continue;
      int label = -1;
      auto visit = [&](int nx, int ny) {
        if (nx < 0 || ny < 0 || nx >= w) return;
        const int n = provisional(nx, ny);
        if (n < 0) return;
        if (label < 0) {
          label = n;
        } else {
          sets.unite(label, n);
        }
      };
      visit(x - 1, y);
      visit(x, y - 1);
      if (connectivity == 8) {
        visit(x - 1, y - 1);
        visit(x + 1, y - 1);
      }
      if (label < 0) label = sets.make();
      out.labels[std::size_t(y) * w + x] = label;
    }
  }

  // Pass 2: resolve roots, number components in raster order of first pixel.
  std::vector<int> final_id;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int& l = out.labels[std::size_t(y) * w + x];
      if (l < 0) {
        l = 0;
        continue;
      }
      const int root = sets.find(l);
      if (static_cast<std::size_t>(root) >= final_id.size()) final_id.resize(root + 1, -1);
      if (final_id[root] < 0) {
        final_id[root] = static_cast<int>(out.components.size());
        out.components.push_back({0, x, y, 0.0, 0.0});
      }
      auto& comp = out.components[final_id[root]];
      ++comp.size;
      comp.sum_x += x;
      comp.sum_y += y;
      l = final_id[root] + 1;
    }
  }
  return out;
}

BlobMask largest_component(const BlobMask& mask, const SegmentationParams& params) {
  const Labeling labeling = label_components(mask, params.connectivity);
  int best = -1;
  for (int i = 0; i < static_cast<int>(labeling.components.size()); ++i) {
    const auto& c = labeling.components[i];
    if (c.size < params.min_area) continue;
    // Components are already in raster order of first pixel, so strict '>' keeps the earliest on ties.
    if (best < 0 || c.size > labeling.components[best].size) best = i;
  }
  BlobMask out(mask.width(), mask.height());
  if (best < 0) return out;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (labeling.label_at(x, y) == best + 1) out.set(x, y);
    }
  }
  return out;
}

MouthShape shape_stats(const BlobMask& blob) {
  // Exact integer raw sums make the central moments independent of where the blob sits.
  long n = 0;
  Int128 sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  int min_x = blob.width(), min_y = blob.height(), max_x = -1, max_y = -1;
  for (int y = 0; y < blob.height(); ++y) {
    for (int x = 0; x < blob.width(); ++x) {
      if (!blob.test(x, y)) continue;
      ++n;
      sx += x;
      sy += y;
      sxx += Int128(x) * x;
      syy += Int128(y) * y;
      sxy += Int128(x) * y;
      min_x = std::min(min_x, x);
      max_x = std::max(max_x, x);
      min_y = std::min(min_y, y);
      max_y = std::max(max_y, y);
    }
  }

  MouthShape s;
  if (n == 0) return s;

  s.empty = false;
  s.area = n;
  s.bbox_w = max_x - min_x + 1;
  s.bbox_h = max_y - min_y + 1;
  s.aspect_ratio = static_cast<double>(s.bbox_w) / s.bbox_h;
  s.centroid = {static_cast<double>(sx) / n, static_cast<double>(sy) / n};
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  s.mu20 = static_cast<double>(Int128(n) * sxx - sx * sx) / n2;
  s.mu02 = static_cast<double>(Int128(n) * syy - sy * sy) / n2;
  s.mu11 = static_cast<double>(Int128(n) * sxy - sx * sy) / n2;

  const PrincipalAxes axes = principal_axes(s);
  s.principal_angle = axes.angle_deg;
  s.lambda1 = axes.lambda1;
  s.lambda2 = axes.lambda2;
  return s;
}

PrincipalAxes principal_axes(const MouthShape& shape) {
  if (shape.empty || shape.area == 0) throw DomainError("principal axes of an empty shape");
  PrincipalAxes out;
  const double trace = shape.mu20 + shape.mu02;
  const double diff = shape.mu20 - shape.mu02;
  const double det = std::max(0.0, shape.mu20 * shape.mu02 - shape.mu11 * shape.mu11);
  const double root = std::sqrt(diff * diff + 4.0 * shape.mu11 * shape.mu11);
  out.lambda1 = 0.5 * (trace + root);
  // det / lambda1 avoids cancellation for elongated blobs.
  out.lambda2 = out.lambda1 > 0.0 ? std::min(det / out.lambda1, out.lambda1) : 0.0;
  if (shape.mu11 == 0.0 && diff == 0.0) {
    out.angle_deg = 0.0;
  } else {
    out.angle_deg = frameio::wrap_half_turn(rad_to_deg(0.5 * std::atan2(2.0 * shape.mu11, diff)));
  }
  return out;
}

MouthShape segment(const frameio::Frame& roi_frame, const SegmentationParams& params) {
  return shape_stats(largest_component(threshold_shadow(roi_frame, params), params));
}

}  // namespace facegest::mouthseg
