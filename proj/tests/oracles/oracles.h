#pragma once

// Brute-force reference implementations. Deliberately naive and written
// without reusing library code paths.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using Grid = std::vector<std::vector<int>>;  // [row][col], 0/1
using Pixel = std::pair<int, int>;           // (row, col)

// BFS flood fill. Components are returned in no particular order.
inline std::vector<std::vector<Pixel>> flood_fill(const Grid& g, int connectivity) {
  const int h = static_cast<int>(g.size());
  const int w = h ? static_cast<int>(g[0].size()) : 0;
  std::vector<std::vector<char>> seen(h, std::vector<char>(w, 0));
  std::vector<std::vector<Pixel>> comps;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!g[r][c] || seen[r][c]) continue;
      std::vector<Pixel> comp;
      std::deque<Pixel> q{{r, c}};
      seen[r][c] = 1;
      while (!q.empty()) {
        auto [y, x] = q.front();
        q.pop_front();
        comp.push_back({y, x});
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            if (connectivity == 4 && dx != 0 && dy != 0) continue;
            const int ny = y + dy, nx = x + dx;
            if (ny < 0 || nx < 0 || ny >= h || nx >= w) continue;
            if (g[ny][nx] && !seen[ny][nx]) {
              seen[ny][nx] = 1;
              q.push_back({ny, nx});
            }
          }
        }
      }
      comps.push_back(comp);
    }
  }
  return comps;
}

inline Pixel min_pixel(const std::vector<Pixel>& comp) {
  Pixel best = comp.front();
  for (const auto& p : comp) best = std::min(best, p);
  return best;
}

// Largest component of size >= min_area; ties go to the smallest (row, col).
inline std::vector<Pixel> largest(const Grid& g, int connectivity, int min_area = 0) {
  std::vector<Pixel> best;
  for (auto& comp : flood_fill(g, connectivity)) {
    if (static_cast<int>(comp.size()) < min_area) continue;
    if (comp.size() > best.size() || (comp.size() == best.size() && !best.empty() && min_pixel(comp) < min_pixel(best)))
      best = comp;
  }
  return best;
}

struct Stats {
  long area = 0;
  int bbox_w = 0, bbox_h = 0;
  double cx = 0, cy = 0;
  double mu20 = 0, mu02 = 0, mu11 = 0;
};

// Two-pass direct summation in long double.
inline Stats direct_stats(const std::vector<Pixel>& pixels) {
  Stats s;
  if (pixels.empty()) return s;
  s.area = static_cast<long>(pixels.size());
  int minx = pixels[0].second, maxx = minx, miny = pixels[0].first, maxy = miny;
  long double sx = 0, sy = 0;
  for (auto [y, x] : pixels) {
    sx += x;
    sy += y;
    minx = std::min(minx, x);
    maxx = std::max(maxx, x);
    miny = std::min(miny, y);
    maxy = std::max(maxy, y);
  }
  s.bbox_w = maxx - minx + 1;
  s.bbox_h = maxy - miny + 1;
  const long double cx = sx / s.area, cy = sy / s.area;
  long double a = 0, b = 0, c = 0;
  for (auto [y, x] : pixels) {
    a += (x - cx) * (x - cx);
    b += (y - cy) * (y - cy);
    c += (x - cx) * (y - cy);
  }
  s.cx = static_cast<double>(cx);
  s.cy = static_cast<double>(cy);
  s.mu20 = static_cast<double>(a / s.area);
  s.mu02 = static_cast<double>(b / s.area);
  s.mu11 = static_cast<double>(c / s.area);
  return s;
}

// Eigenvalues of a symmetric 2x2 matrix by Jacobi rotation.
inline std::pair<double, double> eigen2(double a, double b, double d) {
  if (b == 0.0) return {std::max(a, d), std::min(a, d)};
  const double theta = 0.5 * std::atan2(2.0 * b, a - d);
  const double c = std::cos(theta), s = std::sin(theta);
  const double l1 = c * c * a + 2 * c * s * b + s * s * d;
  const double l2 = s * s * a - 2 * c * s * b + c * c * d;
  return {std::max(l1, l2), std::min(l1, l2)};
}

// Reference oriented resampler: sample point = center + (du + i dv) * e^{i angle}.
struct Image {
  int w = 0, h = 0;
  std::vector<std::uint8_t> px;  // gray
  int at(int x, int y) const { return px[static_cast<std::size_t>(y) * w + x]; }
};

inline double bilinear(const Image& img, double x, double y) {
  if (x < 0 || y < 0 || x > img.w - 1 || y > img.h - 1) return 0.0;
  const int x0 = static_cast<int>(x), y0 = static_cast<int>(y);
  const int x1 = x0 + 1 < img.w ? x0 + 1 : x0, y1 = y0 + 1 < img.h ? y0 + 1 : y0;
  const double fx = x - x0, fy = y - y0;
  return img.at(x0, y0) * (1 - fx) * (1 - fy) + img.at(x1, y0) * fx * (1 - fy) + img.at(x0, y1) * (1 - fx) * fy +
         img.at(x1, y1) * fx * fy;
}

inline Image resample(const Image& src, double cx, double cy, int w, int h, double angle_deg) {
  Image out{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h)};
  const std::complex<double> rot = std::polar(1.0, angle_deg * M_PI / 180.0);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const std::complex<double> p = std::complex<double>(cx, cy) +
                                     std::complex<double>(u - (w - 1) / 2.0, v - (h - 1) / 2.0) * rot;
      out.px[static_cast<std::size_t>(v) * w + u] =
          static_cast<std::uint8_t>(std::floor(bilinear(src, p.real(), p.imag()) + 0.5));
    }
  }
  return out;
}

// Explicit click automaton, written as a transition table over (state, input class).
inline int count_clicks(const std::vector<double>& areas, double t_open, double t_close, int min_open) {
  int clicks = 0;
  int open = 0;  // 0 = idle
  for (double a : areas) {
    const bool hi = a >= t_open, lo = a <= t_close;
    if (open == 0) {
      if (hi) open = 1;
    } else if (hi) {
      ++open;
    } else if (lo) {
      if (open >= min_open) ++clicks;
      open = 0;
    }
  }
  return clicks;
}

// Hysteresis level automaton for a single threshold.
inline std::vector<int> hysteresis_levels(const std::vector<double>& xs, double t, double h) {
  std::vector<int> out;
  std::optional<int> level;
  for (double x : xs) {
    if (!level) level = x > t ? 1 : 0;
    else if (*level == 0 && x > t + h) level = 1;
    else if (*level == 1 && x < t - h) level = 0;
    out.push_back(*level);
  }
  return out;
}

// Gojuon chart, rows a k s t n h m y r w; empty cells are gaps.
inline const std::array<std::array<std::string, 5>, 10>& gojuon() {
  static const std::array<std::array<std::string, 5>, 10> chart = {{
      {"あ", "い", "う", "え", "お"},
      {"か", "き", "く", "け", "こ"},
      {"さ", "し", "す", "せ", "そ"},
      {"た", "ち", "つ", "て", "と"},
      {"な", "に", "ぬ", "ね", "の"},
      {"は", "ひ", "ふ", "へ", "ほ"},
      {"ま", "み", "む", "め", "も"},
      {"や", "", "ゆ", "", "よ"},
      {"ら", "り", "る", "れ", "ろ"},
      {"わ", "", "", "", "を"},
  }};
  return chart;
}

inline const std::array<std::string, 10>& e161() {
  static const std::array<std::string, 10> keys = {"", "", "abc", "def", "ghi", "jkl", "mno", "pqrs", "tuv", "wxyz"};
  return keys;
}

// Multi-tap keystroke count for lowercase text: a letter costs its position
// on the key; the commit timeout is not a keystroke.
inline int multitap_presses(const std::string& text) {
  int presses = 0;
  for (char ch : text) {
    for (const auto& letters : e161()) {
      const auto pos = letters.find(ch);
      if (pos != std::string::npos) presses += static_cast<int>(pos) + 1;
    }
  }
  return presses;
}

}  // namespace oracle
