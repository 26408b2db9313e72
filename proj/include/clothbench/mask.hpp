#pragma once

#include <cstdint>
#include <vector>

#include "clothbench/error.hpp"
#include "clothbench/geom.hpp"

namespace clothbench {

// Top-down occupancy grid. Pixel (i, j) covers the world square whose
// center is origin + ((i+0.5)*scale, (j+0.5)*scale); j grows with world +y.
struct BinaryMask {
  int width_px = 0, height_px = 0;
  double scale = 0.0;  // meters per pixel
  Vec2 origin;         // world x-y of the (0,0) pixel corner
  std::vector<uint8_t> bits;  // row-major, 0 or 1

  BinaryMask() = default;
  BinaryMask(int w, int h, double s, Vec2 o)
      : width_px(w), height_px(h), scale(s), origin(o),
        bits(static_cast<size_t>(w) * h, 0) {}

  bool at(int i, int j) const { return bits[static_cast<size_t>(j) * width_px + i] != 0; }
  void set(int i, int j, bool v = true) {
    bits[static_cast<size_t>(j) * width_px + i] = v ? 1 : 0;
  }
  bool in_bounds(int i, int j) const {
    return i >= 0 && i < width_px && j >= 0 && j < height_px;
  }

  size_t count() const {
    size_t n = 0;
    for (uint8_t b : bits) n += b != 0;
    return n;
  }

  Vec2 pixel_center(int i, int j) const {
    return {origin.x + (i + 0.5) * scale, origin.y + (j + 0.5) * scale};
  }

  // Pixel index containing a world point (may be out of bounds).
  std::pair<int, int> world_to_pixel(const Vec2& w) const {
    return {static_cast<int>(std::floor((w.x - origin.x) / scale)),
            static_cast<int>(std::floor((w.y - origin.y) / scale))};
  }

  double occupied_area() const { return static_cast<double>(count()) * scale * scale; }
};

struct GrayImage {
  int width_px = 0, height_px = 0;
  double scale = 0.0;
  Vec2 origin;
  std::vector<double> intensity;  // row-major, [0, 1]

  GrayImage() = default;
  GrayImage(int w, int h, double s = 0.0, Vec2 o = {})
      : width_px(w), height_px(h), scale(s), origin(o),
        intensity(static_cast<size_t>(w) * h, 0.0) {}

  double at(int i, int j) const {
    return intensity[static_cast<size_t>(j) * width_px + i];
  }
  // Replicate-clamped access for convolution borders.
  double at_clamped(int i, int j) const {
    i = std::max(0, std::min(width_px - 1, i));
    j = std::max(0, std::min(height_px - 1, j));
    return at(i, j);
  }
  double& ref(int i, int j) { return intensity[static_cast<size_t>(j) * width_px + i]; }
};

// Nearest-neighbor resample of `src` onto `grid`'s geometry.
inline BinaryMask resample_nearest(const BinaryMask& src, const BinaryMask& grid) {
  BinaryMask out(grid.width_px, grid.height_px, grid.scale, grid.origin);
  for (int j = 0; j < out.height_px; ++j) {
    for (int i = 0; i < out.width_px; ++i) {
      auto [si, sj] = src.world_to_pixel(out.pixel_center(i, j));
      if (src.in_bounds(si, sj) && src.at(si, sj)) out.set(i, j);
    }
  }
  return out;
}

// Binary erosion with a square structuring element of Chebyshev radius r;
// pixels nearer than r to the image border are cleared as well.
inline BinaryMask erode(const BinaryMask& m, int r) {
  BinaryMask out(m.width_px, m.height_px, m.scale, m.origin);
  for (int j = 0; j < m.height_px; ++j) {
    for (int i = 0; i < m.width_px; ++i) {
      bool keep = true;
      for (int dj = -r; keep && dj <= r; ++dj) {
        for (int di = -r; di <= r; ++di) {
          int ii = i + di, jj = j + dj;
          if (!m.in_bounds(ii, jj) || !m.at(ii, jj)) {
            keep = false;
            break;
          }
        }
      }
      if (keep) out.set(i, j);
    }
  }
  return out;
}

}  // namespace clothbench
