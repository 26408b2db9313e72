#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "clothbench/cloth.hpp"
#include "clothbench/episode.hpp"
#include "clothbench/error.hpp"
#include "clothbench/geom.hpp"
#include "clothbench/gripper.hpp"
#include "clothbench/mask.hpp"
#include "clothbench/percept.hpp"

namespace clothbench {

struct FoldScore {
  double iou = 0.0;
  double wr = 0.0;
};

// |a AND b| / |a OR b|, with b resampled onto a's grid when geometries
// differ. Two empty masks count as a perfect match.
inline double iou(const BinaryMask& a, const BinaryMask& b) {
  const BinaryMask* bb = &b;
  BinaryMask resampled;
  if (b.width_px != a.width_px || b.height_px != a.height_px || b.scale != a.scale ||
      !(b.origin == a.origin)) {
    resampled = resample_nearest(b, a);
    bb = &resampled;
  }
  size_t inter = 0, uni = 0;
  for (size_t k = 0; k < a.bits.size(); ++k) {
    bool pa = a.bits[k] != 0, pb = bb->bits[k] != 0;
    inter += pa && pb;
    uni += pa || pb;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

// Desired post-fold silhouette: the pre-fold mask clipped to the stationary
// half-plane (the fold line's normal points at the moving half).
inline BinaryMask generate_fold_ground_truth(const BinaryMask& pre_mask,
                                             const Line2& fold_line) {
  Vec2 lo = pre_mask.origin;
  Vec2 hi{pre_mask.origin.x + pre_mask.width_px * pre_mask.scale,
          pre_mask.origin.y + pre_mask.height_px * pre_mask.scale};
  double dmin = 1e30, dmax = -1e30;
  for (const Vec2& c : {Vec2{lo.x, lo.y}, Vec2{hi.x, lo.y}, Vec2{lo.x, hi.y}, Vec2{hi.x, hi.y}}) {
    double d = fold_line.signed_distance(c);
    dmin = std::min(dmin, d);
    dmax = std::max(dmax, d);
  }
  if (dmin > 0.0 || dmax < 0.0)
    throw Error("generate_fold_ground_truth: fold line misses the mask bounding box");

  BinaryMask gt(pre_mask.width_px, pre_mask.height_px, pre_mask.scale, pre_mask.origin);
  for (int j = 0; j < gt.height_px; ++j)
    for (int i = 0; i < gt.width_px; ++i)
      if (pre_mask.at(i, j) && fold_line.signed_distance(gt.pixel_center(i, j)) <= 0.0)
        gt.set(i, j);
  return gt;
}

// Top-down Lambertian render under a fixed oblique light; two-sided so a
// folded-over (flipped) layer shades like an upright one. The raster frame
// matches rasterize_mask for the same state.
inline GrayImage render_shaded(const ClothState& cloth, double scale) {
  if (!(scale > 0.0)) throw ValidationError("render_shaded: scale must be > 0");
  if (cloth.particle_count() == 0) throw ValidationError("render_shaded: empty cloth");
  auto b = detail::padded_bounds(cloth);
  int w = std::max(1, static_cast<int>(std::ceil((b.hi.x - b.lo.x) / scale)));
  int h = std::max(1, static_cast<int>(std::ceil((b.hi.y - b.lo.y) / scale)));
  GrayImage img(w, h, scale, b.lo);
  BinaryMask grid(w, h, scale, b.lo);  // geometry helper for scan_triangle
  std::vector<double> depth(static_cast<size_t>(w) * h, -1e30);

  const Vec3 light = Vec3{0.35, 0.25, 0.9}.normalized();

  auto shade_triangle = [&](const Vec3& a3, const Vec3& b3, const Vec3& c3) {
    Vec3 n = (b3 - a3).cross(c3 - a3);
    double nn = n.norm();
    if (nn < 1e-15) return;
    double lambert = std::abs(n.dot(light)) / nn;
    double intensity = clamp(0.15 + 0.75 * lambert, 0.0, 1.0);
    double z = (a3.z + b3.z + c3.z) / 3.0;
    detail::scan_triangle(grid, a3.xy(), b3.xy(), c3.xy(), [&](int i, int j) {
      size_t k = static_cast<size_t>(j) * w + i;
      if (z > depth[k]) {
        depth[k] = z;
        img.intensity[k] = intensity;
      }
    });
  };

  for (int iy = 0; iy + 1 < cloth.ny; ++iy) {
    for (int ix = 0; ix + 1 < cloth.nx; ++ix) {
      const Vec3& p00 = cloth.positions[cloth.index(ix, iy)];
      const Vec3& p10 = cloth.positions[cloth.index(ix + 1, iy)];
      const Vec3& p11 = cloth.positions[cloth.index(ix + 1, iy + 1)];
      const Vec3& p01 = cloth.positions[cloth.index(ix, iy + 1)];
      shade_triangle(p00, p10, p11);
      shade_triangle(p00, p11, p01);
    }
  }
  return img;
}

namespace canny_detail {

// 5x5 Gaussian, sigma 1.4, normalized.
inline const std::vector<double>& gaussian_kernel() {
  static const std::vector<double> k = [] {
    std::vector<double> v(25);
    double sum = 0.0, sigma = 1.4;
    for (int y = -2; y <= 2; ++y)
      for (int x = -2; x <= 2; ++x) {
        double g = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
        v[(y + 2) * 5 + (x + 2)] = g;
        sum += g;
      }
    for (double& g : v) g /= sum;
    return v;
  }();
  return k;
}

}  // namespace canny_detail

// Canny pipeline: Gaussian blur, Sobel, non-maximum suppression along the
// quantized gradient direction, double-threshold hysteresis (8-connected).
// Gradient magnitudes are normalized by 4 so a unit step reads ~1.
inline BinaryMask canny(const GrayImage& img, double low = 0.1, double high = 0.2) {
  if (!(low >= 0.0) || low > high)
    throw ValidationError("canny: need 0 <= low <= high");
  const int w = img.width_px, h = img.height_px;

  GrayImage blur(w, h, img.scale, img.origin);
  const auto& gk = canny_detail::gaussian_kernel();
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) {
      double acc = 0.0;
      for (int dy = -2; dy <= 2; ++dy)
        for (int dx = -2; dx <= 2; ++dx)
          acc += gk[(dy + 2) * 5 + (dx + 2)] * img.at_clamped(i + dx, j + dy);
      blur.ref(i, j) = acc;
    }

  std::vector<double> mag(static_cast<size_t>(w) * h, 0.0);
  std::vector<double> gx(mag.size(), 0.0), gy(mag.size(), 0.0);
  for (int j = 1; j + 1 < h; ++j)
    for (int i = 1; i + 1 < w; ++i) {
      double sx = -blur.at(i - 1, j - 1) + blur.at(i + 1, j - 1) - 2.0 * blur.at(i - 1, j) +
                  2.0 * blur.at(i + 1, j) - blur.at(i - 1, j + 1) + blur.at(i + 1, j + 1);
      double sy = -blur.at(i - 1, j - 1) - 2.0 * blur.at(i, j - 1) - blur.at(i + 1, j - 1) +
                  blur.at(i - 1, j + 1) + 2.0 * blur.at(i, j + 1) + blur.at(i + 1, j + 1);
      size_t k = static_cast<size_t>(j) * w + i;
      gx[k] = sx;
      gy[k] = sy;
      mag[k] = std::sqrt(sx * sx + sy * sy) / 4.0;
    }

  // NMS: keep a pixel beating the neighbor ahead and at least matching the
  // one behind, so a two-pixel plateau thins to a single line.
  BinaryMask kept(w, h, img.scale, img.origin);
  std::vector<double> kept_mag(mag.size(), 0.0);
  for (int j = 1; j + 1 < h; ++j)
    for (int i = 1; i + 1 < w; ++i) {
      size_t k = static_cast<size_t>(j) * w + i;
      if (mag[k] < low) continue;
      double angle = std::atan2(gy[k], gx[k]);
      if (angle < 0.0) angle += kPi;  // fold to [0, pi)
      int di, dj;
      if (angle < kPi / 8.0 || angle >= 7.0 * kPi / 8.0) {
        di = 1; dj = 0;
      } else if (angle < 3.0 * kPi / 8.0) {
        di = 1; dj = 1;
      } else if (angle < 5.0 * kPi / 8.0) {
        di = 0; dj = 1;
      } else {
        di = -1; dj = 1;
      }
      double ahead = mag[static_cast<size_t>(j + dj) * w + (i + di)];
      double behind = mag[static_cast<size_t>(j - dj) * w + (i - di)];
      if (mag[k] > ahead && mag[k] >= behind) {
        kept.set(i, j);
        kept_mag[k] = mag[k];
      }
    }

  // Hysteresis: strong seeds, weak pixels join via 8-connectivity.
  BinaryMask edges(w, h, img.scale, img.origin);
  std::deque<std::pair<int, int>> q;
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) {
      size_t k = static_cast<size_t>(j) * w + i;
      if (kept.at(i, j) && kept_mag[k] >= high) {
        edges.set(i, j);
        q.push_back({i, j});
      }
    }
  while (!q.empty()) {
    auto [ci, cj] = q.front();
    q.pop_front();
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        int ni = ci + di, nj = cj + dj;
        if (!edges.in_bounds(ni, nj) || edges.at(ni, nj)) continue;
        if (!kept.at(ni, nj)) continue;
        edges.set(ni, nj);
        q.push_back({ni, nj});
      }
  }
  return edges;
}

// Fraction of cloth-mask pixels flagged as edges, with the mask eroded so
// the silhouette contour itself never counts as a wrinkle.
inline double wrinkle_penalty(const GrayImage& img, const BinaryMask& cloth_mask,
                              double low = 0.1, double high = 0.2,
                              int boundary_margin = 3) {
  if (img.width_px != cloth_mask.width_px || img.height_px != cloth_mask.height_px)
    throw ValidationError("wrinkle_penalty: image and mask dimensions differ");
  size_t mask_px = cloth_mask.count();
  if (mask_px == 0) throw Error("wrinkle_penalty: empty cloth mask");
  BinaryMask edges = canny(img, low, high);
  BinaryMask interior = erode(cloth_mask, boundary_margin);
  size_t wrinkle_px = 0;
  for (size_t k = 0; k < edges.bits.size(); ++k)
    wrinkle_px += edges.bits[k] && interior.bits[k];
  return static_cast<double>(wrinkle_px) / static_cast<double>(mask_px);
}

enum class LiftClass { Perfect, Half, Fail };

inline const char* to_string(LiftClass c) {
  switch (c) {
    case LiftClass::Perfect: return "perfect";
    case LiftClass::Half: return "half";
    case LiftClass::Fail: return "fail";
  }
  return "?";
}

// Retention is an event-level property: a finger held if its sliding grasp
// succeeded and its pad never broke. Force magnitudes do not enter.
inline LiftClass classify_lift(const EpisodeReport& report) {
  if (report.task != "lift")
    throw ValidationError("classify_lift: episode task is '" + report.task +
                          "', expected 'lift'");
  int retained = 0;
  for (const char* f : {"left", "right"}) {
    bool ok = false, lost = false;
    for (const auto& e : report.events) {
      if (e.finger != f) continue;
      if (e.type == "grasp") ok = e.detail.rfind("ok", 0) == 0;
      if (e.type == "slip") lost = true;
    }
    if (ok && !lost) ++retained;
  }
  if (retained == 2) return LiftClass::Perfect;
  if (retained == 1) return LiftClass::Half;
  return LiftClass::Fail;
}

// Mean signed distance of the mask's leading edge from the alignment line
// (positive = past the line), quantized to 1 mm. Leading edge = per-column
// extreme pixel toward the line, columns taken along the line direction.
inline double drag_offset(const BinaryMask& final_mask, const Line2& alignment_line) {
  if (final_mask.count() == 0) throw Error("drag_offset: empty mask");
  Vec2 tangent{-alignment_line.normal.y, alignment_line.normal.x};
  std::map<long, double> leading;  // column bin -> max signed distance
  for (int j = 0; j < final_mask.height_px; ++j)
    for (int i = 0; i < final_mask.width_px; ++i) {
      if (!final_mask.at(i, j)) continue;
      Vec2 c = final_mask.pixel_center(i, j);
      double u = (c - alignment_line.point).dot(tangent);
      double s = alignment_line.signed_distance(c);
      long bin = static_cast<long>(std::llround(u / final_mask.scale));
      auto it = leading.find(bin);
      if (it == leading.end() || s > it->second) leading[bin] = s;
    }
  double sum = 0.0;
  for (const auto& [bin, s] : leading) sum += s;
  double mean = sum / static_cast<double>(leading.size());
  return std::round(mean * 1000.0) / 1000.0;
}

struct PayloadOptions {
  Vec3 pull_direction{1.0, 0.0, 0.0};
  double speed = 0.05;      // m/s tool retraction
  double dt = 1e-3;
  double max_travel = 2.0;  // m, protocol guard
};

// Pull-until-slip protocol: the tool retracts at constant speed while the
// constraint tension is logged. Returns the peak tension seen up to the
// first slip, or exactly max_force when tension reaches it without a slip.
inline double payload_pull(const ClothState& cloth, const GripperState& gripper,
                           const std::vector<int>& anchored_particles,
                           double max_force = 30.0, PayloadOptions opts = {}) {
  if (!(max_force > 0.0)) throw ValidationError("payload_pull: max_force must be > 0");
  bool holding = false;
  for (const auto& fs : gripper.fingers)
    if (fs.grip_force > 0.0 && !fs.grasped.empty()) holding = true;
  if (!holding) return 0.0;

  ClothState state = cloth;
  GripperState grip = gripper;
  std::vector<std::pair<int, Vec3>> anchors;
  for (int p : anchored_particles) anchors.emplace_back(p, cloth.positions[p]);

  Vec3 dir = opts.pull_direction.normalized();
  double peak = 0.0;
  double traveled = 0.0;
  while (traveled < opts.max_travel) {
    grip.tool_pose.pos += dir * (opts.speed * opts.dt);
    traveled += opts.speed * opts.dt;
    GraspConstraintSet set = emit_constraints(grip, state);
    set.anchors = anchors;
    if (set.entries.empty()) return peak;  // grasp fully lost
    ConstraintStepLog log;
    state = step(state, opts.dt, set, &log);
    double tension = log.finger_force[0] + log.finger_force[1];
    peak = std::max(peak, tension);
    if (tension >= max_force) return max_force;
    if (log.hf_break[0] || log.hf_break[1] || log.lf_slide[0] || log.lf_slide[1])
      return peak;  // first slip
    grip = apply_step_log(grip, log, state);
  }
  return peak;
}

}  // namespace clothbench
