#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <utility>
#include <vector>

#include "clothbench/cloth.hpp"
#include "clothbench/error.hpp"
#include "clothbench/geom.hpp"
#include "clothbench/mask.hpp"

namespace clothbench {

struct Polygon {
  std::vector<Vec2> points;
  bool closed = false;

  double signed_area() const {
    double a = 0.0;
    for (size_t k = 0; k + 1 <= points.size(); ++k) {
      const Vec2& p = points[k];
      const Vec2& q = points[(k + 1) % points.size()];
      a += p.cross(q);
    }
    return 0.5 * a;
  }

  double area() const { return std::abs(signed_area()); }

  Vec2 centroid() const {
    // Area centroid; falls back to vertex mean for degenerate rings.
    double a = 0.0;
    Vec2 c{};
    for (size_t k = 0; k < points.size(); ++k) {
      const Vec2& p = points[k];
      const Vec2& q = points[(k + 1) % points.size()];
      double w = p.cross(q);
      a += w;
      c = c + (p + q) * w;
    }
    if (std::abs(a) < 1e-15) {
      Vec2 m{};
      for (const auto& p : points) m = m + p;
      return m * (1.0 / std::max<size_t>(1, points.size()));
    }
    return c * (1.0 / (3.0 * a));
  }
};

struct CornerSet {
  std::vector<Vec2> corners;  // ordered by polygon winding (CCW)
  Polygon source;
};

namespace detail {

struct Bounds {
  Vec2 lo, hi;
};

inline Bounds cloth_bounds(const ClothState& cloth) {
  Bounds b{{1e30, 1e30}, {-1e30, -1e30}};
  for (const auto& p : cloth.positions) {
    b.lo.x = std::min(b.lo.x, p.x);
    b.lo.y = std::min(b.lo.y, p.y);
    b.hi.x = std::max(b.hi.x, p.x);
    b.hi.y = std::max(b.hi.y, p.y);
  }
  return b;
}

// Shared raster frame for masks and shaded renders of the same state.
inline Bounds padded_bounds(const ClothState& cloth) {
  Bounds b = cloth_bounds(cloth);
  double ex = b.hi.x - b.lo.x, ey = b.hi.y - b.lo.y;
  if (ex < 1e-9 && ey < 1e-9)
    throw Error("rasterize: degenerate cloth (all particles coincident)");
  double px = std::max(ex, 1e-6) * 0.05, py = std::max(ey, 1e-6) * 0.05;
  return {{b.lo.x - px, b.lo.y - py}, {b.hi.x + px, b.hi.y + py}};
}

inline bool point_in_triangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
  double d1 = (p - a).cross(b - a);
  double d2 = (p - b).cross(c - b);
  double d3 = (p - c).cross(a - c);
  bool has_neg = (d1 < 0) || (d2 < 0) || (d3 < 0);
  bool has_pos = (d1 > 0) || (d2 > 0) || (d3 > 0);
  return !(has_neg && has_pos);
}

template <typename Visit>
inline void scan_triangle(const BinaryMask& grid, const Vec2& a, const Vec2& b,
                          const Vec2& c, Visit&& visit) {
  double lox = std::min({a.x, b.x, c.x}), hix = std::max({a.x, b.x, c.x});
  double loy = std::min({a.y, b.y, c.y}), hiy = std::max({a.y, b.y, c.y});
  auto [i0, j0] = grid.world_to_pixel({lox, loy});
  auto [i1, j1] = grid.world_to_pixel({hix, hiy});
  for (int j = std::max(0, j0); j <= std::min(grid.height_px - 1, j1); ++j) {
    for (int i = std::max(0, i0); i <= std::min(grid.width_px - 1, i1); ++i) {
      if (point_in_triangle(grid.pixel_center(i, j), a, b, c)) visit(i, j);
    }
  }
}

}  // namespace detail

// Orthographic top-down occupancy of the cloth surface.
inline BinaryMask rasterize_mask(const ClothState& cloth, double scale) {
  if (!(scale > 0.0)) throw ValidationError("rasterize_mask: scale must be > 0");
  if (cloth.particle_count() == 0) throw ValidationError("rasterize_mask: empty cloth");
  auto b = detail::padded_bounds(cloth);
  int w = std::max(1, static_cast<int>(std::ceil((b.hi.x - b.lo.x) / scale)));
  int h = std::max(1, static_cast<int>(std::ceil((b.hi.y - b.lo.y) / scale)));
  BinaryMask mask(w, h, scale, b.lo);

  for (int iy = 0; iy + 1 < cloth.ny; ++iy) {
    for (int ix = 0; ix + 1 < cloth.nx; ++ix) {
      Vec2 p00 = cloth.positions[cloth.index(ix, iy)].xy();
      Vec2 p10 = cloth.positions[cloth.index(ix + 1, iy)].xy();
      Vec2 p11 = cloth.positions[cloth.index(ix + 1, iy + 1)].xy();
      Vec2 p01 = cloth.positions[cloth.index(ix, iy + 1)].xy();
      auto mark = [&mask](int i, int j) { mask.set(i, j); };
      detail::scan_triangle(mask, p00, p10, p11, mark);
      detail::scan_triangle(mask, p00, p11, p01, mark);
    }
  }
  return mask;
}

// Outer boundary of the largest 8-connected component, as world-coordinate
// pixel centers, counter-clockwise. Interior holes are ignored.
inline Polygon extract_contour(const BinaryMask& mask) {
  if (mask.count() == 0) throw Error("extract_contour: empty mask");

  // Largest component by BFS.
  const int w = mask.width_px, h = mask.height_px;
  std::vector<int> label(static_cast<size_t>(w) * h, -1);
  int best_label = -1;
  size_t best_size = 0;
  int next = 0;
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      if (!mask.at(i, j) || label[static_cast<size_t>(j) * w + i] >= 0) continue;
      size_t size = 0;
      std::deque<std::pair<int, int>> q{{i, j}};
      label[static_cast<size_t>(j) * w + i] = next;
      while (!q.empty()) {
        auto [ci, cj] = q.front();
        q.pop_front();
        ++size;
        for (int dj = -1; dj <= 1; ++dj) {
          for (int di = -1; di <= 1; ++di) {
            int ni = ci + di, nj = cj + dj;
            if (!mask.in_bounds(ni, nj) || !mask.at(ni, nj)) continue;
            int& l = label[static_cast<size_t>(nj) * w + ni];
            if (l < 0) {
              l = next;
              q.push_back({ni, nj});
            }
          }
        }
      }
      if (size > best_size) {
        best_size = size;
        best_label = next;
      }
      ++next;
    }
  }

  auto is_fg = [&](int i, int j) {
    return mask.in_bounds(i, j) && label[static_cast<size_t>(j) * w + i] == best_label;
  };

  // Start: scan-order first pixel of the component.
  int si = -1, sj = -1;
  for (int j = 0; j < h && si < 0; ++j)
    for (int i = 0; i < w; ++i)
      if (is_fg(i, j)) {
        si = i;
        sj = j;
        break;
      }

  // Moore-neighbor tracing with Jacob's stopping criterion.
  static const int DI[8] = {1, 1, 0, -1, -1, -1, 0, 1};
  static const int DJ[8] = {0, 1, 1, 1, 0, -1, -1, -1};
  auto dir_of = [](int di, int dj) {
    for (int d = 0; d < 8; ++d)
      if (DI[d] == di && DJ[d] == dj) return d;
    return 0;
  };

  Polygon poly;
  poly.closed = true;
  poly.points.push_back(mask.pixel_center(si, sj));

  int backtrack = dir_of(-1, 0);  // came from the west (scan order guarantees bg)
  int ci = si, cj = sj;
  int start_backtrack = backtrack;
  bool single = true;
  size_t guard = 8 * best_size + 16;
  while (guard-- > 0) {
    int d = (backtrack + 1) % 8;
    int found = -1;
    for (int k = 0; k < 8; ++k) {
      int dd = (d + k) % 8;
      if (is_fg(ci + DI[dd], cj + DJ[dd])) {
        found = dd;
        break;
      }
      backtrack = dd;
    }
    if (found < 0) break;  // isolated pixel
    single = false;
    ci += DI[found];
    cj += DJ[found];
    backtrack = dir_of(-DI[found], -DJ[found]);
    if (ci == si && cj == sj && backtrack == start_backtrack) break;
    poly.points.push_back(mask.pixel_center(ci, cj));
  }
  (void)single;

  // Drop consecutive duplicates (spur back-tracking revisits pixels).
  std::vector<Vec2> dedup;
  for (const auto& p : poly.points)
    if (dedup.empty() || !(dedup.back() == p)) dedup.push_back(p);
  while (dedup.size() > 1 && dedup.front() == dedup.back()) dedup.pop_back();
  poly.points = std::move(dedup);

  if (poly.points.size() >= 3 && poly.signed_area() < 0.0)
    std::reverse(poly.points.begin() + 1, poly.points.end());
  return poly;
}

namespace detail {

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  Vec2 ab = b - a;
  double len2 = ab.dot(ab);
  if (len2 < 1e-24) return (p - a).norm();
  double t = clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + ab * t)).norm();
}

inline void douglas_peucker(const std::vector<Vec2>& pts, size_t lo, size_t hi,
                            double eps, std::vector<char>& keep) {
  if (hi <= lo + 1) return;
  double dmax = -1.0;
  size_t imax = lo;
  for (size_t k = lo + 1; k < hi; ++k) {
    double d = point_segment_distance(pts[k], pts[lo], pts[hi]);
    if (d > dmax) {
      dmax = d;
      imax = k;
    }
  }
  if (dmax > eps) {
    keep[imax] = 1;
    douglas_peucker(pts, lo, imax, eps, keep);
    douglas_peucker(pts, imax, hi, eps, keep);
  }
}

}  // namespace detail

// Endpoint-fit simplification of a closed ring: anchors at the two
// mutually farthest vertices, then recursive split at max deviation.
inline Polygon simplify_polygon(const Polygon& poly, double epsilon) {
  const auto& pts = poly.points;
  if (pts.size() <= 3) return poly;

  // Anchor on the farthest pair (squared distances).
  size_t a0 = 0, a1 = 0;
  double best = -1.0;
  for (size_t i = 0; i < pts.size(); ++i) {
    for (size_t j = i + 1; j < pts.size(); ++j) {
      Vec2 d = pts[j] - pts[i];
      double n2 = d.dot(d);
      if (n2 > best) {
        best = n2;
        a0 = i;
        a1 = j;
      }
    }
  }

  // Unroll the ring starting at a0 so both chains are contiguous.
  std::vector<Vec2> ring;
  ring.reserve(pts.size() + 1);
  for (size_t k = 0; k < pts.size(); ++k) ring.push_back(pts[(a0 + k) % pts.size()]);
  ring.push_back(pts[a0]);
  size_t split = (a1 + pts.size() - a0) % pts.size();

  std::vector<char> keep(ring.size(), 0);
  keep[0] = 1;
  keep[split] = 1;
  detail::douglas_peucker(ring, 0, split, epsilon, keep);
  detail::douglas_peucker(ring, split, ring.size() - 1, epsilon, keep);

  Polygon out;
  out.closed = true;
  for (size_t k = 0; k + 1 < ring.size(); ++k)
    if (keep[k]) out.points.push_back(ring[k]);
  return out;
}

struct CornerParams {
  double epsilon = 0.008;       // m, simplification tolerance
  double min_turn_deg = 30.0;   // keep vertices turning at least this much
};

// Contour simplification followed by a turn-angle filter.
inline CornerSet detect_corners(const Polygon& polygon, double epsilon = 0.008,
                                double min_turn_deg = 30.0) {
  if (!polygon.closed) throw ValidationError("detect_corners: polygon must be closed");
  if (polygon.points.size() < 3)
    throw ValidationError("detect_corners: polygon needs >= 3 vertices");

  Polygon simp = simplify_polygon(polygon, epsilon);
  CornerSet cs;
  cs.source = polygon;
  const auto& v = simp.points;
  size_t n = v.size();
  for (size_t k = 0; k < n; ++k) {
    Vec2 in = (v[k] - v[(k + n - 1) % n]).normalized();
    Vec2 out = (v[(k + 1) % n] - v[k]).normalized();
    double turn = std::acos(clamp(in.dot(out), -1.0, 1.0));
    if (rad2deg(turn) >= min_turn_deg) cs.corners.push_back(v[k]);
  }
  return cs;
}

struct GraspSelection {
  Vec2 p1, p2;    // p1 lexicographically smaller
  double width = 0.0;
  bool clamped = false;
};

// Two corners on the moving side of the fold: maximize projection onto the
// fold direction, then mutual distance, then lexicographic order. The pair
// score is independent of corner list order.
inline GraspSelection select_grasp_corners(const CornerSet& corners, Vec2 fold_direction,
                                           double width_min = 0.0, double width_max = 0.5) {
  if (corners.corners.size() < 2)
    throw PerceptionError("select_grasp_corners: need at least 2 corners, got " +
                          std::to_string(corners.corners.size()));
  Vec2 dir = fold_direction.normalized();
  if (dir.norm() < 0.5)
    throw ValidationError("select_grasp_corners: fold direction must be nonzero");

  auto lex_less = [](const Vec2& a, const Vec2& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  };

  const auto& c = corners.corners;
  size_t bi = 0, bj = 1;
  bool have = false;
  double best_proj = 0.0, best_dist = 0.0;
  for (size_t i = 0; i < c.size(); ++i) {
    for (size_t j = i + 1; j < c.size(); ++j) {
      const Vec2& a = lex_less(c[i], c[j]) ? c[i] : c[j];
      const Vec2& b = lex_less(c[i], c[j]) ? c[j] : c[i];
      double proj = a.dot(dir) + b.dot(dir);
      double dist = (b - a).norm();
      bool better = false;
      if (!have) {
        better = true;
      } else if (proj != best_proj) {
        better = proj > best_proj;
      } else if (dist != best_dist) {
        better = dist > best_dist;
      } else {
        const Vec2& cur_a = lex_less(c[bi], c[bj]) ? c[bi] : c[bj];
        better = lex_less(a, cur_a);
      }
      if (better) {
        have = true;
        best_proj = proj;
        best_dist = dist;
        bi = i;
        bj = j;
      }
    }
  }

  GraspSelection sel;
  const Vec2& a = c[bi];
  const Vec2& b = c[bj];
  if (lex_less(a, b)) {
    sel.p1 = a;
    sel.p2 = b;
  } else {
    sel.p1 = b;
    sel.p2 = a;
  }
  double d = (sel.p2 - sel.p1).norm();
  sel.width = clamp(d, width_min, width_max);
  sel.clamped = d > width_max || d < width_min;
  return sel;
}

}  // namespace clothbench
