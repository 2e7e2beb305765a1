#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>

#include "roomcloud/rng.hpp"

namespace roomcloud {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline double dist2(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

struct TriMesh {
  std::vector<Point3> vertices;
  std::vector<std::array<int, 3>> triangles;
};

// Closed implicitly: last vertex connects back to the first.
struct Polygon {
  std::vector<Point2> vertices;
};

struct ArcSpec {
  Point2 center;
  double radius = 0.0;
  double start_angle = 0.0;  // radians
  double end_angle = 0.0;    // sampled from start to end
};

class Mask {
 public:
  Mask() = default;
  Mask(int width, int height) : w_(width), h_(height), bits_(static_cast<size_t>(width) * height, 0) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("mask dimensions must be positive");
  }
  int width() const { return w_; }
  int height() const { return h_; }
  bool at(int x, int y) const { return bits_[static_cast<size_t>(y) * w_ + x] != 0; }
  void set(int x, int y, bool v = true) { bits_[static_cast<size_t>(y) * w_ + x] = v ? 1 : 0; }
  bool in_bounds(int x, int y) const { return x >= 0 && x < w_ && y >= 0 && y < h_; }
  std::size_t count() const { return static_cast<size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1})); }
  const std::vector<std::uint8_t>& bits() const { return bits_; }
  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  int w_ = 0, h_ = 0;
  std::vector<std::uint8_t> bits_;
};

inline double polygon_area(const Polygon& p) {
  if (p.vertices.size() < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
  double s = 0.0;
  const auto& v = p.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& a = v[i];
    const auto& b = v[(i + 1) % v.size()];
    s += a.x * b.y - b.x * a.y;
  }
  return 0.5 * s;
}

inline Polygon ensure_ccw(const Polygon& p) {
  const double a = polygon_area(p);
  if (a == 0.0) throw std::invalid_argument("degenerate zero-area polygon");
  if (a > 0.0) return p;
  Polygon out = p;
  std::reverse(out.vertices.begin(), out.vertices.end());
  return out;
}

inline Point2 polygon_centroid(const Polygon& p) {
  const auto& v = p.vertices;
  double a = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& p0 = v[i];
    const auto& p1 = v[(i + 1) % v.size()];
    const double cross = p0.x * p1.y - p1.x * p0.y;
    a += cross;
    cx += (p0.x + p1.x) * cross;
    cy += (p0.y + p1.y) * cross;
  }
  if (a == 0.0) throw std::invalid_argument("degenerate polygon has no centroid");
  return {cx / (3.0 * a), cy / (3.0 * a)};
}

namespace detail {

namespace bg = boost::geometry;
using BoostPoint = bg::model::d2::point_xy<double>;
using BoostPolygon = bg::model::polygon<BoostPoint, /*Clockwise=*/false, /*Closed=*/true>;
using BoostMulti = bg::model::multi_polygon<BoostPolygon>;

inline BoostPolygon to_boost(const Polygon& p) {
  BoostPolygon bp;
  for (const auto& v : p.vertices) bg::append(bp.outer(), BoostPoint(v.x, v.y));
  bg::correct(bp);
  return bp;
}

}  // namespace detail

// Area-based intersection-over-union of two simple polygons.
inline double polygon_iou(const Polygon& a, const Polygon& b) {
  namespace bg = boost::geometry;
  const auto pa = detail::to_boost(a);
  const auto pb = detail::to_boost(b);
  if (bg::area(pa) <= 0.0 || bg::area(pb) <= 0.0) throw std::invalid_argument("degenerate polygon in iou");
  detail::BoostMulti inter, uni;
  bg::intersection(pa, pb, inter);
  bg::union_(pa, pb, uni);
  const double ai = bg::area(inter);
  const double au = bg::area(uni);
  if (au <= 0.0) return 0.0;
  return std::clamp(ai / au, 0.0, 1.0);
}

// |both set| / |either set|; two empty masks count as identical (1.0).
inline double mask_iou(const Mask& a, const Mask& b) {
  if (a.width() != b.width() || a.height() != b.height()) throw std::invalid_argument("mask dimension mismatch");
  std::size_t inter = 0, uni = 0;
  const auto& ba = a.bits();
  const auto& bb = b.bits();
  for (std::size_t i = 0; i < ba.size(); ++i) {
    inter += (ba[i] & bb[i]);
    uni += (ba[i] | bb[i]);
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

inline std::vector<Point2> sample_arc(const ArcSpec& a, int segments) {
  if (a.radius <= 0.0) throw std::invalid_argument("arc radius must be positive");
  std::vector<Point2> pts;
  pts.reserve(segments + 1);
  for (int i = 0; i <= segments; ++i) {
    const double t = a.start_angle + (a.end_angle - a.start_angle) * i / segments;
    pts.push_back({a.center.x + a.radius * std::cos(t), a.center.y + a.radius * std::sin(t)});
  }
  return pts;
}

inline constexpr int kArcSegments = 16;

// Replace each polygon edge whose endpoints match an arc's endpoints with the
// discretized arc. Arcs that match no edge are ignored.
inline Polygon splice_arcs(const Polygon& p, const std::vector<ArcSpec>& arcs, int segments = kArcSegments) {
  if (arcs.empty()) return p;
  const double eps = 1e-9;
  Polygon out;
  const auto& v = p.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point2& a = v[i];
    const Point2& b = v[(i + 1) % v.size()];
    out.vertices.push_back(a);
    for (const auto& arc : arcs) {
      const auto pts = sample_arc(arc, segments);
      if (dist2(pts.front(), a) < eps && dist2(pts.back(), b) < eps) {
        out.vertices.insert(out.vertices.end(), pts.begin() + 1, pts.end() - 1);
        break;
      }
    }
  }
  return out;
}

enum class RasterMode { kOutline, kFilled };

namespace detail {

inline void bresenham(Mask& m, int x0, int y0, int x1, int y1) {
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    m.set(x0, y0);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) { err += dy; x0 += sx; }
    if (e2 <= dx) { err += dx; y0 += sy; }
  }
}

// Even-odd test against pixel center (x+0.5, y+0.5).
inline bool center_inside(const std::vector<Point2>& v, double cx, double cy) {
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    const bool cross = (v[i].y > cy) != (v[j].y > cy);
    if (cross) {
      const double xi = v[j].x + (cy - v[j].y) / (v[i].y - v[j].y) * (v[i].x - v[j].x);
      if (cx < xi) inside = !inside;
    }
  }
  return inside;
}

}  // namespace detail

// Pixel (x, y) covers the unit square [x, x+1) x [y, y+1); filled mode
// classifies by center containment, outline mode strokes the edges.
inline Mask rasterize_polygon(const Polygon& p, int width, int height, RasterMode mode,
                              const std::vector<ArcSpec>& arcs = {}) {
  Mask m(width, height);
  if (p.vertices.empty()) return m;
  const Polygon poly = splice_arcs(p, arcs);
  for (const auto& v : poly.vertices) {
    if (v.x < 0.0 || v.y < 0.0 || v.x > width || v.y > height)
      throw std::invalid_argument("polygon exceeds canvas bounds");
  }
  if (mode == RasterMode::kOutline) {
    const auto& v = poly.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto& a = v[i];
      const auto& b = v[(i + 1) % v.size()];
      const auto px = [&](double c, int n) { return std::clamp(static_cast<int>(std::lround(c)), 0, n - 1); };
      detail::bresenham(m, px(a.x, width), px(a.y, height), px(b.x, width), px(b.y, height));
    }
  } else {
    double min_x = poly.vertices[0].x, max_x = min_x, min_y = poly.vertices[0].y, max_y = min_y;
    for (const auto& v : poly.vertices) {
      min_x = std::min(min_x, v.x); max_x = std::max(max_x, v.x);
      min_y = std::min(min_y, v.y); max_y = std::max(max_y, v.y);
    }
    const int x0 = std::max(0, static_cast<int>(std::floor(min_x)) - 1);
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(max_x)) + 1);
    const int y0 = std::max(0, static_cast<int>(std::floor(min_y)) - 1);
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(max_y)) + 1);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x)
        if (detail::center_inside(poly.vertices, x + 0.5, y + 0.5)) m.set(x, y);
  }
  return m;
}

namespace detail {

// Moore neighborhood, clockwise in image coordinates starting east.
inline constexpr int kMooreDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
inline constexpr int kMooreDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};

}  // namespace detail

// Moore boundary tracing with 8-connectivity; one polygon per connected
// component, normalized to positive shoelace orientation.
inline std::vector<Polygon> contour_extract(const Mask& m) {
  std::vector<Polygon> out;
  std::vector<std::uint8_t> seen(static_cast<size_t>(m.width()) * m.height(), 0);
  const auto idx = [&](int x, int y) { return static_cast<size_t>(y) * m.width() + x; };

  for (int sy = 0; sy < m.height(); ++sy) {
    for (int sx = 0; sx < m.width(); ++sx) {
      if (!m.at(sx, sy) || seen[idx(sx, sy)]) continue;

      // Trace this component's outer boundary. The walk is a deterministic
      // function of (pixel, backtrack direction), so the loop is closed once
      // the state recorded right after the first move repeats.
      std::vector<Point2> boundary;
      int cx = sx, cy = sy;
      // Backtrack starts west of the start pixel (raster-order scan guarantee).
      int dir = 4;
      int init_x = -1, init_y = -1, init_dir = -1;
      std::size_t guard = 8 * seen.size() + 16;
      for (;;) {
        if (init_dir >= 0 && boundary.size() > 1 && cx == init_x && cy == init_y && dir == init_dir) break;
        boundary.push_back({static_cast<double>(cx), static_cast<double>(cy)});
        int d = (dir + 1) % 8;
        bool moved = false;
        for (int k = 0; k < 8; ++k, d = (d + 1) % 8) {
          const int nx = cx + detail::kMooreDx[d];
          const int ny = cy + detail::kMooreDy[d];
          if (m.in_bounds(nx, ny) && m.at(nx, ny)) {
            cx = nx; cy = ny;
            dir = (d + 4) % 8;  // backtrack direction
            moved = true;
            break;
          }
        }
        if (!moved || guard-- == 0) break;  // isolated pixel
        if (init_dir < 0) { init_x = cx; init_y = cy; init_dir = dir; }
      }
      if (boundary.size() > 1 && boundary.front() == boundary.back()) boundary.pop_back();

      // Flood-fill the component so interior pixels don't start new traces.
      std::vector<std::pair<int, int>> stack{{sx, sy}};
      seen[idx(sx, sy)] = 1;
      while (!stack.empty()) {
        auto [x, y] = stack.back();
        stack.pop_back();
        for (int d = 0; d < 8; ++d) {
          const int nx = x + detail::kMooreDx[d];
          const int ny = y + detail::kMooreDy[d];
          if (m.in_bounds(nx, ny) && m.at(nx, ny) && !seen[idx(nx, ny)]) {
            seen[idx(nx, ny)] = 1;
            stack.push_back({nx, ny});
          }
        }
      }

      Polygon poly{std::move(boundary)};
      if (poly.vertices.size() >= 3) {
        double a = 0.0;
        for (std::size_t i = 0; i < poly.vertices.size(); ++i) {
          const auto& p0 = poly.vertices[i];
          const auto& p1 = poly.vertices[(i + 1) % poly.vertices.size()];
          a += p0.x * p1.y - p1.x * p0.y;
        }
        if (a < 0.0) std::reverse(poly.vertices.begin(), poly.vertices.end());
      }
      out.push_back(std::move(poly));
    }
  }
  return out;
}

inline double triangle_area(const Point3& a, const Point3& b, const Point3& c) {
  const double ux = b.x - a.x, uy = b.y - a.y, uz = b.z - a.z;
  const double vx = c.x - a.x, vy = c.y - a.y, vz = c.z - a.z;
  const double cx = uy * vz - uz * vy;
  const double cy = uz * vx - ux * vz;
  const double cz = ux * vy - uy * vx;
  return 0.5 * std::sqrt(cx * cx + cy * cy + cz * cz);
}

// Area-weighted triangle selection, then uniform barycentric placement.
inline std::vector<Point3> sample_mesh(const TriMesh& mesh, std::size_t n, std::uint64_t seed) {
  std::vector<double> cum;
  cum.reserve(mesh.triangles.size());
  double total = 0.0;
  for (const auto& t : mesh.triangles) {
    for (int i : t)
      if (i < 0 || i >= static_cast<int>(mesh.vertices.size())) throw std::invalid_argument("triangle index out of range");
    total += triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    cum.push_back(total);
  }
  if (total <= 0.0) throw std::invalid_argument("mesh has zero total area");

  Rng rng(seed);
  std::vector<Point3> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = rng.uniform() * total;
    const auto it = std::upper_bound(cum.begin(), cum.end(), r);
    const auto& t = mesh.triangles[std::min<std::size_t>(it - cum.begin(), cum.size() - 1)];
    const auto& a = mesh.vertices[t[0]];
    const auto& b = mesh.vertices[t[1]];
    const auto& c = mesh.vertices[t[2]];
    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    const double wa = 1.0 - r1, wb = r1 * (1.0 - r2), wc = r1 * r2;
    pts.push_back({wa * a.x + wb * b.x + wc * c.x,
                   wa * a.y + wb * b.y + wc * c.y,
                   wa * a.z + wb * b.z + wc * c.z});
  }
  return pts;
}

// Resample a polygon boundary to exactly b vertices. When b >= |vertices| the
// originals are kept and extra points are inserted on the longest edges by arc
// length; otherwise b points are spaced evenly along the perimeter from vertex 0.
inline Polygon resample_boundary(const Polygon& p, int b) {
  if (b < 3) throw std::invalid_argument("resample_boundary needs b >= 3");
  const auto& v = p.vertices;
  const int n = static_cast<int>(v.size());
  if (n < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
  if (b == n) return p;

  if (b > n) {
    // extra[i] points get inserted on edge i, chosen greedily by resulting segment length
    std::vector<int> extra(n, 0);
    std::vector<double> len(n);
    for (int i = 0; i < n; ++i) len[i] = std::sqrt(dist2(v[i], v[(i + 1) % n]));
    for (int k = 0; k < b - n; ++k) {
      int best = 0;
      double best_seg = -1.0;
      for (int i = 0; i < n; ++i) {
        const double seg = len[i] / (extra[i] + 1);
        if (seg > best_seg) { best_seg = seg; best = i; }
      }
      ++extra[best];
    }
    Polygon out;
    out.vertices.reserve(b);
    for (int i = 0; i < n; ++i) {
      const Point2& a = v[i];
      const Point2& c = v[(i + 1) % n];
      out.vertices.push_back(a);
      for (int k = 1; k <= extra[i]; ++k) {
        const double t = static_cast<double>(k) / (extra[i] + 1);
        out.vertices.push_back({a.x + t * (c.x - a.x), a.y + t * (c.y - a.y)});
      }
    }
    return out;
  }

  // Downsample: evenly spaced by arc length starting at vertex 0.
  std::vector<double> cum(n + 1, 0.0);
  for (int i = 0; i < n; ++i) cum[i + 1] = cum[i] + std::sqrt(dist2(v[i], v[(i + 1) % n]));
  const double per = cum[n];
  Polygon out;
  out.vertices.reserve(b);
  int edge = 0;
  for (int k = 0; k < b; ++k) {
    const double s = per * k / b;
    while (edge + 1 < n && cum[edge + 1] <= s) ++edge;
    const double t = (s - cum[edge]) / std::max(cum[edge + 1] - cum[edge], 1e-300);
    const Point2& a = v[edge];
    const Point2& c = v[(edge + 1) % n];
    out.vertices.push_back({a.x + t * (c.x - a.x), a.y + t * (c.y - a.y)});
  }
  return out;
}

}  // namespace roomcloud
