#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "roomcloud/geom.hpp"
#include "roomcloud/rng.hpp"
#include "roomcloud/walls.hpp"

namespace roomcloud {

enum class ShapeTag { kRectangular, kRectilinear, kNonRight, kCurved };
enum class Ordering { kRandom, kTrueSort, kPseudoSort };

inline const char* to_string(ShapeTag t) {
  switch (t) {
    case ShapeTag::kRectangular: return "rectangular";
    case ShapeTag::kRectilinear: return "rectilinear";
    case ShapeTag::kNonRight: return "nonright";
    case ShapeTag::kCurved: return "curved";
  }
  return "?";
}

inline const char* to_string(Ordering o) {
  switch (o) {
    case Ordering::kRandom: return "random";
    case Ordering::kTrueSort: return "truesort";
    case Ordering::kPseudoSort: return "pseudosort";
  }
  return "?";
}

inline Ordering ordering_from_string(const std::string& s) {
  if (s == "random") return Ordering::kRandom;
  if (s == "truesort") return Ordering::kTrueSort;
  if (s == "pseudosort") return Ordering::kPseudoSort;
  throw std::invalid_argument("unknown ordering: " + s);
}

struct GenConfig {
  int max_rooms = 5;
  double edge_min = 2.0;   // meters
  double edge_max = 8.0;
  int canvas = 128;
  int border_points = 10;  // b
  int p_n = 300;
  double shrink = 0.1;     // meters, per side
  double jitter_prob = 0.5;
  double dropout_prob = 0.1;
  // rectangular, rectilinear, nonright, curved
  std::array<double, 4> shape_weights{0.25, 0.25, 0.25, 0.25};
  std::uint64_t seed = 0;
};

struct Room {
  Polygon poly;  // final boundary, arcs already discretized
  ShapeTag tag = ShapeTag::kRectangular;
  std::vector<ArcSpec> arcs;
};

struct Scene {
  std::vector<Room> rooms;
  int canvas = 128;
};

// Oriented rectangle: corner p, unit direction v, length l, width w.
struct Rect {
  Point2 p;
  Point2 v;
  double l = 0, w = 0;
};

inline Point2 perp_ccw(const Point2& v) { return {-v.y, v.x}; }

inline Polygon gen_rectangle(const Point2& p, const Point2& v, double l, double w) {
  if (std::abs(std::hypot(v.x, v.y) - 1.0) > 1e-9) throw std::invalid_argument("direction must be a unit vector");
  if (l <= 0 || w <= 0) throw std::invalid_argument("rectangle sides must be positive");
  const Point2 u = perp_ccw(v);
  const Point2 p2{p.x + v.x * l, p.y + v.y * l};
  const Point2 p3{p2.x + u.x * w, p2.y + u.y * w};
  const Point2 p4{p3.x - v.x * l, p3.y - v.y * l};
  return Polygon{{p, p2, p3, p4}};
}

inline Polygon rect_polygon(const Rect& r) { return gen_rectangle(r.p, r.v, r.l, r.w); }

inline Rect shrink_rect(const Rect& r, double s) {
  if (r.l <= 2 * s || r.w <= 2 * s) throw std::invalid_argument("rectangle too small to shrink");
  const Point2 u = perp_ccw(r.v);
  return {{r.p.x + r.v.x * s + u.x * s, r.p.y + r.v.y * s + u.y * s}, r.v, r.l - 2 * s, r.w - 2 * s};
}

namespace detail {

inline double cross3(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline double point_segment_dist2(const Point2& p, const Point2& a, const Point2& b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return dist2(p, {a.x + t * vx, a.y + t * vy});
}

// Boundary points (within tol) do not count as inside.
inline bool strictly_inside(const Point2& p, const Polygon& poly, double tol) {
  const auto& v = poly.vertices;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i)
    if (point_segment_dist2(p, v[i], v[(i + 1) % n]) < tol * tol) return false;
  bool in = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if ((v[i].y > p.y) != (v[j].y > p.y)) {
      const double xint = v[j].x + (p.y - v[j].y) / (v[i].y - v[j].y) * (v[i].x - v[j].x);
      if (p.x < xint) in = !in;
    }
  }
  return in;
}

inline bool segments_properly_cross(const Point2& a, const Point2& b, const Point2& c,
                                    const Point2& d, double eps) {
  const double d1 = cross3(c, d, a), d2 = cross3(c, d, b);
  const double d3 = cross3(a, b, c), d4 = cross3(a, b, d);
  return ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps)) &&
         ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps));
}

// True when the interiors intersect with more than hairline contact. The
// clipped-area test alone is not enough: Boost resolves some shared-corner,
// collinear-edge configurations to an empty intersection, so a direct
// containment/crossing check backs it up.
inline bool polys_overlap(const Polygon& a, const Polygon& b) {
  namespace bg = boost::geometry;
  BoostMulti inter;
  bg::intersection(to_boost(a), to_boost(b), inter);
  if (bg::area(inter) > 1e-9) return true;
  constexpr double tol = 1e-9;
  for (const auto& p : a.vertices)
    if (strictly_inside(p, b, tol)) return true;
  for (const auto& p : b.vertices)
    if (strictly_inside(p, a, tol)) return true;
  const std::size_t na = a.vertices.size(), nb = b.vertices.size();
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j)
      if (segments_properly_cross(a.vertices[i], a.vertices[(i + 1) % na],
                                  b.vertices[j], b.vertices[(j + 1) % nb], tol))
        return true;
  return false;
}

}  // namespace detail

// Adjacent rectangles anchored at corners of existing ones; overlapping
// candidates are rejected and resampled, up to 20 attempts per room; finally
// every rectangle is shrunk inward on all sides.
inline std::vector<Rect> place_rooms(const GenConfig& cfg, Rng& rng) {
  const int target = rng.uniform_int(1, cfg.max_rooms);
  const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const Point2 axis{std::cos(theta), std::sin(theta)};
  const std::array<Point2, 4> dirs{axis, perp_ccw(axis),
                                   Point2{-axis.x, -axis.y}, Point2{axis.y, -axis.x}};

  std::vector<Rect> rects;
  rects.push_back({{0.0, 0.0}, axis,
                   rng.uniform(cfg.edge_min, cfg.edge_max), rng.uniform(cfg.edge_min, cfg.edge_max)});
  std::vector<Polygon> polys{rect_polygon(rects[0])};

  while (static_cast<int>(rects.size()) < target) {
    bool placed = false;
    for (int attempt = 0; attempt < 20 && !placed; ++attempt) {
      const auto& host = polys[rng.below(polys.size())];
      const Point2 corner = host.vertices[rng.below(4)];
      const Rect cand{corner, dirs[rng.below(4)],
                      rng.uniform(cfg.edge_min, cfg.edge_max), rng.uniform(cfg.edge_min, cfg.edge_max)};
      const Polygon cp = rect_polygon(cand);
      bool overlap = false;
      for (const auto& existing : polys)
        if (detail::polys_overlap(cp, existing)) { overlap = true; break; }
      if (!overlap) {
        rects.push_back(cand);
        polys.push_back(cp);
        placed = true;
      }
    }
    if (!placed) break;  // settle for fewer rooms
  }
  for (auto& r : rects) r = shrink_rect(r, cfg.shrink);
  return rects;
}

// Corner -> midpoint of first edge, rectangle center, midpoint of second edge.
inline Polygon morph_rectilinear(const Polygon& rect, int corner_idx) {
  const auto& v = rect.vertices;
  if (v.size() != 4) throw std::invalid_argument("morph expects a rectangle");
  const int i = corner_idx & 3;
  const Point2& c = v[i];
  const Point2& prev = v[(i + 3) % 4];
  const Point2& next = v[(i + 1) % 4];
  const Point2 m1{0.5 * (prev.x + c.x), 0.5 * (prev.y + c.y)};
  const Point2 m2{0.5 * (c.x + next.x), 0.5 * (c.y + next.y)};
  const Point2 center{0.25 * (v[0].x + v[1].x + v[2].x + v[3].x),
                      0.25 * (v[0].y + v[1].y + v[2].y + v[3].y)};
  return Polygon{{m2, v[(i + 1) % 4], v[(i + 2) % 4], v[(i + 3) % 4], m1, center}};
}

// Corner -> two points at fractions f1 (incoming edge) and f2 (outgoing edge).
inline Polygon morph_nonright(const Polygon& rect, int corner_idx, double f1, double f2) {
  const auto& v = rect.vertices;
  if (v.size() != 4) throw std::invalid_argument("morph expects a rectangle");
  const int i = corner_idx & 3;
  const Point2& c = v[i];
  const Point2& prev = v[(i + 3) % 4];
  const Point2& next = v[(i + 1) % 4];
  const Point2 a{c.x + f1 * (prev.x - c.x), c.y + f1 * (prev.y - c.y)};
  const Point2 b{c.x + f2 * (next.x - c.x), c.y + f2 * (next.y - c.y)};
  return Polygon{{b, v[(i + 1) % 4], v[(i + 2) % 4], v[(i + 3) % 4], a}};
}

// Edge -> outward semicircle, radius = half the edge length.
inline std::pair<Polygon, ArcSpec> morph_halfcircle(const Polygon& rect, int edge_idx) {
  const auto& v = rect.vertices;
  if (v.size() != 4) throw std::invalid_argument("morph expects a rectangle");
  const int i = edge_idx & 3;
  const Point2& a = v[i];
  const Point2& b = v[(i + 1) % 4];
  const Point2 center{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
  const double r = 0.5 * std::sqrt(dist2(a, b));
  const double t0 = std::atan2(a.y - center.y, a.x - center.x);
  // +pi sweep bulges outward for a CCW rectangle
  return {rect, ArcSpec{center, r, t0, t0 + std::numbers::pi}};
}

// Corner -> inward-rounding quarter circle, radius = half the shorter incident edge.
inline std::pair<Polygon, ArcSpec> morph_quartercircle(const Polygon& rect, int corner_idx) {
  const auto& v = rect.vertices;
  if (v.size() != 4) throw std::invalid_argument("morph expects a rectangle");
  const int i = corner_idx & 3;
  const Point2& c = v[i];
  const Point2& prev = v[(i + 3) % 4];
  const Point2& next = v[(i + 1) % 4];
  const double len_in = std::sqrt(dist2(prev, c));
  const double len_out = std::sqrt(dist2(c, next));
  const double r = 0.5 * std::min(len_in, len_out);
  const Point2 u_in{(prev.x - c.x) / len_in, (prev.y - c.y) / len_in};
  const Point2 u_out{(next.x - c.x) / len_out, (next.y - c.y) / len_out};
  const Point2 t1{c.x + r * u_in.x, c.y + r * u_in.y};
  const Point2 t2{c.x + r * u_out.x, c.y + r * u_out.y};
  const Point2 center{c.x + r * (u_in.x + u_out.x), c.y + r * (u_in.y + u_out.y)};
  const double a1 = std::atan2(t1.y - center.y, t1.x - center.x);
  Polygon out{{t2, v[(i + 1) % 4], v[(i + 2) % 4], v[(i + 3) % 4], t1}};
  return {out, ArcSpec{center, r, a1, a1 + std::numbers::pi / 2}};
}

// Apply a shape family to each placed rectangle; a morph that would collide
// with another room (half circles bulge outward) falls back to other
// edges/corners and finally to the plain rectangle.
inline Scene build_scene(const GenConfig& cfg, Rng& rng) {
  const auto rects = place_rooms(cfg, rng);
  Scene scene;
  scene.canvas = cfg.canvas;
  double wsum = 0.0;
  for (double w : cfg.shape_weights) wsum += w;
  if (wsum <= 0.0) throw std::invalid_argument("shape weights must not all be zero");

  for (std::size_t ri = 0; ri < rects.size(); ++ri) {
    const Polygon base = rect_polygon(rects[ri]);
    double pick = rng.uniform() * wsum;
    int family = 0;
    for (; family < 3 && pick >= cfg.shape_weights[family]; ++family) pick -= cfg.shape_weights[family];

    Room room{base, ShapeTag::kRectangular, {}};
    if (family != 0) {
      const int spin = static_cast<int>(rng.below(4));
      const bool quarter = family == 3 && rng.bernoulli(0.5);
      const double f1 = rng.uniform(0.25, 0.75);
      const double f2 = rng.uniform(0.25, 0.75);
      for (int k = 0; k < 4; ++k) {
        const int idx = (spin + k) % 4;
        Room cand;
        if (family == 1) {
          cand = {morph_rectilinear(base, idx), ShapeTag::kRectilinear, {}};
        } else if (family == 2) {
          cand = {morph_nonright(base, idx, f1, f2), ShapeTag::kNonRight, {}};
        } else if (quarter) {
          auto [poly, arc] = morph_quartercircle(base, idx);
          cand = {splice_arcs(poly, {arc}), ShapeTag::kCurved, {arc}};
        } else {
          auto [poly, arc] = morph_halfcircle(base, idx);
          cand = {splice_arcs(poly, {arc}), ShapeTag::kCurved, {arc}};
        }
        bool overlap = false;
        for (std::size_t rj = 0; rj < rects.size() && !overlap; ++rj)
          if (rj != ri && detail::polys_overlap(cand.poly, rect_polygon(rects[rj]))) overlap = true;
        for (const auto& other : scene.rooms)
          if (overlap || detail::polys_overlap(cand.poly, other.poly)) { overlap = true; break; }
        if (!overlap) { room = std::move(cand); break; }
      }
    }
    scene.rooms.push_back(std::move(room));
  }

  // Stable room order: bounding-box (min-y, min-x).
  std::sort(scene.rooms.begin(), scene.rooms.end(), [](const Room& a, const Room& b) {
    const auto key = [](const Room& r) {
      double mx = r.poly.vertices[0].x, my = r.poly.vertices[0].y;
      for (const auto& v : r.poly.vertices) { mx = std::min(mx, v.x); my = std::min(my, v.y); }
      return std::pair{my, mx};
    };
    return key(a) < key(b);
  });
  return scene;
}

struct SceneTransform {
  double scale = 1, off_x = 0, off_y = 0;
  Point2 apply(const Point2& p) const { return {p.x * scale + off_x, p.y * scale + off_y}; }
};

inline SceneTransform fit_to_canvas(const Scene& s, int margin = 4) {
  double min_x = s.rooms[0].poly.vertices[0].x, max_x = min_x;
  double min_y = s.rooms[0].poly.vertices[0].y, max_y = min_y;
  for (const auto& r : s.rooms)
    for (const auto& v : r.poly.vertices) {
      min_x = std::min(min_x, v.x); max_x = std::max(max_x, v.x);
      min_y = std::min(min_y, v.y); max_y = std::max(max_y, v.y);
    }
  const double extent = std::max({max_x - min_x, max_y - min_y, 1e-12});
  const double scale = (s.canvas - 2.0 * margin) / extent;
  return {scale,
          0.5 * (s.canvas - scale * (max_x - min_x)) - scale * min_x,
          0.5 * (s.canvas - scale * (max_y - min_y)) - scale * min_y};
}

inline Polygon transform_polygon(const Polygon& p, const SceneTransform& t) {
  Polygon out;
  out.vertices.reserve(p.vertices.size());
  for (const auto& v : p.vertices) out.vertices.push_back(t.apply(v));
  return out;
}

struct RenderedScene {
  Mask wall_image;
  std::vector<Mask> room_masks;     // filled, un-jittered
  std::vector<int> pixel_owner;     // room index per wall pixel, -1 = none
  SceneTransform transform;
};

inline Mask jitter_mask(const Mask& m, double prob, Rng& rng) {
  Mask out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      if (!m.at(x, y)) continue;
      int nx = x, ny = y;
      if (rng.bernoulli(prob)) {
        const int d = static_cast<int>(rng.below(8));
        nx = x + detail::kMooreDx[d];
        ny = y + detail::kMooreDy[d];
        if (!m.in_bounds(nx, ny)) { nx = x; ny = y; }
      }
      out.set(nx, ny);
    }
  return out;
}

inline RenderedScene render_scene(const Scene& s, const GenConfig& cfg, Rng& rng) {
  RenderedScene out;
  out.transform = fit_to_canvas(s);
  out.wall_image = Mask(s.canvas, s.canvas);
  out.pixel_owner.assign(static_cast<size_t>(s.canvas) * s.canvas, -1);

  for (std::size_t ri = 0; ri < s.rooms.size(); ++ri) {
    const Polygon px = transform_polygon(s.rooms[ri].poly, out.transform);
    Mask outline = rasterize_polygon(px, s.canvas, s.canvas, RasterMode::kOutline);
    if (cfg.jitter_prob > 0.0) outline = jitter_mask(outline, cfg.jitter_prob, rng);
    for (int y = 0; y < s.canvas; ++y)
      for (int x = 0; x < s.canvas; ++x)
        if (outline.at(x, y) && !out.wall_image.at(x, y)) {
          out.wall_image.set(x, y);
          out.pixel_owner[static_cast<size_t>(y) * s.canvas + x] = static_cast<int>(ri);
        }
    out.room_masks.push_back(rasterize_polygon(px, s.canvas, s.canvas, RasterMode::kFilled));
  }

  if (cfg.dropout_prob > 0.0) {
    for (int y = 0; y < s.canvas; ++y)
      for (int x = 0; x < s.canvas; ++x)
        if (out.wall_image.at(x, y) && rng.bernoulli(cfg.dropout_prob)) {
          out.wall_image.set(x, y, false);
          out.pixel_owner[static_cast<size_t>(y) * s.canvas + x] = -1;
        }
  }
  return out;
}

// Nearest-neighbor chain ordering: start at element 0, repeatedly append the
// unused point closest to the last chosen one. Returns a permutation.
inline std::vector<std::size_t> pseudo_sort_order(const std::vector<Point2>& pts) {
  if (pts.empty()) throw std::invalid_argument("pseudo_sort on empty input");
  const std::size_t n = pts.size();
  std::vector<std::size_t> order;
  order.reserve(n);
  std::vector<bool> used(n, false);
  std::size_t cur = 0;
  order.push_back(0);
  used[0] = true;
  for (std::size_t k = 1; k < n; ++k) {
    std::size_t best = n;
    double best_d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      const double d = dist2(pts[cur], pts[i]);
      if (best == n || d < best_d) { best = i; best_d = d; }
    }
    used[best] = true;
    order.push_back(best);
    cur = best;
  }
  return order;
}

inline std::vector<Point2> pseudo_sort(const std::vector<Point2>& pts) {
  std::vector<Point2> out;
  out.reserve(pts.size());
  for (std::size_t i : pseudo_sort_order(pts)) out.push_back(pts[i]);
  return out;
}

// Group points by room (rooms already in scene order), each group sorted
// anticlockwise about the room centroid starting from the group's
// lowest-then-leftmost point. Requires per-point room assignment.
inline std::vector<std::size_t> true_sort_order(const std::vector<Point2>& pts,
                                                const std::vector<int>& owners,
                                                const std::vector<Point2>& centroids) {
  if (pts.size() != owners.size()) throw std::invalid_argument("true_sort: owner list size mismatch");
  for (int o : owners)
    if (o < 0 || o >= static_cast<int>(centroids.size())) throw std::invalid_argument("true_sort: unknown room assignment");
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  std::vector<std::size_t> order;
  order.reserve(pts.size());
  for (int room = 0; room < static_cast<int>(centroids.size()); ++room) {
    std::vector<std::size_t> group;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (owners[i] == room) group.push_back(i);
    if (group.empty()) continue;
    std::size_t lowest = group[0];
    for (std::size_t i : group)
      if (std::pair{pts[i].y, pts[i].x} < std::pair{pts[lowest].y, pts[lowest].x}) lowest = i;
    const Point2 c = centroids[room];
    const double base = std::atan2(pts[lowest].y - c.y, pts[lowest].x - c.x);
    const auto key = [&](std::size_t i) {
      const double a = std::atan2(pts[i].y - c.y, pts[i].x - c.x) - base;
      return std::fmod(a + 2.0 * kTwoPi, kTwoPi);
    };
    std::stable_sort(group.begin(), group.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
    order.insert(order.end(), group.begin(), group.end());
  }
  return order;
}

struct LayoutSample {
  std::vector<Point2> points;       // ordered, in [-1,1]^2
  std::vector<int> labels;          // b * k_rooms pointer indices
  int k_rooms = 0;
  int b = 0;
  Ordering ordering = Ordering::kRandom;
  std::vector<std::string> shape_tags;
  std::vector<Polygon> gt_rooms;    // normalized ground-truth room polygons
};

namespace detail {

inline Polygon pixel_poly_to_norm(const Polygon& px, int canvas, const Normalizer& n) {
  Polygon out;
  out.vertices.reserve(px.vertices.size());
  for (const auto& v : px.vertices) out.vertices.push_back(n.apply({v.x, canvas - 1.0 - v.y}));
  return out;
}

inline void rotate_to_lowest_leftmost(Polygon& p) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.vertices.size(); ++i)
    if (std::pair{p.vertices[i].y, p.vertices[i].x} < std::pair{p.vertices[best].y, p.vertices[best].x}) best = i;
  std::rotate(p.vertices.begin(), p.vertices.begin() + best, p.vertices.end());
}

}  // namespace detail

// Derive the PtrNet training pair from a rendered scene. Returns nullopt when
// the noisy wall image came out unusable (caller should regenerate).
inline std::optional<LayoutSample> make_ptrnet_sample(const Scene& scene, const RenderedScene& rendered,
                                                      const GenConfig& cfg, Ordering ordering, Rng& rng) {
  const int d = scene.canvas;
  std::vector<Point2> pts;
  std::vector<int> owners;
  for (int y = 0; y < d; ++y)
    for (int x = 0; x < d; ++x)
      if (rendered.wall_image.at(x, y)) {
        pts.push_back(pixel_to_point(y, x, d));
        owners.push_back(rendered.pixel_owner[static_cast<size_t>(y) * d + x]);
      }
  if (pts.size() < 2) return std::nullopt;

  Normalizer norm;
  try {
    norm = fit_normalizer(pts);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
  for (auto& p : pts) p = norm.apply(p);

  const auto chosen = subsample_indices(pts.size(), static_cast<std::size_t>(cfg.p_n), rng);
  std::vector<Point2> sel;
  std::vector<int> sel_owner;
  for (std::size_t i : chosen) {
    sel.push_back(pts[i]);
    sel_owner.push_back(owners[i]);
  }

  LayoutSample out;
  out.b = cfg.border_points;
  out.k_rooms = static_cast<int>(scene.rooms.size());
  out.ordering = ordering;

  // Normalized ground-truth polygons, CCW from the lowest-then-leftmost vertex.
  std::vector<Polygon> gt;
  for (const auto& room : scene.rooms) {
    Polygon p = detail::pixel_poly_to_norm(transform_polygon(room.poly, rendered.transform), d, norm);
    p = ensure_ccw(p);
    detail::rotate_to_lowest_leftmost(p);
    gt.push_back(std::move(p));
    out.shape_tags.emplace_back(to_string(room.tag));
  }

  std::vector<std::size_t> order;
  switch (ordering) {
    case Ordering::kRandom:
      order.resize(sel.size());
      for (std::size_t i = 0; i < sel.size(); ++i) order[i] = i;
      break;
    case Ordering::kPseudoSort:
      order = pseudo_sort_order(sel);
      break;
    case Ordering::kTrueSort: {
      std::vector<Point2> centroids;
      for (const auto& p : gt) centroids.push_back(polygon_centroid(p));
      order = true_sort_order(sel, sel_owner, centroids);
      break;
    }
  }
  for (std::size_t i : order) out.points.push_back(sel[i]);
  if (out.points.size() < 3) return std::nullopt;

  for (const auto& p : gt) {
    const Polygon border = resample_boundary(p, cfg.border_points);
    for (const auto& v : border.vertices) {
      std::size_t best = 0;
      double best_d = dist2(v, out.points[0]);
      for (std::size_t i = 1; i < out.points.size(); ++i) {
        const double dd = dist2(v, out.points[i]);
        if (dd < best_d) { best_d = dd; best = i; }
      }
      out.labels.push_back(static_cast<int>(best));
    }
  }
  out.gt_rooms = std::move(gt);
  return out;
}

// One deterministic RNG stream per (sample, attempt) pair, so generation can
// be parallelized without changing output.
inline LayoutSample generate_sample(const GenConfig& cfg, std::uint64_t index, Ordering ordering,
                                    Scene* scene_out = nullptr, RenderedScene* rendered_out = nullptr) {
  for (std::uint64_t attempt = 0; attempt < 32; ++attempt) {
    Rng rng = Rng::child(cfg.seed, (index << 8) | attempt);
    Scene scene = build_scene(cfg, rng);
    RenderedScene rendered = render_scene(scene, cfg, rng);
    auto sample = make_ptrnet_sample(scene, rendered, cfg, ordering, rng);
    if (sample) {
      if (scene_out) *scene_out = std::move(scene);
      if (rendered_out) *rendered_out = std::move(rendered);
      return std::move(*sample);
    }
  }
  throw std::runtime_error("failed to generate a usable sample after 32 attempts");
}

}  // namespace roomcloud
