#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "roomcloud/geom.hpp"
#include "roomcloud/rng.hpp"

namespace roomcloud {

struct WallGrid {
  int d = 0;
  std::vector<std::uint64_t> counts;  // row-major d*d
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;  // square extent, meters
  std::uint64_t& at(int row, int col) { return counts[static_cast<size_t>(row) * d + col]; }
  std::uint64_t at(int row, int col) const { return counts[static_cast<size_t>(row) * d + col]; }
};

struct WallImage {
  int d = 0;
  Mask bits;
  std::uint64_t threshold = 0;
};

struct PointSet2 {
  std::vector<Point2> points;
};

// Top-down 2D histogram over a square extent covering the cloud's xy bounding
// box; points on the max edge land in the last bin.
inline WallGrid project_histogram(const std::vector<Point3>& cloud, int d) {
  if (cloud.empty()) throw std::invalid_argument("empty point cloud");
  if (d < 2) throw std::invalid_argument("need at least 2 bins per side");
  double min_x = cloud[0].x, max_x = min_x, min_y = cloud[0].y, max_y = min_y;
  for (const auto& p : cloud) {
    min_x = std::min(min_x, p.x); max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y); max_y = std::max(max_y, p.y);
  }
  // Expand the shorter side so bins are square.
  const double side = std::max({max_x - min_x, max_y - min_y, 1e-12});
  const double cx = 0.5 * (min_x + max_x), cy = 0.5 * (min_y + max_y);
  WallGrid g;
  g.d = d;
  g.min_x = cx - side / 2; g.max_x = cx + side / 2;
  g.min_y = cy - side / 2; g.max_y = cy + side / 2;
  g.counts.assign(static_cast<size_t>(d) * d, 0);
  for (const auto& p : cloud) {
    const int col = std::min(d - 1, static_cast<int>((p.x - g.min_x) / side * d));
    const int row = std::min(d - 1, static_cast<int>((p.y - g.min_y) / side * d));
    ++g.at(std::max(row, 0), std::max(col, 0));
  }
  return g;
}

inline std::uint64_t wall_threshold(std::uint64_t n_max, double ratio = 0.25) {
  return static_cast<std::uint64_t>(std::ceil(static_cast<double>(n_max) * ratio));
}

// A bin is a wall bin iff its count reaches ceil(n_max * ratio).
inline WallImage extract_walls(const WallGrid& g, double ratio = 0.25) {
  const std::uint64_t n_max = *std::max_element(g.counts.begin(), g.counts.end());
  if (n_max == 0) throw std::invalid_argument("all-zero histogram: no walls detected");
  WallImage img;
  img.d = g.d;
  img.threshold = wall_threshold(n_max, ratio);
  img.bits = Mask(g.d, g.d);
  for (int r = 0; r < g.d; ++r)
    for (int c = 0; c < g.d; ++c)
      if (g.at(r, c) >= img.threshold) img.bits.set(c, r);
  return img;
}

// Wall pixel (row, col) -> point (col, d-1-row), so images render with y up.
inline Point2 pixel_to_point(int row, int col, int d) {
  return {static_cast<double>(col), static_cast<double>(d - 1 - row)};
}

inline PointSet2 pixels_to_points(const WallImage& img) {
  PointSet2 s;
  for (int r = 0; r < img.d; ++r)
    for (int c = 0; c < img.d; ++c)
      if (img.bits.at(c, r)) s.points.push_back(pixel_to_point(r, c, img.d));
  if (s.points.empty()) throw std::invalid_argument("wall image has no set pixels");
  return s;
}

// Aspect-preserving map of a bounding box into [-1,1]^2.
struct Normalizer {
  double cx = 0, cy = 0, scale = 1;
  Point2 apply(const Point2& p) const { return {(p.x - cx) * scale, (p.y - cy) * scale}; }
};

inline Normalizer fit_normalizer(const std::vector<Point2>& pts) {
  if (pts.size() < 2) throw std::invalid_argument("need at least 2 points to normalize");
  double min_x = pts[0].x, max_x = min_x, min_y = pts[0].y, max_y = min_y;
  for (const auto& p : pts) {
    min_x = std::min(min_x, p.x); max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y); max_y = std::max(max_y, p.y);
  }
  const double extent = std::max(max_x - min_x, max_y - min_y);
  if (extent <= 0.0) throw std::invalid_argument("all points coincident");
  return {0.5 * (min_x + max_x), 0.5 * (min_y + max_y), 2.0 / extent};
}

inline PointSet2 normalize_points(const PointSet2& s) {
  const Normalizer n = fit_normalizer(s.points);
  PointSet2 out;
  out.points.reserve(s.points.size());
  for (const auto& p : s.points) out.points.push_back(n.apply(p));
  return out;
}

// Uniform sample without replacement of min(p_n, |s|) points (partial
// Fisher-Yates); also returns the chosen source indices.
inline std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t p_n, Rng& rng) {
  if (p_n == 0) throw std::invalid_argument("cannot sample zero points");
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  const std::size_t k = std::min(p_n, n);
  for (std::size_t i = 0; i < k; ++i)
    std::swap(idx[i], idx[i + rng.below(n - i)]);
  idx.resize(k);
  return idx;
}

inline PointSet2 subsample_points(const PointSet2& s, std::size_t p_n, std::uint64_t seed) {
  if (s.points.empty()) throw std::invalid_argument("empty point set");
  Rng rng(seed);
  PointSet2 out;
  for (std::size_t i : subsample_indices(s.points.size(), p_n, rng)) out.points.push_back(s.points[i]);
  return out;
}

}  // namespace roomcloud
