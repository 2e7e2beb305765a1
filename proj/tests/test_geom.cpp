#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "roomcloud/geom.hpp"
#include "roomcloud/rng.hpp"

using namespace roomcloud;

namespace {

Polygon square(double x0, double y0, double side) {
  return Polygon{{{x0, y0}, {x0 + side, y0}, {x0 + side, y0 + side}, {x0, y0 + side}}};
}

// Convex by construction: vertices on a common circle, in angular order.
Polygon random_convex(Rng& rng, double cx, double cy, double r_max, int n) {
  const double r = rng.uniform(0.4 * r_max, r_max);
  std::vector<double> angles;
  for (int i = 0; i < n; ++i) angles.push_back(rng.uniform(0, 2 * std::numbers::pi));
  std::sort(angles.begin(), angles.end());
  Polygon p;
  for (double a : angles) p.vertices.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
  return p;
}

// Axis-aligned rectangle with a rectangular notch cut from one corner.
Polygon random_rectilinear(Rng& rng, double canvas) {
  const double w = rng.uniform(0.3, 0.8) * canvas;
  const double h = rng.uniform(0.3, 0.8) * canvas;
  const double x0 = rng.uniform(0.05 * canvas, canvas - w - 0.05 * canvas);
  const double y0 = rng.uniform(0.05 * canvas, canvas - h - 0.05 * canvas);
  const double nw = rng.uniform(0.2, 0.6) * w;
  const double nh = rng.uniform(0.2, 0.6) * h;
  return Polygon{{{x0, y0}, {x0 + w, y0}, {x0 + w, y0 + h - nh}, {x0 + w - nw, y0 + h - nh},
                  {x0 + w - nw, y0 + h}, {x0, y0 + h}}};
}

}  // namespace

TEST_CASE("polygon_area basics") {
  CHECK(polygon_area(square(0, 0, 1)) == Catch::Approx(1.0));
  Polygon rev = square(0, 0, 1);
  std::reverse(rev.vertices.begin(), rev.vertices.end());
  CHECK(polygon_area(rev) == Catch::Approx(-1.0));
  CHECK(polygon_area(Polygon{{{0, 0}, {1, 1}, {2, 2}}}) == Catch::Approx(0.0));
  CHECK_THROWS_AS(polygon_area(Polygon{{{0, 0}, {1, 1}}}), std::invalid_argument);
}

TEST_CASE("ensure_ccw") {
  Polygon cw = square(0, 0, 2);
  std::reverse(cw.vertices.begin(), cw.vertices.end());
  const Polygon fixed = ensure_ccw(cw);
  CHECK(polygon_area(fixed) > 0.0);
  CHECK(ensure_ccw(fixed).vertices == fixed.vertices);  // idempotent, identity on CCW

  // L-shape: magnitude preserved, sign flipped
  Polygon l{{{0, 0}, {0, 2}, {1, 2}, {1, 1}, {2, 1}, {2, 0}}};
  REQUIRE(polygon_area(l) < 0.0);
  CHECK(polygon_area(ensure_ccw(l)) == Catch::Approx(-polygon_area(l)));

  CHECK_THROWS_AS(ensure_ccw(Polygon{{{0, 0}, {1, 1}, {2, 2}}}), std::invalid_argument);
}

TEST_CASE("polygon_iou examples") {
  CHECK(polygon_iou(square(0, 0, 1), square(0, 0, 1)) == Catch::Approx(1.0));
  CHECK(polygon_iou(square(0, 0, 1), square(5, 5, 1)) == Catch::Approx(0.0));
  CHECK(polygon_iou(square(0, 0, 1), square(0.5, 0, 1)) == Catch::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(polygon_iou(Polygon{{{0, 0}, {1, 1}, {2, 2}}}, square(0, 0, 1)), std::invalid_argument);
}

TEST_CASE("polygon_iou symmetry and bounds") {
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    const Polygon a = random_convex(rng, rng.uniform(-1, 1), rng.uniform(-1, 1), 2.0, rng.uniform_int(3, 9));
    const Polygon b = random_convex(rng, rng.uniform(-1, 1), rng.uniform(-1, 1), 2.0, rng.uniform_int(3, 9));
    const double ab = polygon_iou(a, b);
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
    CHECK(ab == Catch::Approx(polygon_iou(b, a)));
    CHECK(polygon_iou(a, a) == Catch::Approx(1.0));
  }
}

TEST_CASE("mask_iou") {
  Mask a(2, 1), b(2, 1);
  a.set(0, 0); a.set(1, 0);
  b.set(0, 0);
  CHECK(mask_iou(a, a) == 1.0);
  CHECK(mask_iou(a, b) == 0.5);
  Mask c(2, 1);
  c.set(1, 0);
  CHECK(mask_iou(b, c) == 0.0);             // complementary
  CHECK(mask_iou(Mask(3, 3), Mask(3, 3)) == 1.0);  // empty vs empty
  CHECK_THROWS_AS(mask_iou(Mask(2, 2), Mask(3, 3)), std::invalid_argument);
}

TEST_CASE("rasterize outline pixel count") {
  // enumeration oracle for an axis-aligned 10x10 square at integer coords
  std::set<std::pair<int, int>> expected;
  for (int x = 0; x <= 10; ++x)
    for (int y = 0; y <= 10; ++y)
      if (x == 0 || x == 10 || y == 0 || y == 10) expected.insert({x, y});
  REQUIRE(expected.size() == 40);

  const Mask m = rasterize_polygon(square(0, 0, 10), 128, 128, RasterMode::kOutline);
  std::set<std::pair<int, int>> got;
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 128; ++x)
      if (m.at(x, y)) got.insert({x, y});
  CHECK(got == expected);
}

TEST_CASE("rasterize filled") {
  const Mask m = rasterize_polygon(square(0, 0, 3), 16, 16, RasterMode::kFilled);
  CHECK(m.count() == 9);
  CHECK(rasterize_polygon(Polygon{}, 8, 8, RasterMode::kFilled).count() == 0);
  CHECK_THROWS_AS(rasterize_polygon(square(0, 0, 300), 128, 128, RasterMode::kOutline), std::invalid_argument);
}

TEST_CASE("contour extraction") {
  Mask m(16, 16);
  for (int y = 4; y < 7; ++y)
    for (int x = 4; x < 7; ++x) m.set(x, y);
  auto polys = contour_extract(m);
  REQUIRE(polys.size() == 1);
  CHECK(polys[0].vertices.size() == 8);  // boundary of a 3x3 block
  for (const auto& v : polys[0].vertices) CHECK(m.at(static_cast<int>(v.x), static_cast<int>(v.y)));

  Mask two(16, 16);
  for (int y = 1; y < 4; ++y)
    for (int x = 1; x < 4; ++x) { two.set(x, y); two.set(x + 8, y + 8); }
  CHECK(contour_extract(two).size() == 2);

  CHECK(contour_extract(Mask(8, 8)).empty());
}

TEST_CASE("rasterize -> contour round trip") {
  Rng rng(11);
  for (int i = 0; i < 25; ++i) {
    const Polygon p = random_rectilinear(rng, 128);
    const Mask filled = rasterize_polygon(p, 128, 128, RasterMode::kFilled);
    const auto contours = contour_extract(filled);
    REQUIRE(!contours.empty());
    // refill the traced boundary through pixel centers
    Polygon shifted;
    for (const auto& v : contours[0].vertices) shifted.vertices.push_back({v.x + 0.5, v.y + 0.5});
    Mask refilled = rasterize_polygon(shifted, 128, 128, RasterMode::kFilled);
    for (const auto& v : contours[0].vertices)
      refilled.set(static_cast<int>(v.x), static_cast<int>(v.y));  // boundary pixels included
    CHECK(mask_iou(filled, refilled) >= 0.95);
  }
}

TEST_CASE("polygon_iou agrees with rasterized mask iou") {
  Rng rng(13);
  for (int i = 0; i < 25; ++i) {
    const Polygon a = random_convex(rng, 250, 250, 200, rng.uniform_int(3, 10));
    const Polygon b = random_convex(rng, rng.uniform(200, 300), rng.uniform(200, 300), 200, rng.uniform_int(3, 10));
    const double exact = polygon_iou(a, b);
    const double approx = mask_iou(rasterize_polygon(a, 512, 512, RasterMode::kFilled),
                                   rasterize_polygon(b, 512, 512, RasterMode::kFilled));
    CHECK(std::abs(exact - approx) < 0.02);
  }
}

TEST_CASE("sample_mesh containment and ratios") {
  TriMesh single;
  single.vertices = {{0, 0, 0}, {4, 0, 0}, {0, 3, 0}};
  single.triangles = {{0, 1, 2}};
  const auto pts = sample_mesh(single, 100, 42);
  REQUIRE(pts.size() == 100);
  for (const auto& p : pts) {
    // barycentric containment in the z=0 triangle
    const double u = p.x / 4.0, v = p.y / 3.0;
    CHECK(u >= -1e-12);
    CHECK(v >= -1e-12);
    CHECK(u + v <= 1.0 + 1e-12);
    CHECK(p.z == 0.0);
  }

  TriMesh two;
  two.vertices = {{0, 0, 0}, {6, 0, 0}, {0, 1, 0}, {10, 0, 0}, {12, 0, 0}, {10, 1, 0}};
  two.triangles = {{0, 1, 2}, {3, 4, 5}};  // areas 3 and 1
  const auto sample = sample_mesh(two, 10000, 7);
  std::size_t in_large = 0;
  for (const auto& p : sample)
    if (p.x < 8.0) ++in_large;
  const double frac = static_cast<double>(in_large) / sample.size();
  CHECK(frac == Catch::Approx(0.75).margin(0.02));

  // chi-square against area proportions, 1 dof: p > 0.01 <=> chi2 < 6.635
  const double exp_large = 7500.0, exp_small = 2500.0;
  const double chi2 = std::pow(in_large - exp_large, 2) / exp_large +
                      std::pow((sample.size() - in_large) - exp_small, 2) / exp_small;
  CHECK(chi2 < 6.635);

  CHECK(sample_mesh(single, 0, 1).empty());
  TriMesh flat;
  flat.vertices = {{0, 0, 0}, {1, 1, 1}, {2, 2, 2}};
  flat.triangles = {{0, 1, 2}};
  CHECK_THROWS_AS(sample_mesh(flat, 10, 1), std::invalid_argument);
  CHECK(sample_mesh(single, 50, 9).front().x == sample_mesh(single, 50, 9).front().x);  // deterministic
}

TEST_CASE("resample_boundary") {
  const Polygon sq = square(0, 0, 4);
  const Polygon up = resample_boundary(sq, 10);
  REQUIRE(up.vertices.size() == 10);
  for (const auto& corner : sq.vertices) {
    bool found = false;
    for (const auto& v : up.vertices)
      if (dist2(v, corner) < 1e-18) found = true;
    CHECK(found);
  }
  CHECK(polygon_iou(sq, up) >= 0.99);

  Rng rng5(5);
  Polygon decagon = random_convex(rng5, 0, 0, 3, 10);
  REQUIRE(decagon.vertices.size() == 10);
  CHECK(resample_boundary(decagon, 10).vertices == decagon.vertices);

  const Polygon tri{{{0, 0}, {2, 0}, {1, 2}}};
  CHECK(resample_boundary(tri, 3).vertices == tri.vertices);
  CHECK_THROWS_AS(resample_boundary(sq, 2), std::invalid_argument);

  // downsampling a regular 24-gon to 10 points keeps the region close
  Polygon dense;
  for (int i = 0; i < 24; ++i) {
    const double a = 2 * std::numbers::pi * i / 24;
    dense.vertices.push_back({5 * std::cos(a), 5 * std::sin(a)});
  }
  const Polygon down = resample_boundary(dense, 10);
  CHECK(down.vertices.size() == 10);
  CHECK(polygon_iou(dense, down) > 0.9);
}

TEST_CASE("splice_arcs half circle") {
  const Polygon sq = square(0, 0, 4);
  // bulge the bottom edge (0,0)-(4,0) downward
  const ArcSpec arc{{2, 0}, 2.0, std::numbers::pi, 2 * std::numbers::pi};
  const Polygon spliced = splice_arcs(sq, {arc});
  CHECK(spliced.vertices.size() == 4 + kArcSegments - 1);
  const double expected = 16.0 + 0.5 * std::numbers::pi * 4.0;
  CHECK(std::abs(std::abs(polygon_area(spliced)) - expected) / expected < 0.02);
}
