#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "roomcloud/synthgen.hpp"

using namespace roomcloud;

namespace {

bool near(const Point2& a, const Point2& b, double eps = 1e-9) { return dist2(a, b) < eps * eps; }

// Literal transcription of the nearest-neighbor ordering loop, kept separate
// from pseudo_sort_order as its reference.
std::vector<Point2> reference_chain(std::vector<Point2> s) {
  std::vector<Point2> l;
  l.push_back(s.front());
  s.erase(s.begin());
  while (!s.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < s.size(); ++i)
      if (dist2(l.back(), s[i]) < dist2(l.back(), s[best])) best = i;
    l.push_back(s[best]);
    s.erase(s.begin() + best);
  }
  return l;
}

}  // namespace

TEST_CASE("gen_rectangle") {
  const Polygon r1 = gen_rectangle({0, 0}, {1, 0}, 4, 2);
  CHECK(near(r1.vertices[0], {0, 0}));
  CHECK(near(r1.vertices[1], {4, 0}));
  CHECK(near(r1.vertices[2], {4, 2}));
  CHECK(near(r1.vertices[3], {0, 2}));

  const Polygon r2 = gen_rectangle({0, 0}, {0, 1}, 2, 1);
  CHECK(near(r2.vertices[1], {0, 2}));
  CHECK(near(r2.vertices[2], {-1, 2}));
  CHECK(near(r2.vertices[3], {-1, 0}));

  Rng rng(21);
  for (int i = 0; i < 20; ++i) {
    const double th = rng.uniform(0, 6.28);
    const double l = rng.uniform(0.5, 9), w = rng.uniform(0.5, 9);
    CHECK(polygon_area(gen_rectangle({rng.uniform(-5, 5), rng.uniform(-5, 5)},
                                     {std::cos(th), std::sin(th)}, l, w)) == Catch::Approx(l * w));
  }
  CHECK_THROWS_AS(gen_rectangle({0, 0}, {1, 1}, 2, 2), std::invalid_argument);
}

TEST_CASE("morph_rectilinear") {
  const Polygon rect{{{0, 0}, {4, 0}, {4, 2}, {0, 2}}};
  const Polygon l = morph_rectilinear(rect, 0);
  REQUIRE(l.vertices.size() == 6);
  const std::vector<Point2> expected{{2, 0}, {4, 0}, {4, 2}, {0, 2}, {0, 1}, {2, 1}};
  for (int i = 0; i < 6; ++i) CHECK(near(l.vertices[i], expected[i]));
  CHECK(polygon_area(l) == Catch::Approx(6.0));  // 3/4 of 8
  CHECK(polygon_area(l) == Catch::Approx(0.75 * polygon_area(rect)).margin(1e-9));
}

TEST_CASE("morph_nonright") {
  Polygon sq{{{0, 0}, {4, 0}, {4, 4}, {0, 4}}};
  const Polygon p = morph_nonright(sq, 0, 0.5, 0.5);
  REQUIRE(p.vertices.size() == 5);
  bool has_a = false, has_b = false;
  for (const auto& v : p.vertices) {
    if (near(v, {0, 2})) has_a = true;
    if (near(v, {2, 0})) has_b = true;
  }
  CHECK(has_a);
  CHECK(has_b);

  Rng rng(33);
  for (int i = 0; i < 20; ++i) {
    const double l = rng.uniform(2, 8), w = rng.uniform(2, 8);
    const double f1 = rng.uniform(0.25, 0.75), f2 = rng.uniform(0.25, 0.75);
    const Polygon rect = gen_rectangle({0, 0}, {1, 0}, l, w);
    const int corner = rng.uniform_int(0, 3);
    const double area = polygon_area(morph_nonright(rect, corner, f1, f2));
    CHECK(area == Catch::Approx(l * w - f1 * f2 * l * w / 2.0).margin(1e-9));
  }
}

TEST_CASE("morph_halfcircle") {
  const Polygon rect{{{0, 0}, {4, 0}, {4, 4}, {0, 4}}};
  const auto [poly, arc] = morph_halfcircle(rect, 0);
  CHECK(arc.radius == Catch::Approx(2.0));
  CHECK(near(arc.center, {2, 0}));
  const auto pts = sample_arc(arc, kArcSegments);
  CHECK(near(pts.front(), {0, 0}));
  CHECK(near(pts.back(), {4, 0}));

  const Polygon spliced = splice_arcs(poly, {arc});
  const double expected = 16.0 + std::numbers::pi * 4.0 / 2.0;
  // area oracle, allowing inscribed-polygon discretization error
  CHECK(polygon_area(spliced) == Catch::Approx(expected).epsilon(0.01));
  CHECK(polygon_area(spliced) < expected);
}

TEST_CASE("morph_quartercircle") {
  const Polygon rect{{{0, 0}, {4, 0}, {4, 2}, {0, 2}}};
  const auto [poly, arc] = morph_quartercircle(rect, 0);
  CHECK(arc.radius == Catch::Approx(1.0));
  const auto pts = sample_arc(arc, kArcSegments);
  // tangent points on both original edges, r from the corner
  CHECK(near(pts.front(), {0, 1}));
  CHECK(near(pts.back(), {1, 0}));

  const Polygon spliced = splice_arcs(poly, {arc});
  const double expected = 8.0 - (1.0 - std::numbers::pi / 4.0);
  CHECK(polygon_area(spliced) == Catch::Approx(expected).epsilon(0.01));
}

TEST_CASE("place_rooms invariants") {
  GenConfig cfg;
  cfg.seed = 77;
  for (int trial = 0; trial < 40; ++trial) {
    Rng rng = Rng::child(cfg.seed, trial);
    const auto rects = place_rooms(cfg, rng);
    REQUIRE(!rects.empty());
    REQUIRE(rects.size() <= 5);
    for (std::size_t i = 0; i < rects.size(); ++i)
      for (std::size_t j = i + 1; j < rects.size(); ++j)
        CHECK(polygon_iou(rect_polygon(rects[i]), rect_polygon(rects[j])) == Catch::Approx(0.0).margin(1e-9));
  }

  GenConfig one;
  one.max_rooms = 1;
  Rng rng(1);
  CHECK(place_rooms(one, rng).size() == 1);
}

TEST_CASE("build_scene determinism and disjointness") {
  GenConfig cfg;
  cfg.seed = 5;
  Rng a = Rng::child(cfg.seed, 3), b = Rng::child(cfg.seed, 3);
  const Scene sa = build_scene(cfg, a), sb = build_scene(cfg, b);
  REQUIRE(sa.rooms.size() == sb.rooms.size());
  for (std::size_t i = 0; i < sa.rooms.size(); ++i) {
    CHECK(sa.rooms[i].tag == sb.rooms[i].tag);
    CHECK(sa.rooms[i].poly.vertices == sb.rooms[i].poly.vertices);
  }
  for (std::size_t i = 0; i < sa.rooms.size(); ++i)
    for (std::size_t j = i + 1; j < sa.rooms.size(); ++j)
      CHECK(polygon_iou(sa.rooms[i].poly, sa.rooms[j].poly) == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("shape weights respected") {
  GenConfig cfg;
  cfg.seed = 19;
  cfg.shape_weights = {1, 0, 0, 0};
  Rng rng = Rng::child(cfg.seed, 0);
  const Scene s = build_scene(cfg, rng);
  for (const auto& r : s.rooms) CHECK(r.tag == ShapeTag::kRectangular);
}

TEST_CASE("render_scene noise off equals outline union") {
  GenConfig cfg;
  cfg.seed = 23;
  cfg.jitter_prob = 0.0;
  cfg.dropout_prob = 0.0;
  Rng rng = Rng::child(cfg.seed, 1);
  const Scene scene = build_scene(cfg, rng);
  const RenderedScene rendered = render_scene(scene, cfg, rng);

  Mask expected(cfg.canvas, cfg.canvas);
  for (const auto& room : scene.rooms) {
    const Mask o = rasterize_polygon(transform_polygon(room.poly, rendered.transform),
                                     cfg.canvas, cfg.canvas, RasterMode::kOutline);
    for (int y = 0; y < cfg.canvas; ++y)
      for (int x = 0; x < cfg.canvas; ++x)
        if (o.at(x, y)) expected.set(x, y);
  }
  CHECK(rendered.wall_image == expected);

  for (std::size_t i = 0; i < rendered.room_masks.size(); ++i)
    for (std::size_t j = i + 1; j < rendered.room_masks.size(); ++j)
      CHECK(mask_iou(rendered.room_masks[i], rendered.room_masks[j]) == 0.0);
}

TEST_CASE("render_scene dropout one clears everything") {
  GenConfig cfg;
  cfg.seed = 4;
  cfg.dropout_prob = 1.0;
  Rng rng = Rng::child(cfg.seed, 1);
  const Scene scene = build_scene(cfg, rng);
  CHECK(render_scene(scene, cfg, rng).wall_image.count() == 0);
}

TEST_CASE("pseudo_sort") {
  const std::vector<Point2> pts{{0, 0}, {5, 5}, {1, 0}, {6, 5}};
  const auto sorted = pseudo_sort(pts);
  const std::vector<Point2> expected{{0, 0}, {1, 0}, {5, 5}, {6, 5}};
  CHECK(sorted == expected);

  CHECK(pseudo_sort({{3, 3}}) == std::vector<Point2>{{3, 3}});
  CHECK_THROWS_AS(pseudo_sort({}), std::invalid_argument);

  Rng rng(41);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<Point2> s;
    const int n = rng.uniform_int(1, 12);
    for (int i = 0; i < n; ++i) s.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    const auto got = pseudo_sort(s);
    CHECK(got == reference_chain(s));
    auto perm = got;
    auto orig = s;
    auto key = [](const Point2& p) { return std::pair{p.x, p.y}; };
    std::sort(perm.begin(), perm.end(), [&](auto& a, auto& b) { return key(a) < key(b); });
    std::sort(orig.begin(), orig.end(), [&](auto& a, auto& b) { return key(a) < key(b); });
    CHECK(perm == orig);  // permutation
  }
}

TEST_CASE("true_sort_order") {
  // single square room: angles about the centroid must advance monotonically
  std::vector<Point2> pts;
  std::vector<int> owners;
  Rng rng(8);
  for (int i = 0; i < 40; ++i) {
    const double a = rng.uniform(0, 2 * std::numbers::pi);
    pts.push_back({std::cos(a), std::sin(a)});
    owners.push_back(0);
  }
  const auto order = true_sort_order(pts, owners, {{0, 0}});
  REQUIRE(order.size() == pts.size());
  double prev = -1.0;
  const double base = std::atan2(pts[order[0]].y, pts[order[0]].x);
  for (std::size_t k = 0; k < order.size(); ++k) {
    double rel = std::fmod(std::atan2(pts[order[k]].y, pts[order[k]].x) - base + 4 * std::numbers::pi,
                           2 * std::numbers::pi);
    CHECK(rel >= prev - 1e-12);
    prev = rel;
  }

  // two rooms: all of room 0 precedes room 1
  std::vector<Point2> two{{0, 0}, {10, 0}, {1, 0}, {11, 0}};
  std::vector<int> own{1, 0, 1, 0};
  const auto o2 = true_sort_order(two, own, {{10.5, 0}, {0.5, 0}});
  CHECK(own[o2[0]] == 0);
  CHECK(own[o2[1]] == 0);
  CHECK(own[o2[2]] == 1);
  CHECK(own[o2[3]] == 1);

  CHECK_THROWS_AS(true_sort_order(two, {0, 0, 0}, {{0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(true_sort_order(two, {0, 0, 0, 7}, {{0, 0}}), std::invalid_argument);
}

TEST_CASE("generate_sample label contracts") {
  GenConfig cfg;
  cfg.seed = 101;
  cfg.p_n = 200;
  for (const Ordering ord : {Ordering::kRandom, Ordering::kTrueSort, Ordering::kPseudoSort}) {
    for (int i = 0; i < 15; ++i) {
      const LayoutSample s = generate_sample(cfg, i, ord);
      CHECK(static_cast<int>(s.labels.size()) == s.b * s.k_rooms);
      for (int l : s.labels) {
        CHECK(l >= 0);
        CHECK(l < static_cast<int>(s.points.size()));
      }
      CHECK(static_cast<int>(s.points.size()) <= cfg.p_n);
      for (const auto& p : s.points) {
        CHECK(std::abs(p.x) <= 1.0 + 1e-9);
        CHECK(std::abs(p.y) <= 1.0 + 1e-9);
      }
      CHECK(s.gt_rooms.size() == static_cast<std::size_t>(s.k_rooms));
      CHECK(s.shape_tags.size() == static_cast<std::size_t>(s.k_rooms));
    }
  }
}

TEST_CASE("generate_sample deterministic") {
  GenConfig cfg;
  cfg.seed = 55;
  const LayoutSample a = generate_sample(cfg, 7, Ordering::kPseudoSort);
  const LayoutSample b = generate_sample(cfg, 7, Ordering::kPseudoSort);
  CHECK(a.points == b.points);
  CHECK(a.labels == b.labels);
  CHECK(a.shape_tags == b.shape_tags);
}
