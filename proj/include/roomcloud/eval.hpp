#pragma once

#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "roomcloud/geom.hpp"

namespace roomcloud {

// IoU that survives degenerate or self-intersecting predictions: exact
// polygon clipping when both inputs are well-formed, otherwise a 512x512
// rasterized fallback (agrees with the exact value within ~0.02).
inline double robust_iou(const Polygon& a, const Polygon& b) {
  try {
    return polygon_iou(a, b);
  } catch (const std::exception&) {
  }
  const auto bounds = [](const Polygon& p, double& min_x, double& min_y, double& max_x, double& max_y) {
    for (const auto& v : p.vertices) {
      min_x = std::min(min_x, v.x); max_x = std::max(max_x, v.x);
      min_y = std::min(min_y, v.y); max_y = std::max(max_y, v.y);
    }
  };
  if (a.vertices.size() < 3 || b.vertices.size() < 3) return 0.0;
  double min_x = a.vertices[0].x, max_x = min_x, min_y = a.vertices[0].y, max_y = min_y;
  bounds(a, min_x, min_y, max_x, max_y);
  bounds(b, min_x, min_y, max_x, max_y);
  const int res = 512;
  const double extent = std::max({max_x - min_x, max_y - min_y, 1e-12});
  const double s = (res - 2.0) / extent;
  const auto to_px = [&](const Polygon& p) {
    Polygon out;
    for (const auto& v : p.vertices) out.vertices.push_back({(v.x - min_x) * s + 1.0, (v.y - min_y) * s + 1.0});
    return out;
  };
  return mask_iou(rasterize_polygon(to_px(a), res, res, RasterMode::kFilled),
                  rasterize_polygon(to_px(b), res, res, RasterMode::kFilled));
}

struct RoomMatch {
  int gt_room = -1;
  std::optional<int> pred_room;
  double iou = 0.0;
};

struct SampleEval {
  std::vector<RoomMatch> matches;       // one entry per ground-truth room
  int n_predictions = 0;
  std::vector<std::string> shape_tags;  // per gt room
};

// Greedy matching: repeatedly pair the globally highest-IoU (pred, gt) among
// the unpaired, stopping at IoU = 0.
inline SampleEval match_rooms(const std::vector<Polygon>& preds, const std::vector<Polygon>& gts) {
  SampleEval ev;
  ev.n_predictions = static_cast<int>(preds.size());
  std::vector<std::vector<double>> iou(preds.size(), std::vector<double>(gts.size(), 0.0));
  for (std::size_t p = 0; p < preds.size(); ++p)
    for (std::size_t g = 0; g < gts.size(); ++g) iou[p][g] = robust_iou(preds[p], gts[g]);

  std::vector<bool> pred_used(preds.size(), false), gt_used(gts.size(), false);
  std::vector<RoomMatch> matches(gts.size());
  for (std::size_t g = 0; g < gts.size(); ++g) matches[g].gt_room = static_cast<int>(g);
  for (;;) {
    double best = 0.0;
    int bp = -1, bg = -1;
    for (std::size_t p = 0; p < preds.size(); ++p) {
      if (pred_used[p]) continue;
      for (std::size_t g = 0; g < gts.size(); ++g) {
        if (gt_used[g]) continue;
        if (iou[p][g] > best) { best = iou[p][g]; bp = static_cast<int>(p); bg = static_cast<int>(g); }
      }
    }
    if (bp < 0) break;
    pred_used[bp] = true;
    gt_used[bg] = true;
    matches[bg].pred_room = bp;
    matches[bg].iou = best;
  }
  ev.matches = std::move(matches);
  return ev;
}

struct EvalResult {
  std::vector<SampleEval> samples;
  double mean_iou = 0.0;
  std::map<std::string, std::pair<double, int>> per_shape;  // tag -> (mean iou, count)
  int total_predictions = 0;
  int unmatched_predictions = 0;
  int unmatched_gts = 0;
};

// Sum of matched-pair IoUs divided by the total number of predicted rooms;
// spurious predictions add to the denominator only.
inline double mean_iou(const std::vector<SampleEval>& samples) {
  double sum = 0.0;
  long n_pred = 0;
  for (const auto& s : samples) {
    n_pred += s.n_predictions;
    for (const auto& m : s.matches) sum += m.iou;
  }
  if (n_pred == 0) throw std::invalid_argument("mean IoU undefined: no predicted rooms");
  return sum / static_cast<double>(n_pred);
}

inline EvalResult evaluate(std::vector<SampleEval> samples) {
  EvalResult r;
  r.mean_iou = mean_iou(samples);
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& s : samples) {
    r.total_predictions += s.n_predictions;
    int matched = 0;
    for (std::size_t g = 0; g < s.matches.size(); ++g) {
      const auto& m = s.matches[g];
      if (m.pred_room) {
        ++matched;
        if (g < s.shape_tags.size()) {
          auto& [sum, count] = acc[s.shape_tags[g]];
          sum += m.iou;
          ++count;
        }
      } else {
        ++r.unmatched_gts;
      }
    }
    r.unmatched_predictions += s.n_predictions - matched;
  }
  for (auto& [tag, sc] : acc)
    if (sc.second > 0) r.per_shape[tag] = {sc.first / sc.second, sc.second};
  r.samples = std::move(samples);
  return r;
}

// Mean over matched ground-truth rooms of each shape tag.
inline std::map<std::string, double> shape_breakdown(const EvalResult& r) {
  std::map<std::string, double> out;
  for (const auto& [tag, sc] : r.per_shape) out[tag] = sc.first;
  return out;
}

struct RunRow {
  std::string ordering;
  int input_length = 0;
  double mean_iou = 0.0;
};

inline nlohmann::json report_json(const EvalResult& r, const std::vector<RunRow>& runs = {}) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["mean_iou"] = r.mean_iou;
  j["total_predictions"] = r.total_predictions;
  j["unmatched_predictions"] = r.unmatched_predictions;
  j["unmatched_gts"] = r.unmatched_gts;
  auto& shapes = j["per_shape"] = nlohmann::json::object();
  for (const auto& [tag, sc] : r.per_shape) shapes[tag] = {{"mean_iou", sc.first}, {"count", sc.second}};
  if (!runs.empty()) {
    auto& jr = j["runs"] = nlohmann::json::array();
    for (const auto& row : runs)
      jr.push_back({{"ordering", row.ordering}, {"input_length", row.input_length}, {"mean_iou", row.mean_iou}});
  }
  return j;
}

inline std::string report_text(const EvalResult& r, const std::vector<RunRow>& runs = {}) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(4);
  ss << "mean IoU: " << r.mean_iou << "\n";
  ss << "predicted rooms: " << r.total_predictions
     << "  unmatched predictions: " << r.unmatched_predictions
     << "  unmatched ground truths: " << r.unmatched_gts << "\n";
  if (!r.per_shape.empty()) {
    ss << "\nshape          mean_iou  count\n";
    for (const auto& [tag, sc] : r.per_shape)
      ss << std::left << std::setw(15) << tag << std::right << std::setw(8) << sc.first
         << std::setw(7) << sc.second << "\n";
  }
  if (!runs.empty()) {
    ss << "\nordering,input_length,mean_iou\n";
    for (const auto& row : runs)
      ss << row.ordering << "," << row.input_length << "," << row.mean_iou << "\n";
  }
  return ss.str();
}

}  // namespace roomcloud
