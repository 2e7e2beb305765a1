#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "roomcloud/io.hpp"
#include "roomcloud/synthgen.hpp"

namespace roomcloud {

inline constexpr int kDatasetFormatVersion = 1;

inline nlohmann::json to_json(const GenConfig& cfg) {
  return {{"max_rooms", cfg.max_rooms}, {"edge_min", cfg.edge_min}, {"edge_max", cfg.edge_max},
          {"canvas", cfg.canvas},       {"border_points", cfg.border_points}, {"p_n", cfg.p_n},
          {"shrink", cfg.shrink},       {"jitter_prob", cfg.jitter_prob},
          {"dropout_prob", cfg.dropout_prob},
          {"shape_weights", cfg.shape_weights}, {"seed", cfg.seed}};
}

inline GenConfig gen_config_from_json(const nlohmann::json& j) {
  GenConfig cfg;
  cfg.max_rooms = j.at("max_rooms");
  cfg.edge_min = j.at("edge_min");
  cfg.edge_max = j.at("edge_max");
  cfg.canvas = j.at("canvas");
  cfg.border_points = j.at("border_points");
  cfg.p_n = j.at("p_n");
  cfg.shrink = j.at("shrink");
  cfg.jitter_prob = j.at("jitter_prob");
  cfg.dropout_prob = j.at("dropout_prob");
  for (int i = 0; i < 4; ++i) cfg.shape_weights[i] = j.at("shape_weights")[i];
  cfg.seed = j.at("seed");
  return cfg;
}

inline nlohmann::json sample_to_json(const LayoutSample& s) {
  nlohmann::json j;
  auto& points = j["points"] = nlohmann::json::array();
  for (const auto& p : s.points) points.push_back({p.x, p.y});
  j["labels"] = s.labels;
  j["k_rooms"] = s.k_rooms;
  j["b"] = s.b;
  j["ordering"] = to_string(s.ordering);
  j["shape_tags"] = s.shape_tags;
  auto& rooms = j["gt_rooms"] = nlohmann::json::array();
  for (const auto& poly : s.gt_rooms) {
    nlohmann::json jp = nlohmann::json::array();
    for (const auto& v : poly.vertices) jp.push_back({v.x, v.y});
    rooms.push_back(std::move(jp));
  }
  return j;
}

inline LayoutSample sample_from_json(const nlohmann::json& j) {
  LayoutSample s;
  for (const auto& p : j.at("points")) s.points.push_back({p[0], p[1]});
  s.labels = j.at("labels").get<std::vector<int>>();
  s.k_rooms = j.at("k_rooms");
  s.b = j.at("b");
  s.ordering = ordering_from_string(j.at("ordering"));
  s.shape_tags = j.at("shape_tags").get<std::vector<std::string>>();
  for (const auto& jp : j.at("gt_rooms")) {
    Polygon poly;
    for (const auto& v : jp) poly.vertices.push_back({v[0], v[1]});
    s.gt_rooms.push_back(std::move(poly));
  }
  for (int l : s.labels)
    if (l < 0 || l >= static_cast<int>(s.points.size())) throw std::runtime_error("label index out of range in dataset");
  return s;
}

// JSON Lines: one header line (config + format version), then one sample per
// line. Streaming write, constant memory; the partial file is removed on error.
inline void generate_dataset(const GenConfig& cfg, std::size_t n_samples, Ordering ordering,
                             const std::string& out_path, int jobs = 1,
                             const std::string& mask_dir = {}) {
  try {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write dataset file: " + out_path);
    nlohmann::json header{{"format_version", kDatasetFormatVersion},
                          {"config", to_json(cfg)},
                          {"ordering", to_string(ordering)},
                          {"n_samples", n_samples}};
    out << header.dump() << "\n";

    const std::size_t chunk = 256;
    std::vector<std::string> lines;
    for (std::size_t base = 0; base < n_samples; base += chunk) {
      const std::size_t count = std::min(chunk, n_samples - base);
      lines.assign(count, {});
      const auto work = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
          if (mask_dir.empty()) {
            lines[i] = sample_to_json(generate_sample(cfg, base + i, ordering)).dump();
          } else {
            RenderedScene rendered;
            lines[i] = sample_to_json(generate_sample(cfg, base + i, ordering, nullptr, &rendered)).dump();
            const std::string stem = mask_dir + "/sample_" + std::to_string(base + i);
            write_pgm(rendered.wall_image, stem + "_walls.pgm");
            for (std::size_t m = 0; m < rendered.room_masks.size(); ++m)
              write_pgm(rendered.room_masks[m], stem + "_room" + std::to_string(m) + ".pgm");
          }
        }
      };
      if (jobs <= 1) {
        work(0, count);
      } else {
        std::vector<std::thread> pool;
        const std::size_t per = (count + jobs - 1) / jobs;
        for (int t = 0; t < jobs; ++t) {
          const std::size_t lo = std::min(count, t * per);
          const std::size_t hi = std::min(count, lo + per);
          if (lo < hi) pool.emplace_back(work, lo, hi);
        }
        for (auto& t : pool) t.join();
      }
      for (const auto& line : lines) out << line << "\n";
      if (!out) throw std::runtime_error("write failure on dataset file: " + out_path);
    }
  } catch (...) {
    std::remove(out_path.c_str());
    throw;
  }
}

struct Dataset {
  GenConfig config;
  Ordering ordering = Ordering::kRandom;
  std::vector<LayoutSample> samples;
};

inline Dataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty dataset file: " + path);
  const auto header = nlohmann::json::parse(line);
  if (header.at("format_version").get<int>() != kDatasetFormatVersion)
    throw std::runtime_error("unsupported dataset format version in " + path);
  Dataset ds;
  ds.config = gen_config_from_json(header.at("config"));
  ds.ordering = ordering_from_string(header.at("ordering"));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ds.samples.push_back(sample_from_json(nlohmann::json::parse(line)));
  }
  return ds;
}

}  // namespace roomcloud
