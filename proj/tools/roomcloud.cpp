// roomcloud: reconstruct 2D room layouts from point clouds.
// Subcommands: gen-data, walls, train, infer, eval.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "roomcloud/checkpoint.hpp"
#include "roomcloud/dataset.hpp"
#include "roomcloud/eval.hpp"
#include "roomcloud/geom.hpp"
#include "roomcloud/io.hpp"
#include "roomcloud/ptrnet.hpp"
#include "roomcloud/synthgen.hpp"
#include "roomcloud/train.hpp"
#include "roomcloud/walls.hpp"

namespace rc = roomcloud;

namespace {

std::uint64_t default_seed() {
  if (const char* env = std::getenv("ROOMCLOUD_SEED")) return std::stoull(env);
  return 0;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write output file: " + path);
  out << text;
}

nlohmann::json ptrnet_config_json(const rc::PtrNetConfig& c) {
  return {{"hidden", c.hidden},   {"attn", c.attn},       {"lr", c.lr},
          {"batch", c.batch},     {"beam_width", c.beam_width},
          {"grad_clip_norm", c.grad_clip_norm},           {"max_steps", c.max_steps},
          {"b", c.b},             {"k_max", c.k_max},     {"seed", c.seed}};
}

std::vector<rc::Polygon> predict_rooms(const rc::PtrNetParams& params, const rc::PtrNetConfig& cfg,
                                       const std::vector<rc::Point2>& points) {
  const auto seq = rc::beam_decode(params, points, cfg);
  std::vector<int> usable = seq;
  const int n = static_cast<int>(points.size());
  if (!usable.empty() && usable.back() == n) usable.pop_back();
  usable.resize(usable.size() - usable.size() % cfg.b);  // drop any partial room
  usable.push_back(n);
  return rc::decode_rooms(usable, points, cfg.b);
}

int run(int argc, char** argv) {
  CLI::App app{"room layout reconstruction from simple point clouds"};
  app.require_subcommand(1);
  app.set_config("--config", "", "config file (key = value lines); flags override file values");

  // ---- gen-data ----
  auto* gen = app.add_subcommand("gen-data", "generate the synthetic layout dataset");
  rc::GenConfig gcfg;
  gcfg.seed = default_seed();
  std::size_t gen_n = 1000;
  std::string gen_out = "dataset.jsonl", gen_ordering = "random", gen_mask_dir;
  int gen_jobs = 1;
  gen->add_option("--n", gen_n, "number of samples");
  gen->add_option("--out", gen_out, "output JSONL path");
  gen->add_option("--ordering", gen_ordering, "random|truesort|pseudosort")
      ->check(CLI::IsMember({"random", "truesort", "pseudosort"}));
  gen->add_option("--seed", gcfg.seed, "RNG seed");
  gen->add_option("--max-rooms", gcfg.max_rooms, "max rooms per sample");
  gen->add_option("--edge-min", gcfg.edge_min, "min edge length, meters");
  gen->add_option("--edge-max", gcfg.edge_max, "max edge length, meters");
  gen->add_option("--canvas", gcfg.canvas, "canvas side, pixels");
  gen->add_option("--border-points", gcfg.border_points, "border points per room (b)");
  gen->add_option("--p-n", gcfg.p_n, "max input points per sample");
  gen->add_option("--shrink", gcfg.shrink, "room shrink per side, meters");
  gen->add_option("--jitter", gcfg.jitter_prob, "wall pixel jitter probability");
  gen->add_option("--dropout", gcfg.dropout_prob, "wall pixel dropout probability");
  gen->add_option("--shape-weights", gcfg.shape_weights,
                  "weights: rectangular rectilinear nonright curved")->expected(4);
  gen->add_option("--jobs", gen_jobs, "worker threads (deterministic per-sample RNG)");
  gen->add_option("--mask-dir", gen_mask_dir, "also write per-sample PGM masks here");

  // ---- walls ----
  auto* walls = app.add_subcommand("walls", "extract a wall image from a mesh or point cloud");
  std::string walls_in, walls_out = "walls.pgm";
  int walls_bins = 128;
  std::size_t walls_points = 3000000;
  double walls_ratio = 0.25, walls_bin_size = 0.0;
  std::uint64_t walls_seed = default_seed();
  walls->add_option("--input", walls_in, "OBJ mesh or xyz point cloud")->required();
  walls->add_option("--out", walls_out, "output PGM path");
  walls->add_option("--bins", walls_bins, "histogram bins per side (D)");
  walls->add_option("--bin-size", walls_bin_size, "fixed physical bin size in meters (overrides --bins)");
  walls->add_option("--points-sampled", walls_points, "points sampled from a mesh input");
  walls->add_option("--threshold-ratio", walls_ratio, "wall threshold as a fraction of n_max");
  walls->add_option("--seed", walls_seed, "RNG seed for mesh sampling");

  // ---- train ----
  auto* train_cmd = app.add_subcommand("train", "train the pointer network");
  rc::PtrNetConfig tcfg;
  tcfg.seed = default_seed();
  std::string train_data, train_ckpt = "model.ckpt", train_resume, train_log;
  double train_stop = 0.0;
  bool train_verbose = false;
  train_cmd->add_option("--dataset", train_data, "training dataset (JSONL)")->required();
  train_cmd->add_option("--checkpoint", train_ckpt, "checkpoint output path");
  train_cmd->add_option("--resume", train_resume, "resume from this checkpoint");
  train_cmd->add_option("--log", train_log, "metrics CSV path");
  train_cmd->add_option("--hidden", tcfg.hidden, "LSTM hidden units");
  train_cmd->add_option("--attn", tcfg.attn, "attention size");
  train_cmd->add_option("--lr", tcfg.lr, "Adam learning rate");
  train_cmd->add_option("--batch", tcfg.batch, "batch size");
  train_cmd->add_option("--steps", tcfg.max_steps, "training steps");
  train_cmd->add_option("--clip", tcfg.grad_clip_norm, "max gradient norm");
  train_cmd->add_option("--b", tcfg.b, "border points per room");
  train_cmd->add_option("--k-max", tcfg.k_max, "max rooms at decode time");
  train_cmd->add_option("--seed", tcfg.seed, "RNG seed");
  train_cmd->add_option("--stop-below", train_stop, "stop early when batch loss drops below");
  train_cmd->add_flag("--verbose", train_verbose, "log progress to stderr");

  // ---- infer ----
  auto* infer = app.add_subcommand("infer", "decode room polygons with a trained model");
  std::string infer_walls, infer_dataset, infer_ckpt, infer_out = "-", infer_render, infer_ordering = "pseudosort";
  int infer_beam = -1, infer_pn = 0;
  std::uint64_t infer_seed = default_seed();
  infer->add_option("--walls", infer_walls, "input wall image (PGM)");
  infer->add_option("--dataset", infer_dataset, "run over every sample of a dataset instead");
  infer->add_option("--checkpoint", infer_ckpt, "trained checkpoint")->required();
  infer->add_option("--beam", infer_beam, "beam width (default: from checkpoint)");
  infer->add_option("--p-n", infer_pn, "points sampled from the wall image (default: from checkpoint era config)");
  infer->add_option("--ordering", infer_ordering, "input ordering for PGM input: random|pseudosort")
      ->check(CLI::IsMember({"random", "pseudosort"}));
  infer->add_option("--seed", infer_seed, "subsampling seed");
  infer->add_option("--out", infer_out, "output JSON path (- for stdout)");
  infer->add_option("--render", infer_render, "also write a walls+borders overlay PGM");

  // ---- eval ----
  auto* eval_cmd = app.add_subcommand("eval", "score predictions against dataset ground truth");
  std::string eval_dataset, eval_ckpt, eval_pred, eval_out = "-", eval_format = "text";
  int eval_beam = -1;
  eval_cmd->add_option("--dataset", eval_dataset, "dataset with ground-truth rooms (JSONL)")->required();
  eval_cmd->add_option("--checkpoint", eval_ckpt, "decode predictions with this model");
  eval_cmd->add_option("--pred", eval_pred, "or use precomputed predictions (infer --dataset output)");
  eval_cmd->add_option("--beam", eval_beam, "beam width override");
  eval_cmd->add_option("--format", eval_format, "text|json")->check(CLI::IsMember({"text", "json"}));
  eval_cmd->add_option("--out", eval_out, "output path (- for stdout)");

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    rc::generate_dataset(gcfg, gen_n, rc::ordering_from_string(gen_ordering), gen_out, gen_jobs, gen_mask_dir);
    std::cerr << "wrote " << gen_n << " samples to " << gen_out << "\n";
    return 0;
  }

  if (walls->parsed()) {
    std::vector<rc::Point3> cloud;
    if (walls_in.size() > 4 && walls_in.substr(walls_in.size() - 4) == ".obj") {
      cloud = rc::sample_mesh(rc::read_obj(walls_in), walls_points, walls_seed);
    } else {
      cloud = rc::read_xyz(walls_in);
    }
    if (walls_bin_size > 0.0) {
      double min_x = cloud[0].x, max_x = min_x, min_y = cloud[0].y, max_y = min_y;
      for (const auto& p : cloud) {
        min_x = std::min(min_x, p.x); max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y); max_y = std::max(max_y, p.y);
      }
      const double extent = std::max(max_x - min_x, max_y - min_y);
      walls_bins = std::max(2, static_cast<int>(std::ceil(extent / walls_bin_size)));
    }
    const rc::WallGrid grid = rc::project_histogram(cloud, walls_bins);
    const rc::WallImage img = rc::extract_walls(grid, walls_ratio);
    rc::write_pgm(img.bits, walls_out);
    std::ofstream side(walls_out + ".txt");
    side << "bins = " << grid.d << "\nextent_min_x = " << grid.min_x << "\nextent_min_y = " << grid.min_y
         << "\nextent_max_x = " << grid.max_x << "\nextent_max_y = " << grid.max_y
         << "\nthreshold = " << img.threshold << "\nthreshold_ratio = " << walls_ratio
         << "\npoints = " << cloud.size() << "\nseed = " << walls_seed << "\n";
    std::cerr << "wrote " << walls_out << " (threshold " << img.threshold << ")\n";
    return 0;
  }

  if (train_cmd->parsed()) {
    const rc::Dataset ds = rc::read_dataset(train_data);
    rc::TrainOptions opts;
    opts.checkpoint_path = train_ckpt;
    opts.log_path = train_log;
    opts.stop_below = train_stop;
    opts.verbose = train_verbose;
    std::optional<rc::Checkpoint> resume;
    if (!train_resume.empty()) {
      resume = rc::load_checkpoint(train_resume);
      tcfg = resume->config;
    }
    rc::train(ds.samples, tcfg, opts, resume ? &*resume : nullptr);
    std::cerr << "wrote checkpoint " << train_ckpt << "\n";
    return 0;
  }

  if (infer->parsed()) {
    const rc::Checkpoint ck = rc::load_checkpoint(infer_ckpt);
    rc::PtrNetConfig cfg = ck.config;
    if (infer_beam > 0) cfg.beam_width = infer_beam;
    nlohmann::json out;
    out["config"] = ptrnet_config_json(cfg);

    if (!infer_dataset.empty()) {
      const rc::Dataset ds = rc::read_dataset(infer_dataset);
      auto& samples = out["samples"] = nlohmann::json::array();
      for (const auto& s : ds.samples) {
        nlohmann::json js;
        auto& rooms = js["rooms"] = nlohmann::json::array();
        for (const auto& room : predict_rooms(ck.params, cfg, s.points)) {
          nlohmann::json jr = nlohmann::json::array();
          for (const auto& v : room.vertices) jr.push_back({v.x, v.y});
          rooms.push_back(std::move(jr));
        }
        samples.push_back(std::move(js));
      }
      write_text(infer_out, out.dump() + "\n");
      return 0;
    }

    if (infer_walls.empty()) throw CLI::ValidationError("infer", "need --walls or --dataset");
    const rc::Mask wall_mask = rc::read_pgm(infer_walls);
    rc::WallImage img{wall_mask.width(), wall_mask, 0};
    rc::PointSet2 raw = rc::pixels_to_points(img);
    const rc::Normalizer norm = rc::fit_normalizer(raw.points);
    rc::PointSet2 normed;
    for (const auto& p : raw.points) normed.points.push_back(norm.apply(p));
    const int pn = infer_pn > 0 ? infer_pn : 300;
    rc::PointSet2 sub = rc::subsample_points(normed, static_cast<std::size_t>(pn), infer_seed);
    std::vector<rc::Point2> points =
        infer_ordering == "pseudosort" ? rc::pseudo_sort(sub.points) : sub.points;

    const auto rooms = predict_rooms(ck.params, cfg, points);
    auto& jrooms = out["rooms"] = nlohmann::json::array();
    for (const auto& room : rooms) {
      nlohmann::json jr = nlohmann::json::array();
      for (const auto& v : room.vertices) jr.push_back({v.x, v.y});
      jrooms.push_back(std::move(jr));
    }
    write_text(infer_out, out.dump() + "\n");

    if (!infer_render.empty()) {
      rc::Mask overlay = wall_mask;
      const int d = wall_mask.width();
      for (const auto& room : rooms) {
        rc::Polygon px;
        for (const auto& v : room.vertices)
          px.vertices.push_back({v.x / norm.scale + norm.cx, d - 1.0 - (v.y / norm.scale + norm.cy)});
        const rc::Mask outline = rc::rasterize_polygon(px, d, wall_mask.height(), rc::RasterMode::kOutline);
        for (int y = 0; y < overlay.height(); ++y)
          for (int x = 0; x < overlay.width(); ++x)
            if (outline.at(x, y)) overlay.set(x, y);
      }
      rc::write_pgm(overlay, infer_render);
    }
    return 0;
  }

  if (eval_cmd->parsed()) {
    const rc::Dataset ds = rc::read_dataset(eval_dataset);
    std::vector<std::vector<rc::Polygon>> preds;
    if (!eval_ckpt.empty()) {
      const rc::Checkpoint ck = rc::load_checkpoint(eval_ckpt);
      rc::PtrNetConfig cfg = ck.config;
      if (eval_beam > 0) cfg.beam_width = eval_beam;
      for (const auto& s : ds.samples) preds.push_back(predict_rooms(ck.params, cfg, s.points));
    } else if (!eval_pred.empty()) {
      std::ifstream in(eval_pred);
      if (!in) throw std::runtime_error("cannot open predictions: " + eval_pred);
      nlohmann::json j;
      in >> j;
      for (const auto& js : j.at("samples")) {
        std::vector<rc::Polygon> rooms;
        for (const auto& jr : js.at("rooms")) {
          rc::Polygon poly;
          for (const auto& v : jr) poly.vertices.push_back({v[0], v[1]});
          rooms.push_back(std::move(poly));
        }
        preds.push_back(std::move(rooms));
      }
      if (preds.size() != ds.samples.size())
        throw std::runtime_error("prediction/dataset sample count mismatch: " +
                                 std::to_string(preds.size()) + " vs " + std::to_string(ds.samples.size()));
    } else {
      throw CLI::ValidationError("eval", "need --checkpoint or --pred");
    }

    std::vector<rc::SampleEval> evals;
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
      rc::SampleEval ev = rc::match_rooms(preds[i], ds.samples[i].gt_rooms);
      ev.shape_tags = ds.samples[i].shape_tags;
      evals.push_back(std::move(ev));
    }
    const rc::EvalResult result = rc::evaluate(std::move(evals));
    if (eval_format == "json") {
      nlohmann::json j = rc::report_json(result);
      j["dataset_config"] = rc::to_json(ds.config);
      write_text(eval_out, j.dump() + "\n");
    } else {
      write_text(eval_out, rc::report_text(result));
    }
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    const std::string msg = e.what();
    return msg.find("non-finite") != std::string::npos ? 3 : 2;
  }
}
