#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "roomcloud/checkpoint.hpp"
#include "roomcloud/dataset.hpp"
#include "roomcloud/optim.hpp"
#include "roomcloud/ptrnet.hpp"

namespace roomcloud {

struct TrainOptions {
  std::string checkpoint_path;
  std::string log_path;          // CSV step,loss,grad_norm,wall_time_s
  int checkpoint_every = 500;
  double stop_below = 0.0;       // stop early once loss falls below (0 = never)
  bool verbose = false;
};

namespace detail {

// Batch composition is a pure function of (seed, step): samples stream from
// per-epoch Fisher-Yates shuffles, so training resumed from a checkpoint
// walks the exact same sample sequence.
inline const std::vector<std::size_t>& epoch_permutation(std::uint64_t seed, std::uint64_t epoch,
                                                         std::size_t n, std::vector<std::size_t>& cache,
                                                         std::uint64_t& cached_epoch) {
  if (cache.size() == n && cached_epoch == epoch) return cache;
  cache.resize(n);
  for (std::size_t i = 0; i < n; ++i) cache[i] = i;
  Rng rng = Rng::child(seed ^ 0x5157ab5d00ULL, epoch);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(cache[i], cache[rng.below(i + 1)]);
  cached_epoch = epoch;
  return cache;
}

}  // namespace detail

// Mini-batch Adam training with gradient clipping. Deterministic: identical
// config + dataset reproduce bit-identical checkpoints, and resuming from a
// checkpoint continues the same trajectory.
inline Checkpoint train(const std::vector<LayoutSample>& data, const PtrNetConfig& cfg,
                        const TrainOptions& opts, const Checkpoint* resume_from = nullptr) {
  if (data.empty()) throw std::invalid_argument("empty training dataset");
  Checkpoint ck;
  if (resume_from) {
    ck = *resume_from;
  } else {
    ck.config = cfg;
    ck.params = init_params(cfg);
    ck.adam = make_adam_state(ck.params);
    ck.step = 0;
  }

  std::ofstream log;
  if (!opts.log_path.empty()) {
    log.open(opts.log_path, resume_from ? std::ios::app : std::ios::out);
    if (!log) throw std::runtime_error("cannot write metrics log: " + opts.log_path);
    if (!resume_from) log << "step,loss,grad_norm,wall_time_s\n";
  }

  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = data.size();
  std::vector<std::size_t> perm_cache;
  std::uint64_t cached_epoch = ~std::uint64_t{0};

  while (ck.step < cfg.max_steps) {
    std::vector<LayoutSample> batch;
    batch.reserve(cfg.batch);
    std::uint64_t pos = static_cast<std::uint64_t>(ck.step) * cfg.batch;
    for (int i = 0; i < cfg.batch; ++i, ++pos) {
      const auto& perm = detail::epoch_permutation(cfg.seed, pos / n, n, perm_cache, cached_epoch);
      batch.push_back(data[perm[pos % n]]);
    }

    auto [loss, grads] = loss_and_grad(ck.params, batch);
    const double norm = clip_gradients(grads, cfg.grad_clip_norm);
    adam_step(ck.params, grads, ck.adam, cfg.lr);
    ++ck.step;

    if (log) {
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      log << ck.step << "," << loss << "," << norm << "," << secs << "\n";
    }
    if (opts.verbose && ck.step % 50 == 0)
      std::fprintf(stderr, "step %ld loss %.5f grad_norm %.3f\n", ck.step, loss, norm);

    if (!opts.checkpoint_path.empty() && ck.step % opts.checkpoint_every == 0)
      save_checkpoint(ck, opts.checkpoint_path);
    if (opts.stop_below > 0.0 && loss < opts.stop_below) break;
  }
  if (!opts.checkpoint_path.empty()) save_checkpoint(ck, opts.checkpoint_path);
  return ck;
}

}  // namespace roomcloud
