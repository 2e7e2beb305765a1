#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "roomcloud/geom.hpp"
#include "roomcloud/rng.hpp"
#include "roomcloud/synthgen.hpp"

namespace roomcloud {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct PtrNetConfig {
  int hidden = 128;
  int attn = 128;
  double lr = 0.01;
  int batch = 32;
  int beam_width = 4;
  double grad_clip_norm = 5.0;
  int max_steps = 3000;
  int b = 10;                  // border points per room
  int k_max = 5;
  std::uint64_t seed = 0;
};

// One gated recurrent cell; rows of wx/wh are the stacked i,f,o,g gates.
struct LstmParams {
  Mat wx;  // 4h x in
  Mat wh;  // 4h x h
  Mat b;   // 4h x 1
};

struct PtrNetParams {
  int hidden = 0, attn = 0;
  Mat in_w, in_b;              // h x 2, h x 1
  LstmParams enc, dec;
  Mat attn_enc;                // a x h  (applied to encoder states)
  Mat attn_dec;                // a x h  (applied to decoder state)
  Mat attn_v;                  // a x 1
  Mat start_emb, term_emb;     // h x 1 decoder inputs
  Mat term_state;              // h x 1 virtual terminal encoder slot

  template <class F>
  void visit(F&& f) {
    f("in_w", in_w); f("in_b", in_b);
    f("enc_wx", enc.wx); f("enc_wh", enc.wh); f("enc_b", enc.b);
    f("dec_wx", dec.wx); f("dec_wh", dec.wh); f("dec_b", dec.b);
    f("attn_enc", attn_enc); f("attn_dec", attn_dec); f("attn_v", attn_v);
    f("start_emb", start_emb); f("term_emb", term_emb); f("term_state", term_state);
  }
  template <class F>
  void visit(F&& f) const { const_cast<PtrNetParams*>(this)->visit([&](const char* n, Mat& m) { f(n, std::as_const(m)); }); }
};

inline PtrNetParams zero_like(const PtrNetParams& p) {
  PtrNetParams g = p;
  g.visit([](const char*, Mat& m) { m.setZero(); });
  return g;
}

inline PtrNetParams init_params(const PtrNetConfig& cfg) {
  if (cfg.hidden <= 0 || cfg.attn <= 0) throw std::invalid_argument("sizes must be positive");
  const int h = cfg.hidden, a = cfg.attn;
  PtrNetParams p;
  p.hidden = h;
  p.attn = a;
  p.in_w.resize(h, 2); p.in_b.resize(h, 1);
  p.enc = {Mat(4 * h, h), Mat(4 * h, h), Mat(4 * h, 1)};
  p.dec = {Mat(4 * h, h), Mat(4 * h, h), Mat(4 * h, 1)};
  p.attn_enc.resize(a, h); p.attn_dec.resize(a, h); p.attn_v.resize(a, 1);
  p.start_emb.resize(h, 1); p.term_emb.resize(h, 1); p.term_state.resize(h, 1);
  Rng rng(cfg.seed);
  p.visit([&](const char*, Mat& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-0.08, 0.08);
  });
  return p;
}

namespace nn {

inline Vec sigmoid(const Vec& x) { return (1.0 / (1.0 + (-x.array()).exp())).matrix(); }

struct LstmStep {
  Vec act;  // 4h activated gates [i;f;o;g]
  Vec c, h;
};

inline LstmStep lstm_step(const LstmParams& p, const Vec& pre_x, const Vec& h_prev, const Vec& c_prev) {
  const int h = static_cast<int>(h_prev.size());
  Vec pre = pre_x + p.wh * h_prev + p.b.col(0);
  LstmStep s;
  s.act.resize(4 * h);
  s.act.segment(0, 3 * h) = sigmoid(pre.segment(0, 3 * h));
  s.act.segment(3 * h, h) = pre.segment(3 * h, h).array().tanh().matrix();
  const auto gi = s.act.segment(0, h), gf = s.act.segment(h, h), gg = s.act.segment(3 * h, h);
  s.c = (gf.array() * c_prev.array() + gi.array() * gg.array()).matrix();
  s.h = (s.act.segment(2 * h, h).array() * s.c.array().tanh()).matrix();
  return s;
}

}  // namespace nn

// Encoder states for each input point plus the learned terminal slot at
// column n. Column n-1 seeds the decoder.
inline Mat encode(const PtrNetParams& p, const std::vector<Point2>& points) {
  if (points.empty()) throw std::invalid_argument("cannot encode an empty sequence");
  const int h = p.hidden;
  const int n = static_cast<int>(points.size());
  Mat x(2, n);
  for (int j = 0; j < n; ++j) x.col(j) << points[j].x, points[j].y;
  const Mat emb = (p.in_w * x).colwise() + p.in_b.col(0);
  const Mat pre_x = p.enc.wx * emb;
  Mat states(h, n + 1);
  Vec hs = Vec::Zero(h), cs = Vec::Zero(h);
  for (int t = 0; t < n; ++t) {
    auto s = nn::lstm_step(p.enc, pre_x.col(t), hs, cs);
    hs = s.h; cs = s.c;
    states.col(t) = hs;
  }
  states.col(n) = p.term_state.col(0);
  return states;
}

// u_j = v^T tanh(W1 e_j + W2 d) for every encoder slot including the terminal.
inline Vec attention_scores(const PtrNetParams& p, const Mat& encoder_states, const Vec& d) {
  const Mat z = ((p.attn_enc * encoder_states).colwise() + p.attn_dec * d).array().tanh().matrix();
  return z.transpose() * p.attn_v.col(0);
}

inline Vec pointer_distribution(const Vec& u) {
  const double mx = u.maxCoeff();
  Vec e = (u.array() - mx).exp().matrix();
  return e / e.sum();
}

struct ForwardTrace {
  int n = 0, m = 0;
  Mat x;                  // 2 x n
  Mat emb;                // h x n
  Mat enc_act, enc_c, enc_h;
  Mat ebar;               // h x (n+1)
  Mat w1e;                // a x (n+1)
  Mat dec_x, dec_act, dec_c, dec_h;
  std::vector<Mat> zt;    // per decoder step, a x (n+1)
  Mat probs;              // (n+1) x m
  std::vector<int> labels;  // terminal appended
  double nll = 0.0;
};

// Teacher-forced forward pass; labels get the terminal index (= n) appended.
inline std::pair<ForwardTrace, double> forward_teacher_forced(const PtrNetParams& p, const LayoutSample& sample) {
  const int h = p.hidden;
  const int n = static_cast<int>(sample.points.size());
  if (n == 0) throw std::invalid_argument("empty input sequence");
  for (int l : sample.labels)
    if (l < 0 || l >= n) throw std::invalid_argument("label index out of range");

  ForwardTrace t;
  t.n = n;
  t.labels = sample.labels;
  t.labels.push_back(n);  // terminal
  t.m = static_cast<int>(t.labels.size());
  const int m = t.m;

  t.x.resize(2, n);
  for (int j = 0; j < n; ++j) t.x.col(j) << sample.points[j].x, sample.points[j].y;
  t.emb = (p.in_w * t.x).colwise() + p.in_b.col(0);

  const Mat enc_pre = p.enc.wx * t.emb;
  t.enc_act.resize(4 * h, n); t.enc_c.resize(h, n); t.enc_h.resize(h, n);
  Vec hs = Vec::Zero(h), cs = Vec::Zero(h);
  for (int j = 0; j < n; ++j) {
    auto s = nn::lstm_step(p.enc, enc_pre.col(j), hs, cs);
    t.enc_act.col(j) = s.act; t.enc_c.col(j) = s.c; t.enc_h.col(j) = s.h;
    hs = s.h; cs = s.c;
  }
  t.ebar.resize(h, n + 1);
  t.ebar.leftCols(n) = t.enc_h;
  t.ebar.col(n) = p.term_state.col(0);
  t.w1e = p.attn_enc * t.ebar;

  t.dec_x.resize(h, m);
  t.dec_x.col(0) = p.start_emb.col(0);
  for (int i = 1; i < m; ++i)
    t.dec_x.col(i) = t.labels[i - 1] < n ? Vec(t.emb.col(t.labels[i - 1])) : Vec(p.term_emb.col(0));

  t.dec_act.resize(4 * h, m); t.dec_c.resize(h, m); t.dec_h.resize(h, m);
  t.zt.resize(m);
  t.probs.resize(n + 1, m);
  hs = t.enc_h.col(n - 1);
  cs = t.enc_c.col(n - 1);
  t.nll = 0.0;
  for (int i = 0; i < m; ++i) {
    auto s = nn::lstm_step(p.dec, p.dec.wx * t.dec_x.col(i), hs, cs);
    t.dec_act.col(i) = s.act; t.dec_c.col(i) = s.c; t.dec_h.col(i) = s.h;
    hs = s.h; cs = s.c;
    t.zt[i] = ((t.w1e.colwise() + p.attn_dec * s.h).array().tanh()).matrix();
    const Vec u = t.zt[i].transpose() * p.attn_v.col(0);
    const double mx = u.maxCoeff();
    const Vec e = (u.array() - mx).exp().matrix();
    const double z = e.sum();
    t.probs.col(i) = e / z;
    t.nll -= u(t.labels[i]) - mx - std::log(z);
  }
  if (!std::isfinite(t.nll)) throw std::runtime_error("non-finite loss in forward pass");
  return {std::move(t), t.nll};
}

namespace nn {

// LSTM backward-through-time shared by encoder and decoder. dG receives
// pre-activation gate gradients; returns gradient w.r.t. the initial (h, c).
inline std::pair<Vec, Vec> lstm_bptt(const LstmParams& p, const Mat& act, const Mat& c,
                                     const Vec& c0, const Mat& dH, Mat& dG,
                                     const Vec* dc_seed = nullptr) {
  const int h = static_cast<int>(c.rows());
  const int steps = static_cast<int>(c.cols());
  Vec dh = Vec::Zero(h);
  Vec dc = dc_seed ? *dc_seed : Vec(Vec::Zero(h));
  for (int i = steps - 1; i >= 0; --i) {
    dh += dH.col(i);
    const auto gi = act.col(i).segment(0, h).array();
    const auto gf = act.col(i).segment(h, h).array();
    const auto go = act.col(i).segment(2 * h, h).array();
    const auto gg = act.col(i).segment(3 * h, h).array();
    const auto tc = c.col(i).array().tanh();
    const Vec c_prev = i > 0 ? Vec(c.col(i - 1)) : c0;
    dc.array() += dh.array() * go * (1.0 - tc * tc);
    Vec dgate(4 * h);
    dgate.segment(0, h) = (dc.array() * gg * gi * (1.0 - gi)).matrix();
    dgate.segment(h, h) = (dc.array() * c_prev.array() * gf * (1.0 - gf)).matrix();
    dgate.segment(2 * h, h) = (dh.array() * tc * go * (1.0 - go)).matrix();
    dgate.segment(3 * h, h) = (dc.array() * gi * (1.0 - gg * gg)).matrix();
    dG.col(i) = dgate;
    dc = (dc.array() * gf).matrix();
    dh = p.wh.transpose() * dgate;
  }
  return {dh, dc};
}

}  // namespace nn

// Exact gradient of this sample's summed NLL, accumulated into g.
inline void backward(const PtrNetParams& p, const ForwardTrace& t, PtrNetParams& g) {
  const int h = p.hidden, n = t.n, m = t.m;

  // softmax + attention
  Mat dU = t.probs;  // (n+1) x m
  for (int i = 0; i < m; ++i) dU(t.labels[i], i) -= 1.0;

  Mat sdz = Mat::Zero(p.attn, n + 1);
  Mat dzbar(p.attn, m);
  for (int i = 0; i < m; ++i) {
    const Mat dz = ((p.attn_v.col(0) * dU.col(i).transpose()).array() * (1.0 - t.zt[i].array().square())).matrix();
    g.attn_v.col(0) += t.zt[i] * dU.col(i);
    sdz += dz;
    dzbar.col(i) = dz.rowwise().sum();
  }
  g.attn_enc += sdz * t.ebar.transpose();
  g.attn_dec += dzbar * t.dec_h.transpose();
  const Mat debar = p.attn_enc.transpose() * sdz;       // h x (n+1)
  const Mat ddec_h = p.attn_dec.transpose() * dzbar;    // h x m

  // decoder
  Mat dG_dec(4 * h, m);
  auto [dh0_dec, dc0_dec] = nn::lstm_bptt(p.dec, t.dec_act, t.dec_c, t.enc_c.col(n - 1), ddec_h, dG_dec);
  g.dec.wx += dG_dec * t.dec_x.transpose();
  Mat hprev(h, m);
  hprev.col(0) = t.enc_h.col(n - 1);
  if (m > 1) hprev.rightCols(m - 1) = t.dec_h.leftCols(m - 1);
  g.dec.wh += dG_dec * hprev.transpose();
  g.dec.b.col(0) += dG_dec.rowwise().sum();

  Mat demb = Mat::Zero(h, n);
  const Mat dxdec = p.dec.wx.transpose() * dG_dec;
  g.start_emb.col(0) += dxdec.col(0);
  for (int i = 1; i < m; ++i) {
    if (t.labels[i - 1] < n) demb.col(t.labels[i - 1]) += dxdec.col(i);
    else g.term_emb.col(0) += dxdec.col(i);
  }

  // encoder
  Mat dH_enc = debar.leftCols(n);
  dH_enc.col(n - 1) += dh0_dec;
  g.term_state.col(0) += debar.col(n);

  // dc0_dec carries into the last encoder step's cell
  Mat dG_enc(4 * h, n);
  nn::lstm_bptt(p.enc, t.enc_act, t.enc_c, Vec::Zero(h), dH_enc, dG_enc, &dc0_dec);
  g.enc.wx += dG_enc * t.emb.transpose();
  Mat eprev = Mat::Zero(h, n);
  if (n > 1) eprev.rightCols(n - 1) = t.enc_h.leftCols(n - 1);
  g.enc.wh += dG_enc * eprev.transpose();
  g.enc.b.col(0) += dG_enc.rowwise().sum();
  demb += p.enc.wx.transpose() * dG_enc;

  g.in_w += demb * t.x.transpose();
  g.in_b.col(0) += demb.rowwise().sum();
}

// Mean NLL over the batch and its exact analytic gradient.
inline std::pair<double, PtrNetParams> loss_and_grad(const PtrNetParams& p, const std::vector<LayoutSample>& batch) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  PtrNetParams g = zero_like(p);
  double total = 0.0;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    double nll;
    try {
      auto [trace, sample_nll] = forward_teacher_forced(p, batch[s]);
      nll = sample_nll;
      backward(p, trace, g);
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(std::string(e.what()) + " (batch sample " + std::to_string(s) + ")");
    }
    total += nll;
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  g.visit([&](const char*, Mat& m) { m *= inv; });
  return {total * inv, g};
}

// Beam search over pointer sequences. The terminal slot (index n) is only
// admissible at room boundaries and ends a hypothesis; width 1 is exactly
// greedy decoding.
inline std::vector<int> beam_decode(const PtrNetParams& p, const std::vector<Point2>& points,
                                    const PtrNetConfig& cfg) {
  const int n = static_cast<int>(points.size());
  const int h = p.hidden;
  const int width = std::max(1, cfg.beam_width);

  Mat x(2, n);
  for (int j = 0; j < n; ++j) x.col(j) << points[j].x, points[j].y;
  const Mat emb = (p.in_w * x).colwise() + p.in_b.col(0);
  const Mat enc_pre = p.enc.wx * emb;
  Mat enc_h(h, n), enc_c(h, n);
  {
    Vec hs = Vec::Zero(h), cs = Vec::Zero(h);
    for (int j = 0; j < n; ++j) {
      auto s = nn::lstm_step(p.enc, enc_pre.col(j), hs, cs);
      hs = s.h; cs = s.c;
      enc_h.col(j) = hs; enc_c.col(j) = cs;
    }
  }
  Mat ebar(h, n + 1);
  ebar.leftCols(n) = enc_h;
  ebar.col(n) = p.term_state.col(0);

  struct Hyp {
    std::vector<int> seq;
    double logp = 0.0;
    Vec h, c;
    bool done = false;
  };
  std::vector<Hyp> beam{{{}, 0.0, enc_h.col(n - 1), enc_c.col(n - 1), false}};
  const int max_emit = cfg.b * cfg.k_max;

  for (int step = 0; step <= max_emit; ++step) {
    bool all_done = true;
    for (const auto& hyp : beam) all_done &= hyp.done;
    if (all_done) break;

    struct Cand { double logp; std::size_t hyp; int token; };
    std::vector<Cand> cands;
    std::vector<Hyp> stepped(beam.size());
    for (std::size_t bi = 0; bi < beam.size(); ++bi) {
      const Hyp& hyp = beam[bi];
      if (hyp.done) { cands.push_back({hyp.logp, bi, -1}); continue; }
      const Vec in = hyp.seq.empty() ? Vec(p.start_emb.col(0))
                   : hyp.seq.back() < n ? Vec(emb.col(hyp.seq.back())) : Vec(p.term_emb.col(0));
      auto s = nn::lstm_step(p.dec, p.dec.wx * in, hyp.h, hyp.c);
      stepped[bi] = {hyp.seq, hyp.logp, s.h, s.c, false};
      const Vec u = attention_scores(p, ebar, s.h);
      const double mx = u.maxCoeff();
      const double lse = mx + std::log((u.array() - mx).exp().sum());
      const bool at_boundary = static_cast<int>(hyp.seq.size()) % cfg.b == 0;
      const int emitted = static_cast<int>(hyp.seq.size());
      for (int tok = 0; tok <= n; ++tok) {
        if (tok == n && !at_boundary) continue;
        if (tok < n && emitted >= max_emit) continue;
        cands.push_back({hyp.logp + u(tok) - lse, bi, tok});
      }
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.logp > b.logp; });

    std::vector<Hyp> next;
    for (const auto& c : cands) {
      if (static_cast<int>(next.size()) >= width) break;
      if (c.token < 0) {
        next.push_back(beam[c.hyp]);
      } else {
        Hyp hyp = stepped[c.hyp];
        hyp.seq.push_back(c.token);
        hyp.logp = c.logp;
        hyp.done = c.token == n;
        next.push_back(std::move(hyp));
      }
    }
    beam = std::move(next);
  }

  const Hyp* best = nullptr;
  for (const auto& hyp : beam)
    if (hyp.done && (!best || hyp.logp > best->logp)) best = &hyp;
  if (!best) best = &beam.front();
  return best->seq;
}

// Split a pointer sequence into K = len/b room polygons of pointed-to inputs.
inline std::vector<Polygon> decode_rooms(const std::vector<int>& indices,
                                         const std::vector<Point2>& points, int b) {
  std::vector<int> seq = indices;
  const int n = static_cast<int>(points.size());
  if (!seq.empty() && seq.back() == n) seq.pop_back();  // strip terminal
  if (seq.size() % b != 0)
    throw std::invalid_argument("partial room: " + std::to_string(seq.size() % b) +
                                " trailing indices do not fill a room of " + std::to_string(b));
  std::vector<Polygon> rooms;
  for (std::size_t base = 0; base < seq.size(); base += b) {
    Polygon poly;
    for (int i = 0; i < b; ++i) {
      const int idx = seq[base + i];
      if (idx < 0 || idx >= n) throw std::invalid_argument("pointer index out of range");
      poly.vertices.push_back(points[idx]);
    }
    rooms.push_back(std::move(poly));
  }
  return rooms;
}

}  // namespace roomcloud
