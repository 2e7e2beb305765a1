#pragma once

#include <cmath>
#include <stdexcept>

#include "roomcloud/ptrnet.hpp"

namespace roomcloud {

inline double grad_norm(const PtrNetParams& g) {
  double sq = 0.0;
  g.visit([&](const char*, const Mat& m) { sq += m.squaredNorm(); });
  return std::sqrt(sq);
}

// Scale all gradients by max_norm / norm when the global L2 norm exceeds it.
inline double clip_gradients(PtrNetParams& g, double max_norm) {
  const double norm = grad_norm(g);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    g.visit([&](const char*, Mat& m) { m *= s; });
  }
  return norm;
}

struct AdamState {
  PtrNetParams m, v;  // first/second moment accumulators
  long step = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

inline AdamState make_adam_state(const PtrNetParams& p) {
  return {zero_like(p), zero_like(p), 0};
}

inline void adam_step(PtrNetParams& params, const PtrNetParams& grads, AdamState& st, double lr) {
  ++st.step;
  const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
  struct Triple { Mat* p; Mat* m; Mat* v; const Mat* g; };
  std::vector<Triple> ts;
  params.visit([&](const char*, Mat& m) { ts.push_back({&m, nullptr, nullptr, nullptr}); });
  std::size_t i = 0;
  st.m.visit([&](const char*, Mat& m) { ts[i++].m = &m; });
  i = 0;
  st.v.visit([&](const char*, Mat& m) { ts[i++].v = &m; });
  i = 0;
  grads.visit([&](const char*, const Mat& m) { ts[i++].g = &m; });
  for (auto& t : ts) {
    *t.m = st.beta1 * *t.m + (1.0 - st.beta1) * *t.g;
    *t.v = (st.beta2 * t.v->array() + (1.0 - st.beta2) * t.g->array().square()).matrix();
    t.p->array() -= lr * (t.m->array() / bc1) / ((t.v->array() / bc2).sqrt() + st.eps);
  }
}

}  // namespace roomcloud
