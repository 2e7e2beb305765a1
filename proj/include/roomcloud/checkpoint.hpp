#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "roomcloud/optim.hpp"
#include "roomcloud/ptrnet.hpp"

namespace roomcloud {

inline constexpr char kCheckpointMagic[4] = {'R', 'C', 'P', 'N'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("truncated checkpoint");
  return b[0] | (b[1] << 8) | (b[2] << 16) | (std::uint32_t{b[3]} << 24);
}

inline void write_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

inline double read_f64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("truncated checkpoint");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= std::uint64_t{b[i]} << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

// Each tensor: (name length, name, dims, row-major float64, little-endian).
inline void write_tensor(std::ostream& out, const std::string& name, const Mat& m) {
  write_u32(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  write_u32(out, static_cast<std::uint32_t>(m.rows()));
  write_u32(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) write_f64(out, m(r, c));
}

inline std::pair<std::string, Mat> read_tensor(std::istream& in) {
  const std::uint32_t name_len = read_u32(in);
  std::string name(name_len, '\0');
  if (!in.read(name.data(), name_len)) throw std::runtime_error("truncated checkpoint");
  const std::uint32_t rows = read_u32(in);
  const std::uint32_t cols = read_u32(in);
  Mat m(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r)
    for (std::uint32_t c = 0; c < cols; ++c) m(r, c) = read_f64(in);
  return {std::move(name), std::move(m)};
}

}  // namespace detail

inline std::string config_text(const PtrNetConfig& c) {
  std::ostringstream ss;
  ss << "hidden = " << c.hidden << "\nattn = " << c.attn << "\nlr = " << c.lr
     << "\nbatch = " << c.batch << "\nbeam_width = " << c.beam_width
     << "\ngrad_clip_norm = " << c.grad_clip_norm << "\nmax_steps = " << c.max_steps
     << "\nb = " << c.b << "\nk_max = " << c.k_max << "\nseed = " << c.seed << "\n";
  return ss.str();
}

inline PtrNetConfig config_from_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t") + 1);
      return s;
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  PtrNetConfig c;
  c.hidden = std::stoi(kv.at("hidden"));
  c.attn = std::stoi(kv.at("attn"));
  c.lr = std::stod(kv.at("lr"));
  c.batch = std::stoi(kv.at("batch"));
  c.beam_width = std::stoi(kv.at("beam_width"));
  c.grad_clip_norm = std::stod(kv.at("grad_clip_norm"));
  c.max_steps = std::stoi(kv.at("max_steps"));
  c.b = std::stoi(kv.at("b"));
  c.k_max = std::stoi(kv.at("k_max"));
  c.seed = std::stoull(kv.at("seed"));
  return c;
}

struct Checkpoint {
  PtrNetConfig config;
  PtrNetParams params;
  AdamState adam;
  long step = 0;
};

inline void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kCheckpointMagic, 4);
  detail::write_u32(out, kCheckpointVersion);
  const std::string cfg = config_text(ck.config);
  detail::write_u32(out, static_cast<std::uint32_t>(cfg.size()));
  out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
  detail::write_u32(out, static_cast<std::uint32_t>(ck.step));
  detail::write_u32(out, static_cast<std::uint32_t>(ck.adam.step));
  ck.params.visit([&](const char* n, const Mat& m) { detail::write_tensor(out, n, m); });
  ck.adam.m.visit([&](const char* n, const Mat& m) { detail::write_tensor(out, std::string("adam_m/") + n, m); });
  ck.adam.v.visit([&](const char* n, const Mat& m) { detail::write_tensor(out, std::string("adam_v/") + n, m); });
  if (!out) throw std::runtime_error("write failure on checkpoint: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  if (detail::read_u32(in) != kCheckpointVersion) throw std::runtime_error("unsupported checkpoint version");
  const std::uint32_t cfg_len = detail::read_u32(in);
  std::string cfg_text(cfg_len, '\0');
  if (!in.read(cfg_text.data(), cfg_len)) throw std::runtime_error("truncated checkpoint");
  Checkpoint ck;
  ck.config = config_from_text(cfg_text);
  ck.step = detail::read_u32(in);
  const long adam_step = detail::read_u32(in);
  ck.params = init_params(ck.config);  // allocate shapes
  ck.adam = make_adam_state(ck.params);
  ck.adam.step = adam_step;
  std::map<std::string, Mat> tensors;
  while (in.peek() != EOF) {
    auto [name, m] = detail::read_tensor(in);
    tensors[name] = std::move(m);
  }
  const auto fill = [&](PtrNetParams& dst, const std::string& prefix) {
    dst.visit([&](const char* n, Mat& m) {
      const auto it = tensors.find(prefix + n);
      if (it == tensors.end()) throw std::runtime_error("checkpoint missing tensor " + prefix + n);
      if (it->second.rows() != m.rows() || it->second.cols() != m.cols())
        throw std::runtime_error("checkpoint tensor shape mismatch for " + prefix + n);
      m = it->second;
    });
  };
  fill(ck.params, "");
  fill(ck.adam.m, "adam_m/");
  fill(ck.adam.v, "adam_v/");
  return ck;
}

}  // namespace roomcloud
