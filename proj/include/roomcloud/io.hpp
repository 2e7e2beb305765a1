#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "roomcloud/geom.hpp"

namespace roomcloud {

// OBJ subset: `v x y z` and `f i j k` (1-based, triangles only). Other
// keywords and comments are ignored.
inline TriMesh read_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open OBJ file: " + path);
  TriMesh mesh;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Point3 p;
      if (!(ss >> p.x >> p.y >> p.z)) throw std::runtime_error("malformed vertex line: " + line);
      mesh.vertices.push_back(p);
    } else if (tag == "f") {
      std::array<int, 3> t;
      std::string tok;
      for (int i = 0; i < 3; ++i) {
        if (!(ss >> tok)) throw std::runtime_error("malformed face line: " + line);
        t[i] = std::stoi(tok.substr(0, tok.find('/'))) - 1;  // 1-based; strip /vt/vn
      }
      if (ss >> tok) throw std::runtime_error("non-triangle face: " + line);
      mesh.triangles.push_back(t);
    }
  }
  return mesh;
}

// ASCII point cloud, one `x y z` per line.
inline std::vector<Point3> read_xyz(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open point-cloud file: " + path);
  std::vector<Point3> pts;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    Point3 p;
    if (!(ss >> p.x >> p.y >> p.z)) throw std::runtime_error("malformed point line: " + line);
    pts.push_back(p);
  }
  return pts;
}

// PGM, 0 = background, 255 = set.
inline void write_pgm(const Mask& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write PGM file: " + path);
  out << "P5\n" << m.width() << " " << m.height() << "\n255\n";
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      out.put(m.at(x, y) ? static_cast<char>(255) : static_cast<char>(0));
}

inline Mask read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open PGM file: " + path);
  std::string magic;
  in >> magic;
  if (magic != "P2" && magic != "P5") throw std::runtime_error("not a PGM file: " + path);
  const auto next_token = [&in, &path]() {
    std::string tok;
    for (;;) {
      if (!(in >> tok)) throw std::runtime_error("truncated PGM file: " + path);
      if (tok[0] == '#') { std::string rest; std::getline(in, rest); continue; }
      return tok;
    }
  };
  const int w = std::stoi(next_token());
  const int h = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) throw std::runtime_error("bad PGM header: " + path);
  Mask m(w, h);
  if (magic == "P2") {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) m.set(x, y, std::stoi(next_token()) > maxval / 2);
  } else {
    in.get();  // single whitespace after maxval
    std::vector<char> row(w);
    for (int y = 0; y < h; ++y) {
      if (!in.read(row.data(), w)) throw std::runtime_error("truncated PGM data: " + path);
      for (int x = 0; x < w; ++x) m.set(x, y, static_cast<unsigned char>(row[x]) > maxval / 2);
    }
  }
  return m;
}

}  // namespace roomcloud
