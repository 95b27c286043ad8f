#pragma once

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "vhrec/mesh.hpp"
#include "vhrec/pointcloud.hpp"

namespace vhrec {

inline void write_obj(const TriangleMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << std::setprecision(17);
  for (const Vec3& v : mesh.vertices) out << "v " << v.x << ' ' << v.y << ' ' << v.z << '\n';
  for (const auto& t : mesh.triangles)
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline TriangleMesh read_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  TriangleMesh mesh;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      Vec3 v;
      ls >> v.x >> v.y >> v.z;
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        // face tokens may be "i", "i/t" or "i/t/n"; only the vertex index is kept
        idx.push_back(std::stoi(tok.substr(0, tok.find('/'))) - 1);
      }
      for (size_t k = 2; k < idx.size(); ++k)
        mesh.triangles.push_back({idx[0], idx[(int)k - 1], idx[(int)k]});
    }
  }
  mesh.validate();
  return mesh;
}

inline void write_stl(const TriangleMesh& mesh, const std::string& path,
                      const std::string& name = "mesh") {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << std::setprecision(17);
  out << "solid " << name << '\n';
  for (int t = 0; t < (int)mesh.triangles.size(); ++t) {
    Vec3 n = mesh.face_normal_raw(t);
    const double len = norm(n);
    n = len > 0 ? n / len : Vec3{0, 0, 0};
    out << "  facet normal " << n.x << ' ' << n.y << ' ' << n.z << '\n';
    out << "    outer loop\n";
    for (int k = 0; k < 3; ++k) {
      const Vec3& v = mesh.vertices[mesh.triangles[t][k]];
      out << "      vertex " << v.x << ' ' << v.y << ' ' << v.z << '\n';
    }
    out << "    endloop\n  endfacet\n";
  }
  out << "endsolid " << name << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

// ASCII STL carries no shared indexing; vertices are welded by exact
// coordinate match on read.
inline TriangleMesh read_stl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string tok;
  in >> tok;
  if (tok != "solid") throw std::runtime_error("not an ASCII STL: " + path);
  TriangleMesh mesh;
  std::map<std::array<double, 3>, int> seen;
  auto vertex_index = [&](const Vec3& v) {
    const std::array<double, 3> key{v.x, v.y, v.z};
    auto it = seen.find(key);
    if (it != seen.end()) return it->second;
    const int idx = (int)mesh.vertices.size();
    mesh.vertices.push_back(v);
    seen.emplace(key, idx);
    return idx;
  };
  std::string line;
  std::getline(in, line);  // rest of the solid line
  std::array<int, 3> tri;
  int corner = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    ls >> tok;
    if (tok == "vertex") {
      Vec3 v;
      ls >> v.x >> v.y >> v.z;
      tri[corner++] = vertex_index(v);
      if (corner == 3) {
        mesh.triangles.push_back(tri);
        corner = 0;
      }
    }
  }
  return mesh;
}

// ASCII PLY, properties x y z nx ny nz. Clouds without normals get zero
// normal columns on write and come back normal-free.
inline void write_ply(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << std::setprecision(17);
  out << "ply\nformat ascii 1.0\n";
  out << "comment visual " << cloud.count(PointSource::Visual) << " haptic "
      << cloud.count(PointSource::Haptic) << '\n';
  out << "element vertex " << cloud.size() << '\n';
  for (const char* p : {"x", "y", "z", "nx", "ny", "nz"}) out << "property double " << p << '\n';
  out << "end_header\n";
  for (size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    const Vec3 n = cloud.has_normals() ? cloud.normals[i] : Vec3{0, 0, 0};
    out << p.x << ' ' << p.y << ' ' << p.z << ' ' << n.x << ' ' << n.y << ' ' << n.z << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline PointCloud read_ply(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  std::getline(in, line);
  if (line != "ply") throw std::runtime_error("not a PLY file: " + path);
  size_t count = 0;
  int prop_count = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "element") {
      std::string what;
      ls >> what >> count;
      if (what != "vertex") throw std::runtime_error("unsupported PLY element: " + what);
    } else if (tag == "property") {
      ++prop_count;
    } else if (tag == "end_header") {
      break;
    }
  }
  if (prop_count < 3) throw std::runtime_error("PLY needs at least x y z: " + path);
  PointCloud cloud;
  bool any_normal = false;
  for (size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("truncated PLY: " + path);
    std::istringstream ls(line);
    Vec3 p, n;
    ls >> p.x >> p.y >> p.z;
    if (prop_count >= 6) ls >> n.x >> n.y >> n.z;
    cloud.points.push_back(p);
    cloud.normals.push_back(n);
    cloud.sources.push_back(PointSource::Visual);
    if (norm_sq(n) > 0) any_normal = true;
  }
  if (!any_normal) cloud.normals.clear();
  return cloud;
}

}  // namespace vhrec
