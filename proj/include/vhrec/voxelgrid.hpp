#pragma once

#include <cstring>
#include <fstream>

#include "vhrec/core.hpp"

namespace vhrec {

// Axis-aligned scalar lattice. Values are stored x-major:
// index = (ix * ny + iy) * nz + iz.
struct VoxelGrid {
  Vec3 origin;              // corner of voxel (0,0,0)
  double voxel_edge = 0.0;
  std::array<int, 3> dims{0, 0, 0};
  std::vector<double> values;

  VoxelGrid() = default;
  VoxelGrid(const Vec3& origin_, double edge, std::array<int, 3> dims_)
      : origin(origin_), voxel_edge(edge), dims(dims_) {
    if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1)
      throw std::invalid_argument("voxel grid dims must be >= 1");
    values.assign((size_t)dims[0] * dims[1] * dims[2], 0.0);
  }

  static VoxelGrid from_bbox(const Aabb& box, int resolution) {
    if (resolution < 1) throw std::invalid_argument("resolution must be >= 1");
    const double edge = box.longest_extent() / resolution;
    return VoxelGrid(box.lo, edge, {resolution, resolution, resolution});
  }

  size_t cell_count() const { return values.size(); }

  int index(int ix, int iy, int iz) const { return (ix * dims[1] + iy) * dims[2] + iz; }

  std::array<int, 3> coords(int linear) const {
    const int iz = linear % dims[2];
    const int iy = (linear / dims[2]) % dims[1];
    const int ix = linear / (dims[1] * dims[2]);
    return {ix, iy, iz};
  }

  bool in_range(int ix, int iy, int iz) const {
    return ix >= 0 && iy >= 0 && iz >= 0 && ix < dims[0] && iy < dims[1] && iz < dims[2];
  }

  Vec3 center(int ix, int iy, int iz) const {
    return origin + Vec3{(ix + 0.5) * voxel_edge, (iy + 0.5) * voxel_edge, (iz + 0.5) * voxel_edge};
  }
  Vec3 center(int linear) const {
    const auto c = coords(linear);
    return center(c[0], c[1], c[2]);
  }

  Aabb bbox() const {
    return {origin, origin + Vec3{dims[0] * voxel_edge, dims[1] * voxel_edge, dims[2] * voxel_edge}};
  }

  bool same_lattice(const VoxelGrid& o, double tol = 1e-12) const {
    return dims == o.dims && std::abs(voxel_edge - o.voxel_edge) <= tol &&
           norm(origin - o.origin) <= tol;
  }

  size_t count_occupied() const {
    size_t n = 0;
    for (double v : values)
      if (v != 0.0) ++n;
    return n;
  }
};

// Flat binary grid format. 40-byte header:
//   bytes  0..7   magic "AVGRID01"
//   bytes  8..19  dims, 3x uint32 little-endian
//   bytes 20..31  origin, 3x float32
//   bytes 32..35  voxel_edge, float32
//   bytes 36..39  value kind, uint32 (0 generic, 1 occupancy, 2 variance)
// followed by dims[0]*dims[1]*dims[2] float32 values, x-major.
enum class GridKind : uint32_t { Generic = 0, Occupancy = 1, Variance = 2 };

inline void write_avgrid(const VoxelGrid& grid, const std::string& path,
                         GridKind kind = GridKind::Generic) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  char header[40];
  std::memcpy(header, "AVGRID01", 8);
  uint32_t d[3] = {(uint32_t)grid.dims[0], (uint32_t)grid.dims[1], (uint32_t)grid.dims[2]};
  std::memcpy(header + 8, d, 12);
  float o[3] = {(float)grid.origin.x, (float)grid.origin.y, (float)grid.origin.z};
  std::memcpy(header + 20, o, 12);
  float edge = (float)grid.voxel_edge;
  std::memcpy(header + 32, &edge, 4);
  uint32_t k = (uint32_t)kind;
  std::memcpy(header + 36, &k, 4);
  out.write(header, sizeof(header));
  std::vector<float> vals(grid.values.begin(), grid.values.end());
  out.write(reinterpret_cast<const char*>(vals.data()), vals.size() * sizeof(float));
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline VoxelGrid read_avgrid(const std::string& path, GridKind* kind_out = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  char header[40];
  in.read(header, sizeof(header));
  if (!in || std::memcmp(header, "AVGRID01", 8) != 0)
    throw std::runtime_error("not an AVGRID01 file: " + path);
  uint32_t d[3];
  std::memcpy(d, header + 8, 12);
  float o[3], edge;
  std::memcpy(o, header + 20, 12);
  std::memcpy(&edge, header + 32, 4);
  uint32_t kind;
  std::memcpy(&kind, header + 36, 4);
  VoxelGrid grid(Vec3{o[0], o[1], o[2]}, edge, {(int)d[0], (int)d[1], (int)d[2]});
  std::vector<float> vals(grid.cell_count());
  in.read(reinterpret_cast<char*>(vals.data()), vals.size() * sizeof(float));
  if (!in) throw std::runtime_error("truncated AVGRID01 file: " + path);
  std::copy(vals.begin(), vals.end(), grid.values.begin());
  if (kind_out) *kind_out = (GridKind)kind;
  return grid;
}

}  // namespace vhrec
