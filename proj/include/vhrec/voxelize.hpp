#pragma once

#include "vhrec/bvh.hpp"
#include "vhrec/voxelgrid.hpp"

namespace vhrec {

// Occupancy by ray-crossing parity at voxel centers. A fixed slightly tilted
// ray direction avoids axis-aligned grazing against structured meshes.
// strict = true rejects non-watertight meshes; tolerant mode still applies
// the parity rule, which degrades gracefully on meshes with a few open edges.
inline VoxelGrid voxelize(const TriangleMesh& mesh, const Aabb& bbox, int resolution = 40,
                          bool strict = true) {
  if (strict) {
    const int open = mesh.open_edge_count();
    if (open != 0)
      throw std::invalid_argument("voxelize: mesh is not watertight (" + std::to_string(open) +
                                  " open edges)");
  }
  VoxelGrid grid = VoxelGrid::from_bbox(bbox, resolution);
  if (mesh.empty()) return grid;
  const Bvh bvh(mesh);
  const Vec3 dir = normalized(Vec3{1.0, 0.5347238912e-3, 0.7912384571e-3});
  for (int ix = 0; ix < resolution; ++ix)
    for (int iy = 0; iy < resolution; ++iy)
      for (int iz = 0; iz < resolution; ++iz) {
        const Vec3 c = grid.center(ix, iy, iz);
        if (bvh.count_crossings(c, dir) % 2 == 1) grid.values[grid.index(ix, iy, iz)] = 1.0;
      }
  return grid;
}

// Linear indices of occupied voxels that touch free space via a 6-neighbor
// (or the grid boundary).
inline std::vector<int> surface_shell(const VoxelGrid& grid) {
  std::vector<int> shell;
  const int off[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  for (int ix = 0; ix < grid.dims[0]; ++ix)
    for (int iy = 0; iy < grid.dims[1]; ++iy)
      for (int iz = 0; iz < grid.dims[2]; ++iz) {
        if (grid.values[grid.index(ix, iy, iz)] == 0.0) continue;
        for (const auto& d : off) {
          const int jx = ix + d[0], jy = iy + d[1], jz = iz + d[2];
          if (!grid.in_range(jx, jy, jz) || grid.values[grid.index(jx, jy, jz)] == 0.0) {
            shell.push_back(grid.index(ix, iy, iz));
            break;
          }
        }
      }
  return shell;
}

}  // namespace vhrec
