#pragma once

#include <string>
#include <vector>

#include "beol/geometry.hpp"
#include "beol/material.hpp"

namespace beol {

// Uniform voxel grid over an extruded window, one material id per voxel.
struct MaterialGrid {
  int nx = 0, ny = 0, nz = 0;
  double dx = 0, dy = 0, dz = 0;  // m
  Vec3 origin;
  std::vector<int> voxel_material;  // nx*ny*nz, x fastest
  std::vector<Material> materials;

  int voxel_count() const { return nx * ny * nz; }
  int vox(int i, int j, int k) const { return i + nx * (j + ny * k); }
  const Material& mat(int i, int j, int k) const {
    return materials[voxel_material[vox(i, j, k)]];
  }
  Vec3 size() const { return {nx * dx, ny * dy, nz * dz}; }
  double volume() const { return nx * dx * ny * dy * nz * dz; }
  Vec3 centroid() const { return origin + size() * 0.5; }
  Vec3 voxel_center(int i, int j, int k) const {
    return {origin.x + (i + 0.5) * dx, origin.y + (j + 0.5) * dy,
            origin.z + (k + 0.5) * dz};
  }
};

// One flattened layer ready for extrusion.
struct LayerSlice {
  PolygonSet polys;
  double z_bottom = 0;   // m
  double thickness = 0;  // m
  int material_id = 0;
};

// Voxelizes the layer stack over a window by voxel-center sampling.
// Later slices win where two claim the same voxel. Unclaimed space gets the
// stack's background material.
MaterialGrid voxelize(const std::vector<LayerSlice>& layers,
                      const TechStack& stack, const Window& w,
                      Vec3 resolution);

// Largest dz such that every layer z boundary lands on a voxel plane
// (1 nm granularity), floored so nz stays below ~400 planes.
double default_dz(const TechStack& stack);

// Uniform single-material grid, handy for tests and reference solves.
MaterialGrid uniform_grid(const Material& m, int nx, int ny, int nz,
                          double dx, double dy, double dz);

// Fraction of voxels carrying a non-background material.
double non_background_fraction(const MaterialGrid& grid, int background_id);

void write_vtk_materials(const MaterialGrid& grid, const std::string& path);

}  // namespace beol
