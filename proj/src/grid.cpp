#include "beol/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>

#include "beol/errors.hpp"

namespace beol {

namespace {

int checked_count(double extent, double step, const char* what) {
  const double q = extent / step;
  const auto n = static_cast<int>(std::llround(q));
  if (n < 1 || std::abs(q - n) > 1e-6)
    throw ResolutionError(std::string(what) +
                          " is not an integer multiple of the resolution");
  return n;
}

// Marks voxel columns whose center lies inside the polygon (even-odd rule,
// half-open so shared edges never double-claim).
void rasterize(const Polygon& poly, const Window& w, int nx, int ny, double dx,
               double dy, std::vector<std::uint8_t>& mask) {
  std::vector<double> xs;
  for (int j = 0; j < ny; ++j) {
    const double yc = w.y_min + (j + 0.5) * dy;
    xs.clear();
    const std::size_t n = poly.size();
    for (std::size_t e = 0; e < n; ++e) {
      const Vec2 a = poly[e];
      const Vec2 b = poly[(e + 1) % n];
      if ((a.y <= yc) != (b.y <= yc))
        xs.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t s = 0; s + 1 < xs.size(); s += 2) {
      const double x0 = xs[s], x1 = xs[s + 1];
      int i = static_cast<int>(std::ceil((x0 - w.x_min) / dx - 0.5));
      i = std::max(i, 0);
      for (; i < nx; ++i) {
        const double xc = w.x_min + (i + 0.5) * dx;
        if (xc < x0) continue;
        if (xc >= x1) break;
        mask[static_cast<std::size_t>(j) * nx + i] = 1;
      }
    }
  }
}

}  // namespace

MaterialGrid voxelize(const std::vector<LayerSlice>& layers,
                      const TechStack& stack, const Window& w,
                      Vec3 resolution) {
  MaterialGrid g;
  g.dx = resolution.x;
  g.dy = resolution.y;
  g.dz = resolution.z;
  g.nx = checked_count(w.width(), g.dx, "window width");
  g.ny = checked_count(w.height(), g.dy, "window height");
  g.nz = checked_count(stack.total_thickness, g.dz, "total thickness");
  g.origin = {w.x_min, w.y_min, 0.0};
  g.materials = stack.materials;
  g.voxel_material.assign(static_cast<std::size_t>(g.voxel_count()),
                          stack.background_material_id);

  std::vector<std::uint8_t> mask;
  for (const LayerSlice& slice : layers) {
    mask.assign(static_cast<std::size_t>(g.nx) * g.ny, 0);
    for (const Polygon& p : slice.polys.polygons)
      rasterize(p, w, g.nx, g.ny, g.dx, g.dy, mask);
    const double z0 = slice.z_bottom;
    const double z1 = slice.z_bottom + slice.thickness;
    for (int k = 0; k < g.nz; ++k) {
      const double zc = (k + 0.5) * g.dz;
      if (zc < z0 || zc >= z1) continue;
      for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
          if (mask[static_cast<std::size_t>(j) * g.nx + i])
            g.voxel_material[g.vox(i, j, k)] = slice.material_id;
    }
  }
  return g;
}

double default_dz(const TechStack& stack) {
  auto nm = [](double z) { return std::llround(z * 1e9); }; // 1 nm granularity
  long long g = nm(stack.total_thickness);
  for (const TechLayer& l : stack.layers) {
    g = std::gcd(g, nm(l.z_bottom));
    g = std::gcd(g, nm(l.z_bottom + l.thickness));
  }
  if (g <= 0) g = nm(stack.total_thickness);
  long long planes = nm(stack.total_thickness) / g;
  if (planes > 400) {
    // layer boundaries too fine to honor exactly; centers still sample them
    g = nm(stack.total_thickness) / 360;
    while (nm(stack.total_thickness) % g != 0) ++g;
  }
  return static_cast<double>(g) * 1e-9;
}

MaterialGrid uniform_grid(const Material& m, int nx, int ny, int nz, double dx,
                          double dy, double dz) {
  MaterialGrid g;
  g.nx = nx;
  g.ny = ny;
  g.nz = nz;
  g.dx = dx;
  g.dy = dy;
  g.dz = dz;
  g.materials = {m};
  g.voxel_material.assign(static_cast<std::size_t>(g.voxel_count()), 0);
  return g;
}

double non_background_fraction(const MaterialGrid& grid, int background_id) {
  std::size_t covered = 0;
  for (int id : grid.voxel_material)
    if (id != background_id) ++covered;
  return static_cast<double>(covered) / static_cast<double>(grid.voxel_count());
}

void write_vtk_materials(const MaterialGrid& grid, const std::string& path) {
  std::ofstream out(path);
  out << "# vtk DataFile Version 3.0\nmaterial grid\nASCII\n"
      << "DATASET STRUCTURED_POINTS\n"
      << "DIMENSIONS " << grid.nx + 1 << ' ' << grid.ny + 1 << ' '
      << grid.nz + 1 << '\n'
      << "ORIGIN " << grid.origin.x << ' ' << grid.origin.y << ' '
      << grid.origin.z << '\n'
      << "SPACING " << grid.dx << ' ' << grid.dy << ' ' << grid.dz << '\n'
      << "CELL_DATA " << grid.voxel_count() << '\n'
      << "SCALARS material_id int 1\nLOOKUP_TABLE default\n";
  for (int id : grid.voxel_material) out << id << '\n';
}

}  // namespace beol
