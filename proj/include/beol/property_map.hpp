#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "beol/gdsii.hpp"
#include "beol/homogenize.hpp"

namespace beol {

// Regular grid of homogenized properties over a die, with bilinear
// interpolation between cell centers (clamped outside the center lattice).
struct PropertyMap {
  int nx = 0, ny = 0;
  Vec2 die_origin, die_size;  // m
  double rve_size = 0;        // m
  std::vector<double> dt_list;

  struct Entry {
    bool ok = false;
    std::string fail_reason;
    HomogenizedProps props;
  };
  std::vector<Entry> entries;  // row-major, x fastest

  Vec2 cell_center(int i, int j) const;
  const Entry& entry(int i, int j) const { return entries[j * nx + i]; }

  HomogenizedProps interpolate(Vec2 p) const;
  // Steady tensor when dt is empty; otherwise the tensor for that timestep
  // (KeyError when dt is not tabulated).
  Mat3 kappa(Vec2 p, std::optional<double> dt) const;
  double rho_cp(Vec2 p) const;
};

struct BuildMapConfig {
  int threads = 1;
  double voxel_xy = 1e-7;              // 0.1 um default in-plane voxel
  double voxel_z = 0;                  // 0 -> default_dz(stack)
  std::optional<Window> die;           // default: bounding box of the layout
};

PropertyMap build_map(const LayoutDatabase& db, const TechStack& stack,
                      const std::string& top_cell, int nx, int ny,
                      double rve_size, const std::vector<double>& dt_list,
                      const BuildMapConfig& config = {});

// Flattens every tech layer of the stack once; shared by map building and
// single-window homogenization.
std::vector<LayerSlice> flatten_stack(const LayoutDatabase& db,
                                      const TechStack& stack,
                                      const std::string& top_cell);

// Clips pre-flattened slices to a window and voxelizes them.
MaterialGrid window_grid(const std::vector<LayerSlice>& slices,
                         const TechStack& stack, const Window& w,
                         double voxel_xy, double voxel_z);

// CSV persistence, lossless at 17 significant digits. `header_extra` lines
// are embedded as leading comments.
void write_map(const PropertyMap& map, std::ostream& out,
               const std::vector<std::string>& header_extra = {});
void write_map_file(const PropertyMap& map, const std::string& path,
                    const std::vector<std::string>& header_extra = {});
PropertyMap read_map(std::istream& in);
PropertyMap read_map_file(const std::string& path);

}  // namespace beol
