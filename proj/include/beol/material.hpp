#pragma once

#include <string>
#include <vector>

#include "beol/geometry.hpp"

namespace beol {

// Isotropic thermal material. SI units throughout.
struct Material {
  double kappa = 0;  // W/(m*K)
  double rho = 0;    // kg/m^3
  double cp = 0;     // J/(kg*K)
  double rho_cp() const { return rho * cp; }
};

struct TechLayer {
  std::string name;
  int gds_layer = 0;
  int gds_datatype = 0;
  double z_bottom = 0;   // m
  double thickness = 0;  // m
  int material_id = 0;
};

// Ordered layer stack plus the material table. Layer order matters: later
// layers win when two claim the same voxel (vias listed after metals).
struct TechStack {
  std::vector<TechLayer> layers;
  std::vector<Material> materials;
  std::vector<std::string> material_names;
  int background_material_id = 0;
  double total_thickness = 0;  // m

  int material_index(const std::string& name) const;  // -1 if absent
  const Material& background() const { return materials[background_material_id]; }
};

// Parses the tech-stack JSON (lengths in um, density in g/cm^3) into SI.
TechStack parse_tech_stack(const std::string& json_text);
TechStack parse_tech_stack_file(const std::string& path);

}  // namespace beol
