#include "beol/material.hpp"

#include <fstream>
#include <sstream>

#include "beol/errors.hpp"
#include "json.hpp"

namespace beol {

int TechStack::material_index(const std::string& name) const {
  for (std::size_t i = 0; i < material_names.size(); ++i)
    if (material_names[i] == name) return static_cast<int>(i);
  return -1;
}

TechStack parse_tech_stack(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("tech stack is not valid JSON: ") + e.what());
  }
  constexpr double um = 1e-6;
  TechStack ts;
  try {
    if (j.value("units", "um") != "um")
      throw SchemaError("tech stack units must be \"um\"");
    ts.total_thickness = j.at("total_thickness").get<double>() * um;
    for (auto& [name, m] : j.at("materials").items()) {
      Material mat;
      mat.kappa = m.at("kappa").get<double>();
      mat.rho = m.at("rho_g_cm3").get<double>() * 1000.0;  // g/cm^3 -> kg/m^3
      mat.cp = m.at("cp").get<double>();
      if (!(mat.kappa > 0) || !(mat.rho > 0) || !(mat.cp > 0))
        throw SchemaError("material \"" + name + "\" has a nonpositive property");
      ts.material_names.push_back(name);
      ts.materials.push_back(mat);
    }
    const std::string bg = j.at("background").get<std::string>();
    ts.background_material_id = ts.material_index(bg);
    if (ts.background_material_id < 0)
      throw SchemaError("background material \"" + bg + "\" not declared");
    for (const auto& l : j.value("layers", nlohmann::json::array())) {
      TechLayer layer;
      layer.name = l.at("name").get<std::string>();
      layer.gds_layer = l.at("gds_layer").get<int>();
      layer.gds_datatype = l.at("gds_datatype").get<int>();
      layer.z_bottom = l.at("z_bottom").get<double>() * um;
      layer.thickness = l.at("thickness").get<double>() * um;
      const std::string mat = l.at("material").get<std::string>();
      layer.material_id = ts.material_index(mat);
      if (layer.material_id < 0)
        throw SchemaError("layer \"" + layer.name + "\" references undeclared material \"" + mat + "\"");
      if (!(layer.thickness > 0))
        throw SchemaError("layer \"" + layer.name + "\" has nonpositive thickness");
      ts.layers.push_back(layer);
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("tech stack schema violation: ") + e.what());
  }
  double zmax = 0;
  for (const auto& l : ts.layers) zmax = std::max(zmax, l.z_bottom + l.thickness);
  if (ts.total_thickness + 1e-12 < zmax)
    throw SchemaError("total_thickness smaller than the top of the layer stack");
  return ts;
}

TechStack parse_tech_stack_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open tech stack file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_tech_stack(ss.str());
}

}  // namespace beol
