#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "beol/errors.hpp"
#include "beol/material.hpp"
#include "beol/synthetic.hpp"

using namespace beol;

TEST_CASE("built-in stack parses to SI units") {
  const TechStack ts = synthetic::tech();
  CHECK(ts.layers.size() == 9);
  CHECK(ts.total_thickness == doctest::Approx(5.4e-6).epsilon(1e-12));

  const int al = ts.material_index("Al");
  const int w = ts.material_index("W");
  const int ox = ts.material_index("SiO2");
  REQUIRE(al >= 0);
  REQUIRE(w >= 0);
  REQUIRE(ox >= 0);
  CHECK(ts.materials[al].kappa == 174.0);
  CHECK(ts.materials[al].rho == doctest::Approx(2700.0));  // 2.70 g/cm^3
  CHECK(ts.materials[al].cp == 900.0);
  CHECK(ts.materials[w].kappa == 62.0);
  CHECK(ts.materials[w].rho == doctest::Approx(19250.0));
  CHECK(ts.materials[ox].rho_cp() == doctest::Approx(2.2e6));
  CHECK(ts.background().kappa == 1.07);
  CHECK(ts.background_material_id == ox);

  CHECK(ts.layers[0].name == "M1");
  CHECK(ts.layers[0].gds_layer == 1);
  CHECK(ts.layers[0].z_bottom == 0.0);
  CHECK(ts.layers[0].thickness == doctest::Approx(0.3e-6).epsilon(1e-12));
  CHECK(ts.layers[0].material_id == al);
  CHECK(ts.layers[8].z_bottom == doctest::Approx(4.2e-6).epsilon(1e-12));
  CHECK(ts.material_index("Cu") == -1);
}

TEST_CASE("schema violations") {
  CHECK_THROWS_AS(parse_tech_stack("not json"), SchemaError);
  CHECK_THROWS_AS(parse_tech_stack("{}"), SchemaError);  // missing keys

  const char* undeclared = R"({
    "units":"um","total_thickness":1.0,"background":"SiO2",
    "materials":{"SiO2":{"kappa":1.07,"rho_g_cm3":2.2,"cp":1000}},
    "layers":[{"name":"M1","gds_layer":1,"gds_datatype":0,
               "z_bottom":0.0,"thickness":0.5,"material":"Cu"}]})";
  CHECK_THROWS_AS(parse_tech_stack(undeclared), SchemaError);
  CHECK_THROWS_WITH_AS(parse_tech_stack(undeclared),
                       doctest::Contains("undeclared material \"Cu\""),
                       SchemaError);

  const char* zero_thickness = R"({
    "units":"um","total_thickness":1.0,"background":"SiO2",
    "materials":{"SiO2":{"kappa":1.07,"rho_g_cm3":2.2,"cp":1000}},
    "layers":[{"name":"M1","gds_layer":1,"gds_datatype":0,
               "z_bottom":0.0,"thickness":0.0,"material":"SiO2"}]})";
  CHECK_THROWS_AS(parse_tech_stack(zero_thickness), SchemaError);

  const char* wrong_units = R"({
    "units":"nm","total_thickness":1.0,"background":"SiO2",
    "materials":{"SiO2":{"kappa":1.07,"rho_g_cm3":2.2,"cp":1000}},
    "layers":[]})";
  CHECK_THROWS_AS(parse_tech_stack(wrong_units), SchemaError);

  const char* stack_overflows_total = R"({
    "units":"um","total_thickness":1.0,"background":"SiO2",
    "materials":{"SiO2":{"kappa":1.07,"rho_g_cm3":2.2,"cp":1000}},
    "layers":[{"name":"M1","gds_layer":1,"gds_datatype":0,
               "z_bottom":0.8,"thickness":0.5,"material":"SiO2"}]})";
  CHECK_THROWS_AS(parse_tech_stack(stack_overflows_total), SchemaError);

  const char* negative_kappa = R"({
    "units":"um","total_thickness":1.0,"background":"SiO2",
    "materials":{"SiO2":{"kappa":-1.0,"rho_g_cm3":2.2,"cp":1000}},
    "layers":[]})";
  CHECK_THROWS_AS(parse_tech_stack(negative_kappa), SchemaError);
}

TEST_CASE("missing file") {
  CHECK_THROWS_AS(parse_tech_stack_file("/nonexistent/tech.json"), SchemaError);
}
