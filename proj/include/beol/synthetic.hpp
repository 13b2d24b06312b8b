#pragma once

#include <cstdint>
#include <string>

#include "beol/gdsii.hpp"
#include "beol/macro.hpp"
#include "beol/material.hpp"

namespace beol::synthetic {

// Nine-layer Al/W/SiO2 interconnect stack, 5.4 um thick, metal layers on
// GDS layers 1,3,5,7,9 and via layers on 2,4,6,8.
std::string tech_json();
TechStack tech();

// Deterministic 50x50 um Manhattan test layout on the tech_json() layers:
// alternating-direction metal stripes plus via arrays placed through SREF,
// SREF-of-SREF and 4x4 AREF hierarchy. Geometry snapped to a 0.5 um grid.
LayoutDatabase validation_layout(std::uint64_t seed = 1);

// A library with one empty top cell (no geometry on any layer).
LayoutDatabase blank_layout();

// Random hierarchical layout for parser round-trip exercises: rectilinear
// boundaries, rotated/mirrored SREFs, nested references three deep, and an
// AREF whose size cycles up to 4x4 with the seed.
LayoutDatabase random_fixture(std::uint64_t seed);

// Hotspot-style surface flux map with a uniform background and a few
// higher-power rectangular blocks; mean magnitude around `base` W/m^2.
FluxMap demo_flux_map(int nx = 10, int ny = 10, double base = 1e6,
                      std::uint64_t seed = 7);

}  // namespace beol::synthetic
