#include "beol/synthetic.hpp"

#include <algorithm>
#include <random>

namespace beol::synthetic {

namespace {

Boundary rect(int layer, int x0, int y0, int x1, int y1) {
  Boundary b;
  b.layer = layer;
  b.vertices = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};  // CCW
  return b;
}

using Rng = std::mt19937_64;

int snapped(Rng& rng, int lo, int hi, int grid) {
  std::uniform_int_distribution<int> d(lo / grid, hi / grid);
  return d(rng) * grid;
}

}  // namespace

std::string tech_json() {
  return R"({
  "units": "um",
  "total_thickness": 5.4,
  "background": "SiO2",
  "materials": {
    "Al":   {"kappa": 174.0,  "rho_g_cm3": 2.70,  "cp": 900.0},
    "W":    {"kappa": 62.0,   "rho_g_cm3": 19.25, "cp": 134.0},
    "SiO2": {"kappa": 1.07,   "rho_g_cm3": 2.20,  "cp": 1000.0}
  },
  "layers": [
    {"name": "M1", "gds_layer": 1, "gds_datatype": 0, "z_bottom": 0.0, "thickness": 0.3, "material": "Al"},
    {"name": "V1", "gds_layer": 2, "gds_datatype": 0, "z_bottom": 0.3, "thickness": 0.3, "material": "W"},
    {"name": "M2", "gds_layer": 3, "gds_datatype": 0, "z_bottom": 0.6, "thickness": 0.3, "material": "Al"},
    {"name": "V2", "gds_layer": 4, "gds_datatype": 0, "z_bottom": 0.9, "thickness": 0.3, "material": "W"},
    {"name": "M3", "gds_layer": 5, "gds_datatype": 0, "z_bottom": 1.2, "thickness": 0.6, "material": "Al"},
    {"name": "V3", "gds_layer": 6, "gds_datatype": 0, "z_bottom": 1.8, "thickness": 0.6, "material": "W"},
    {"name": "M4", "gds_layer": 7, "gds_datatype": 0, "z_bottom": 2.4, "thickness": 0.9, "material": "Al"},
    {"name": "V4", "gds_layer": 8, "gds_datatype": 0, "z_bottom": 3.3, "thickness": 0.9, "material": "W"},
    {"name": "M5", "gds_layer": 9, "gds_datatype": 0, "z_bottom": 4.2, "thickness": 1.2, "material": "Al"}
  ]
})";
}

TechStack tech() { return parse_tech_stack(tech_json()); }

LayoutDatabase validation_layout(std::uint64_t seed) {
  // All coordinates in nm, snapped to 500 nm so a 0.5 um voxel grid
  // resolves the geometry exactly. Window: [0, 50000]^2.
  constexpr int kSpan = 50000, kGrid = 500, kVia = 500;
  Rng rng(seed);

  LayoutDatabase db;
  db.library_name = "SYNTH50";
  db.unit_user = 1e-6;
  db.unit_db = 1e-9;

  const int via_layers[4] = {2, 4, 6, 8};
  for (int v = 0; v < 4; ++v) {
    Cell cut;
    cut.name = "VIACUT" + std::to_string(v + 1);
    cut.boundaries.push_back(rect(via_layers[v], 0, 0, kVia, kVia));
    db.cells.push_back(cut);
  }
  for (int v = 0; v < 4; ++v) {
    Cell pair;  // two cuts side by side; TOP -> VIAPAIR -> VIACUT is depth 3
    pair.name = "VIAPAIR" + std::to_string(v + 1);
    pair.srefs.push_back({"VIACUT" + std::to_string(v + 1), {0, 0}});
    pair.srefs.push_back({"VIACUT" + std::to_string(v + 1), {1000, 0}});
    db.cells.push_back(pair);
  }

  Cell top;
  top.name = "TOP";
  const int metal_layers[5] = {1, 3, 5, 7, 9};
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int m = 0; m < 5; ++m) {
    const bool horizontal = (m % 2) == 0;
    const int pitch = 2000, width = 1000;
    for (int track = 0; track * pitch + width <= kSpan; ++track) {
      if (u01(rng) > 0.75) continue;
      const int lo = track * pitch;
      const int a0 = snapped(rng, 0, kSpan / 2, kGrid);
      const int a1 = std::min(kSpan, a0 + snapped(rng, 15000, kSpan, kGrid));
      if (a1 - a0 < 5000) continue;
      top.boundaries.push_back(horizontal
                                   ? rect(metal_layers[m], a0, lo, a1, lo + width)
                                   : rect(metal_layers[m], lo, a0, lo + width, a1));
    }
  }
  for (int v = 0; v < 4; ++v) {
    const std::string cut = "VIACUT" + std::to_string(v + 1);
    for (int n = 0; n < 8; ++n) {  // 4x4 via farms
      const int x = snapped(rng, 0, kSpan - 4000, kGrid);
      const int y = snapped(rng, 0, kSpan - 4000, kGrid);
      Aref a;
      a.cell = cut;
      a.origin = {x, y};
      a.cols = 4;
      a.rows = 4;
      a.col_pitch = {1000, 0};
      a.row_pitch = {0, 1000};
      top.arefs.push_back(a);
    }
    for (int n = 0; n < 12; ++n) {  // scattered pairs
      const int x = snapped(rng, 0, kSpan - 2000, kGrid);
      const int y = snapped(rng, 0, kSpan - 1000, kGrid);
      top.srefs.push_back({"VIAPAIR" + std::to_string(v + 1), {x, y}});
    }
  }
  db.cells.push_back(std::move(top));
  return db;
}

LayoutDatabase blank_layout() {
  LayoutDatabase db;
  db.library_name = "BLANK";
  db.unit_user = 1e-6;
  db.unit_db = 1e-9;
  db.cells.push_back(Cell{"TOP", {}, {}, {}});
  return db;
}

LayoutDatabase random_fixture(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<int> coord(-50000, 50000);
  std::uniform_int_distribution<int> span(100, 20000);
  std::uniform_int_distribution<int> layer(0, 63);
  std::uniform_int_distribution<int> nquad(0, 3);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  auto random_boundary = [&]() {
    const int x0 = coord(rng), y0 = coord(rng);
    const int w = span(rng), h = span(rng);
    Boundary b = rect(layer(rng), x0, y0, x0 + w, y0 + h);
    b.datatype = nquad(rng);
    if (u01(rng) < 0.4) {
      // notch one corner -> rectilinear L shape, still simple and CCW
      const int nw = std::max(50, w / 3), nh = std::max(50, h / 3);
      b.vertices = {{x0, y0},          {x0 + w, y0},      {x0 + w, y0 + h - nh},
                    {x0 + w - nw, y0 + h - nh}, {x0 + w - nw, y0 + h}, {x0, y0 + h}};
    }
    return b;
  };
  auto random_placement = [&](const std::string& target) {
    Sref s;
    s.cell = target;
    s.origin = {coord(rng), coord(rng)};
    s.rotation = 90.0 * nquad(rng);
    s.mirror_x = u01(rng) < 0.3;
    return s;
  };

  LayoutDatabase db;
  db.library_name = "FIX" + std::to_string(seed);
  db.unit_user = 1e-6;
  db.unit_db = 1e-9;

  Cell leaf;
  leaf.name = "LEAF";
  const int nb = 1 + static_cast<int>(seed % 4);
  for (int i = 0; i < nb; ++i) leaf.boundaries.push_back(random_boundary());

  Cell mid;
  mid.name = "MID";
  mid.boundaries.push_back(random_boundary());
  mid.srefs.push_back(random_placement("LEAF"));
  mid.srefs.push_back(random_placement("LEAF"));

  Cell top;
  top.name = "TOP";
  top.srefs.push_back(random_placement("MID"));  // TOP -> MID -> LEAF: depth 3
  if (u01(rng) < 0.5) top.boundaries.push_back(random_boundary());
  Aref arr;
  arr.cell = "LEAF";
  arr.origin = {coord(rng), coord(rng)};
  arr.rotation = 90.0 * nquad(rng);
  arr.mirror_x = u01(rng) < 0.3;
  arr.cols = 1 + static_cast<int>(seed % 4);  // hits 4x4 every fourth seed
  arr.rows = 1 + static_cast<int>((seed / 2) % 4);
  arr.col_pitch = {static_cast<double>(span(rng)), 0};
  arr.row_pitch = {0, static_cast<double>(span(rng))};
  top.arefs.push_back(arr);

  db.cells = {leaf, mid, top};
  return db;
}

FluxMap demo_flux_map(int nx, int ny, double base, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> jitter(0.8, 1.2);
  FluxMap f;
  f.nx = nx;
  f.ny = ny;
  f.q.assign(static_cast<std::size_t>(nx) * ny, 0.0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) f.q[j * nx + i] = 0.2 * base * jitter(rng);
  std::uniform_int_distribution<int> px(0, nx - 1), py(0, ny - 1);
  for (int h = 0; h < std::max(1, nx * ny / 20); ++h) {
    const int ci = px(rng), cj = py(rng);
    for (int j = std::max(0, cj - 1); j <= std::min(ny - 1, cj + 1); ++j)
      for (int i = std::max(0, ci - 1); i <= std::min(nx - 1, ci + 1); ++i)
        f.q[j * nx + i] += 2.0 * base * jitter(rng);
  }
  return f;
}

}  // namespace beol::synthetic
