// beol-homog: layout -> voxel RVE -> homogenized thermal properties -> die
// scale thermal simulation. Lengths on the command line are in micrometers,
// times in seconds; everything internal is SI.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "beol/errors.hpp"
#include "beol/gdsii.hpp"
#include "beol/homogenize.hpp"
#include "beol/macro.hpp"
#include "beol/material.hpp"
#include "beol/property_map.hpp"
#include "beol/synthetic.hpp"

namespace {

using beol::ConfigError;
using json = nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    const double v = std::stod(item, &pos);
    if (pos != item.size()) throw ConfigError("bad number in list: " + item);
    out.push_back(v);
  }
  return out;
}

beol::Window parse_window_um(const std::string& s) {
  const auto v = parse_list(s);
  if (v.size() != 4) throw ConfigError("--window expects x0,y0,x1,y1 in um");
  beol::Window w{v[0] * 1e-6, v[1] * 1e-6, v[2] * 1e-6, v[3] * 1e-6};
  if (!(w.width() > 0) || !(w.height() > 0))
    throw ConfigError("--window is empty or inverted");
  return w;
}

// Options shared by the layout-consuming subcommands.
struct LayoutArgs {
  std::string gds, tech, cell;
  std::uint64_t seed = 1;
  bool synthetic = false;
};

void add_layout_args(CLI::App* cmd, LayoutArgs& a) {
  cmd->add_option("--gds", a.gds, "GDSII input file")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  cmd->add_option("--tech", a.tech, "tech stack JSON (default: built-in stack)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  cmd->add_option("--cell", a.cell, "top cell (default: first unreferenced)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  cmd->add_option("--seed", a.seed, "seed for --synthetic layout generation")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  cmd->add_flag("--synthetic", a.synthetic,
                "use the built-in 50x50 um test layout instead of --gds");
}

beol::LayoutDatabase load_layout(const LayoutArgs& a) {
  if (a.synthetic) return beol::synthetic::validation_layout(a.seed);
  if (a.gds.empty()) throw ConfigError("either --gds or --synthetic is required");
  return beol::parse_gdsii_file(a.gds);
}

beol::TechStack load_tech(const LayoutArgs& a) {
  if (a.tech.empty()) return beol::synthetic::tech();
  return beol::parse_tech_stack_file(a.tech);
}

std::string pick_top_cell(const beol::LayoutDatabase& db,
                          const std::string& requested) {
  if (!requested.empty()) {
    if (db.cell_index(requested) < 0)
      throw ConfigError("cell not found: " + requested);
    return requested;
  }
  const auto tops = db.top_cells();
  if (tops.empty()) throw ConfigError("layout has no cells");
  return tops.front();
}

// Effective-parameter echo for output headers. Deliberately excludes
// --threads so worker count never changes output bytes.
std::string config_line(const std::string& cmd,
                        const std::vector<std::pair<std::string, std::string>>& kv) {
  std::string s = "config: " + cmd;
  for (const auto& [k, v] : kv) s += " " + k + "=" + v;
  return s;
}

int cmd_inspect(const std::string& path) {
  const beol::LayoutDatabase db = beol::parse_gdsii_file(path);
  std::cout << "library: " << db.library_name << "\n"
            << db.cells.size() << " cells\n";
  if (db.cells.empty()) return 0;
  const std::string top = db.top_cells().empty() ? db.cells.back().name
                                                 : db.top_cells().front();
  std::cout << "top cell: " << top << "\n";
  for (const beol::LayerKey key : beol::layer_keys(db)) {
    const beol::PolygonSet polys = beol::flatten_layer(db, top, key);
    if (polys.polygons.empty()) continue;
    double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
    for (const auto& poly : polys.polygons)
      for (const auto& p : poly) {
        x0 = std::min(x0, p.x);
        y0 = std::min(y0, p.y);
        x1 = std::max(x1, p.x);
        y1 = std::max(y1, p.y);
      }
    std::cout << "layer " << key.layer << "/" << key.datatype << ": "
              << polys.polygons.size() << " polygons, bbox um ["
              << fmt(x0 * 1e6) << ", " << fmt(y0 * 1e6) << "] - ["
              << fmt(x1 * 1e6) << ", " << fmt(y1 * 1e6) << "]\n";
  }
  return 0;
}

void write_heatmap(const std::string& path, const beol::PropertyMap& map,
                   const std::string& config,
                   const std::function<double(const beol::HomogenizedProps&)>& get) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "# " << config << "\n" << "x,y,value\n";
  for (int j = 0; j < map.ny; ++j)
    for (int i = 0; i < map.nx; ++i) {
      const beol::Vec2 c = map.cell_center(i, j);
      const auto& e = map.entry(i, j);
      out << fmt(c.x) << ',' << fmt(c.y) << ','
          << (e.ok ? fmt(get(e.props)) : "nan") << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);

  try {
    // --config JSON: values become defaults, explicit flags override them.
    std::string config_path;
    for (std::size_t i = 0; i < args.size();) {
      if (args[i] == "--config" && i + 1 < args.size()) {
        config_path = args[i + 1];
        args.erase(args.begin() + i, args.begin() + i + 2);
      } else if (args[i].rfind("--config=", 0) == 0) {
        config_path = args[i].substr(9);
        args.erase(args.begin() + i);
      } else {
        ++i;
      }
    }
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("cannot open config: " + config_path);
      json j;
      try {
        j = json::parse(in);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("bad config JSON: ") + e.what());
      }
      if (!j.is_object()) throw ConfigError("config must be a JSON object");
      // insert right after the subcommand so command-line flags win
      std::size_t at = 0;
      while (at < args.size() && !args[at].empty() && args[at][0] == '-') ++at;
      if (at < args.size()) ++at;
      std::vector<std::string> extra;
      for (const auto& [k, v] : j.items()) {
        if (v.is_boolean()) {
          if (v.get<bool>()) extra.push_back("--" + k);
        } else if (v.is_string()) {
          extra.push_back("--" + k);
          extra.push_back(v.get<std::string>());
        } else if (v.is_number()) {
          extra.push_back("--" + k);
          extra.push_back(fmt(v.get<double>()));
        } else if (v.is_array()) {
          std::string joined;
          for (const auto& e : v)
            joined += (joined.empty() ? "" : ",") +
                      (e.is_string() ? e.get<std::string>() : fmt(e.get<double>()));
          extra.push_back("--" + k);
          extra.push_back(joined);
        } else {
          throw ConfigError("unsupported config value for key: " + k);
        }
      }
      args.insert(args.begin() + at, extra.begin(), extra.end());
    }

    CLI::App app{
        "Thermal homogenization of chip interconnect stacks: GDSII + tech "
        "stack -> effective-property maps -> die-scale thermal simulation"};
    app.require_subcommand(1);
    int threads = 1;
    app.add_option("--threads", threads, "worker threads")
        ->envname("BEOL_HOMOG_THREADS")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    // inspect
    auto* c_inspect = app.add_subcommand("inspect", "summarize a GDSII file");
    std::string inspect_path;
    c_inspect->add_option("gds", inspect_path, "GDSII file")->required();

    // homogenize
    auto* c_hom = app.add_subcommand(
        "homogenize", "homogenize one window of the layout into effective "
                      "properties");
    LayoutArgs hom_layout;
    add_layout_args(c_hom, hom_layout);
    std::string hom_window, hom_dt, hom_out;
    double hom_voxel_xy = 0.1, hom_voxel_z = 0;
    c_hom->add_option("--window", hom_window, "RVE window x0,y0,x1,y1 (um)")
        ->required()
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_hom->add_option("--dt", hom_dt, "comma list of timesteps (s)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_hom->add_option("--voxel-xy", hom_voxel_xy, "in-plane voxel size (um)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_hom->add_option("--voxel-z", hom_voxel_z,
                      "vertical voxel size (um), 0 = derived from the stack")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_hom->add_option("--out", hom_out, "write the result as JSON")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    // map
    auto* c_map = app.add_subcommand(
        "map", "build a property map over the die and per-component heatmaps");
    LayoutArgs map_layout;
    add_layout_args(c_map, map_layout);
    int map_nx = 10, map_ny = 10;
    double map_rve = 10.0, map_voxel_xy = 0.1, map_voxel_z = 0;
    std::string map_dt, map_die, map_out;
    c_map->add_option("--nx", map_nx, "map cells in x")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_map->add_option("--ny", map_ny, "map cells in y")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_map->add_option("--rve-size", map_rve, "RVE edge length (um)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_map->add_option("--dt", map_dt, "comma list of timesteps (s)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_map->add_option("--die", map_die,
                      "die window x0,y0,x1,y1 (um); default: layout bbox")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_map->add_option("--voxel-xy", map_voxel_xy, "in-plane voxel size (um)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_map->add_option("--voxel-z", map_voxel_z, "vertical voxel size (um)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_map->add_option("--out", map_out, "output map CSV path")
        ->required()
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    // ramp
    auto* c_ramp = app.add_subcommand(
        "ramp", "single-RVE ramp study: homogenized vs naive vs steady flux");
    LayoutArgs ramp_layout;
    add_layout_args(c_ramp, ramp_layout);
    std::string ramp_window, ramp_out;
    double ramp_tl = 5e-4, ramp_dt = 0, ramp_tend = 0, ramp_dT = 1.0;
    double ramp_voxel_xy = 0.5, ramp_voxel_z = 0;
    c_ramp->add_option("--window", ramp_window, "RVE window x0,y0,x1,y1 (um)")
        ->required()
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_ramp->add_option("--t-ramp", ramp_tl, "ramp duration (s)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_ramp->add_option("--dt", ramp_dt, "timestep (s), default t-ramp/50")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_ramp->add_option("--t-end", ramp_tend, "end time (s), default 2*t-ramp")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_ramp->add_option("--dT", ramp_dT,
                       "through-thickness temperature difference (K)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_ramp->add_option("--voxel-xy", ramp_voxel_xy, "in-plane voxel size (um)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_ramp->add_option("--voxel-z", ramp_voxel_z, "vertical voxel size (um)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_ramp->add_option("--out", ramp_out, "output CSV path")
        ->required()
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    // simulate
    auto* c_sim = app.add_subcommand(
        "simulate", "die-scale transient solve from a property map or a "
                    "uniform material");
    std::string sim_map, sim_tech, sim_fluxmap, sim_out, sim_top_temp;
    int sim_nx = 20, sim_ny = 20, sim_nz = 6;
    double sim_thickness = 0, sim_flux = 0, sim_htc = 1e5, sim_tamb = 300;
    double sim_dt = 1e-3, sim_tend = 0.1, sim_t0 = 300, sim_map_dt = -1;
    bool sim_steady = false;
    c_sim->add_option("--map", sim_map, "property map CSV (map mode)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_sim->add_option("--tech", sim_tech,
                      "tech JSON for uniform background mode / thickness")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_sim->add_option("--thickness", sim_thickness,
                      "slab thickness (um), default from tech stack")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_sim->add_option("--nx", sim_nx, "mesh elements in x")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_sim->add_option("--ny", sim_ny, "mesh elements in y")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_sim->add_option("--nz", sim_nz, "mesh elements in z")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_sim->add_option("--flux", sim_flux, "uniform bottom heat flux (W/m^2)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_sim->add_option("--flux-map", sim_fluxmap, "bottom flux map CSV")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_sim->add_option("--htc", sim_htc, "top film coefficient (W/(m^2 K))")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_sim->add_option("--t-amb", sim_tamb, "top ambient temperature (K)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_sim->add_option("--top-temp", sim_top_temp,
                      "fixed top temperature (K); replaces the Robin top")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_sim->add_option("--dt", sim_dt, "timestep (s)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_sim->add_option("--t-end", sim_tend, "end time (s)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_sim->add_option("--t0", sim_t0, "initial temperature (K)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_sim->add_option("--map-dt", sim_map_dt,
                      "use the transient tensor tabulated for this dt (s)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_sim->add_flag("--steady", sim_steady, "also emit the steady solution");
    c_sim->add_option("--out", sim_out, "output stem")
        ->required()
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    // validate
    auto* c_val = app.add_subcommand(
        "validate",
        "fully resolved reference vs homogenized models on one window");
    LayoutArgs val_layout;
    add_layout_args(c_val, val_layout);
    std::string val_window = "0,0,50,50", val_sizes = "5,10,15", val_out;
    double val_voxel_xy = 0.5, val_voxel_z = 0;
    c_val->add_option("--window", val_window, "window x0,y0,x1,y1 (um)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_val->add_option("--rve-sizes", val_sizes, "comma list of RVE sizes (um)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_val->add_option("--voxel-xy", val_voxel_xy, "in-plane voxel size (um)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_val->add_option("--voxel-z", val_voxel_z, "vertical voxel size (um)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    c_val->add_option("--out", val_out, "also write the report as CSV")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    // let --threads (defined on the root) appear after the subcommand too
    for (auto* sub : app.get_subcommands(nullptr)) sub->fallthrough();

    std::vector<const char*> cargs;
    cargs.push_back("beol-homog");
    for (const auto& a : args) cargs.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
      return app.exit(e) == 0 ? 0 : 2;
    }
    if (threads < 1) throw ConfigError("--threads must be >= 1");

    if (c_inspect->parsed()) return cmd_inspect(inspect_path);

    if (c_hom->parsed()) {
      const beol::LayoutDatabase db = load_layout(hom_layout);
      const beol::TechStack stack = load_tech(hom_layout);
      const std::string top = pick_top_cell(db, hom_layout.cell);
      const beol::Window w = parse_window_um(hom_window);
      const std::vector<double> dts = parse_list(hom_dt);
      const double dz =
          hom_voxel_z > 0 ? hom_voxel_z * 1e-6 : beol::default_dz(stack);
      const beol::MaterialGrid grid = beol::window_grid(
          beol::flatten_stack(db, stack, top), stack, w, hom_voxel_xy * 1e-6, dz);
      const beol::HomogenizedProps props =
          beol::homogenize_rve(grid, dts, w, w.width());

      std::cout << "rho_cp_eff=" << fmt(props.rho_cp_eff) << " J/(m^3*K)\n"
                << "kappa_xx=" << fmt6(props.kappa_ss(0, 0))
                << ", kappa_yy=" << fmt6(props.kappa_ss(1, 1))
                << ", kappa_zz=" << fmt6(props.kappa_ss(2, 2)) << " W/(m*K)\n";
      for (const auto& [dt, k] : props.kappa_transient)
        std::cout << "dt=" << fmt(dt) << ": kappa_xx=" << fmt6(k(0, 0))
                  << ", kappa_yy=" << fmt6(k(1, 1))
                  << ", kappa_zz=" << fmt6(k(2, 2)) << " W/(m*K)\n";

      if (!hom_out.empty()) {
        json out;
        out["config"] = {{"command", "homogenize"},
                         {"window_um", hom_window},
                         {"voxel_xy_um", hom_voxel_xy},
                         {"dt_list", dts}};
        out["rho_cp_eff"] = props.rho_cp_eff;
        out["kappa_ss"] = props.kappa_ss.a;
        out["kappa_ss_asymmetry"] = props.kappa_ss_asymmetry;
        json kt = json::array();
        for (const auto& [dt, k] : props.kappa_transient)
          kt.push_back({{"dt", dt}, {"kappa", k.a}});
        out["kappa_transient"] = kt;
        std::ofstream of(hom_out);
        if (!of) throw ConfigError("cannot write " + hom_out);
        of << out.dump(2) << '\n';
      }
      return 0;
    }

    if (c_map->parsed()) {
      const beol::LayoutDatabase db = load_layout(map_layout);
      const beol::TechStack stack = load_tech(map_layout);
      const std::string top = pick_top_cell(db, map_layout.cell);
      const std::vector<double> dts = parse_list(map_dt);
      beol::BuildMapConfig cfg;
      cfg.threads = threads;
      cfg.voxel_xy = map_voxel_xy * 1e-6;
      cfg.voxel_z = map_voxel_z * 1e-6;
      if (!map_die.empty()) cfg.die = parse_window_um(map_die);
      const beol::PropertyMap pmap = beol::build_map(
          db, stack, top, map_nx, map_ny, map_rve * 1e-6, dts, cfg);

      const std::string conf = config_line(
          "map", {{"nx", std::to_string(map_nx)},
                  {"ny", std::to_string(map_ny)},
                  {"rve_size_um", fmt(map_rve)},
                  {"voxel_xy_um", fmt(map_voxel_xy)},
                  {"dt_list", map_dt.empty() ? "-" : map_dt},
                  {"die_um", map_die.empty() ? "auto" : map_die},
                  {"seed", std::to_string(map_layout.seed)}});
      beol::write_map_file(pmap, map_out, {conf});

      const std::string stem =
          map_out.size() > 4 && map_out.substr(map_out.size() - 4) == ".csv"
              ? map_out.substr(0, map_out.size() - 4)
              : map_out;
      const char* comp[3] = {"xx", "yy", "zz"};
      write_heatmap(stem + "_rho_cp.csv", pmap, conf,
                    [](const beol::HomogenizedProps& p) { return p.rho_cp_eff; });
      for (int c = 0; c < 3; ++c)
        write_heatmap(stem + "_k_ss_" + comp[c] + ".csv", pmap, conf,
                      [c](const beol::HomogenizedProps& p) {
                        return p.kappa_ss(c, c);
                      });
      if (!dts.empty())
        for (int c = 0; c < 3; ++c)
          write_heatmap(stem + "_k_dt_" + comp[c] + ".csv", pmap, conf,
                        [c, &dts](const beol::HomogenizedProps& p) {
                          return (*p.kappa_at(dts.front()))(c, c);
                        });
      std::cout << "wrote " << map_out << " (" << pmap.nx << "x" << pmap.ny
                << " cells)\n";
      return 0;
    }

    if (c_ramp->parsed()) {
      const beol::LayoutDatabase db = load_layout(ramp_layout);
      const beol::TechStack stack = load_tech(ramp_layout);
      const std::string top = pick_top_cell(db, ramp_layout.cell);
      const beol::Window w = parse_window_um(ramp_window);
      const double dz =
          ramp_voxel_z > 0 ? ramp_voxel_z * 1e-6 : beol::default_dz(stack);
      const beol::MaterialGrid grid =
          beol::window_grid(beol::flatten_stack(db, stack, top), stack, w,
                            ramp_voxel_xy * 1e-6, dz);
      const double dt = ramp_dt > 0 ? ramp_dt : ramp_tl / 50.0;
      const double tend = ramp_tend > 0 ? ramp_tend : 2.0 * ramp_tl;
      const beol::RampSeries series =
          beol::rve_ramp_study(grid, ramp_tl, dt, ramp_dT, tend);

      std::ofstream out(ramp_out);
      if (!out) throw ConfigError("cannot write " + ramp_out);
      out << "# "
          << config_line("ramp", {{"window_um", ramp_window},
                                  {"t_ramp", fmt(ramp_tl)},
                                  {"dt", fmt(dt)},
                                  {"t_end", fmt(tend)},
                                  {"dT", fmt(ramp_dT)}})
          << "\n"
          << "t,q_homogenized_z,q_average_z,q_steady_z\n";
      for (std::size_t i = 0; i < series.t.size(); ++i)
        out << fmt(series.t[i]) << ',' << fmt(series.qbar_z[i]) << ','
            << fmt(series.qavg_z[i]) << ',' << fmt(series.qss_z[i]) << '\n';
      std::cout << "wrote " << ramp_out << " (" << series.t.size()
                << " samples, plateau " << fmt(series.plateau()) << " W/m^2)\n";
      return 0;
    }

    if (c_sim->parsed()) {
      beol::MacroProblem p;
      std::optional<beol::PropertyMap> pmap;
      beol::Vec2 die_origin, die_size;
      double thickness = sim_thickness * 1e-6;
      if (!sim_map.empty()) {
        pmap = beol::read_map_file(sim_map);
        p.mode = beol::PropertyMode::Map;
        p.map = &*pmap;
        if (sim_map_dt >= 0) p.map_dt = sim_map_dt;
        die_origin = pmap->die_origin;
        die_size = pmap->die_size;
        if (thickness <= 0) {
          if (sim_tech.empty())
            throw ConfigError("map mode needs --thickness or --tech");
          thickness = beol::parse_tech_stack_file(sim_tech).total_thickness;
        }
      } else {
        const beol::TechStack stack = sim_tech.empty()
                                          ? beol::synthetic::tech()
                                          : beol::parse_tech_stack_file(sim_tech);
        p.mode = beol::PropertyMode::Uniform;
        p.uniform = stack.background();
        if (thickness <= 0) thickness = stack.total_thickness;
        die_origin = {0, 0};
        die_size = {100e-6, 100e-6};
      }
      p.geometry = beol::make_mesh(
          sim_nx, sim_ny, sim_nz, die_size.x / sim_nx, die_size.y / sim_ny,
          thickness / sim_nz, {die_origin.x, die_origin.y, 0});

      beol::FluxMap fmap;
      if (!sim_fluxmap.empty()) {
        fmap = beol::read_flux_map_file(sim_fluxmap);
        fmap.origin = die_origin;
        fmap.size = die_size;
        p.faces[beol::ZMin] = beol::FaceBC::neumann_map(&fmap);
      } else if (sim_flux != 0) {
        p.faces[beol::ZMin] = beol::FaceBC::neumann(sim_flux);
      }
      if (!sim_top_temp.empty())
        p.faces[beol::ZMax] = beol::FaceBC::dirichlet(std::stod(sim_top_temp));
      else
        p.faces[beol::ZMax] = beol::FaceBC::robin(sim_htc, sim_tamb);
      p.dt = sim_dt;
      p.t_end = sim_tend;
      p.T0 = sim_t0;

      const beol::MacroModel model(p);
      const auto result = model.run_transient();
      const std::string conf = config_line(
          "simulate", {{"map", sim_map.empty() ? "-" : sim_map},
                       {"mesh", std::to_string(sim_nx) + "x" +
                                    std::to_string(sim_ny) + "x" +
                                    std::to_string(sim_nz)},
                       {"dt", fmt(sim_dt)},
                       {"t_end", fmt(sim_tend)},
                       {"t0", fmt(sim_t0)}});

      std::ofstream series(sim_out + "_series.csv");
      if (!series) throw ConfigError("cannot write " + sim_out + "_series.csv");
      series << "# " << conf << "\nt,T_max,T_avg\n";
      for (const auto& s : result.series)
        series << fmt(s.t) << ',' << fmt(s.t_max) << ',' << fmt(s.t_avg) << '\n';
      beol::write_vtk_temperature(p.geometry, result.final,
                                  sim_out + "_final.vtk");
      if (sim_steady) {
        const beol::ThermalField st = model.solve_steady();
        beol::write_vtk_temperature(p.geometry, st, sim_out + "_steady.vtk");
      }
      const auto& last = result.series.back();
      std::cout << "t=" << fmt(last.t) << " T_max=" << fmt6(last.t_max)
                << " T_avg=" << fmt6(last.t_avg) << "\n";
      return 0;
    }

    if (c_val->parsed()) {
      const beol::LayoutDatabase db = load_layout(val_layout);
      const beol::TechStack stack = load_tech(val_layout);
      const std::string top = pick_top_cell(db, val_layout.cell);
      const beol::Window w = parse_window_um(val_window);
      std::vector<double> sizes = parse_list(val_sizes);
      for (double& s : sizes) s *= 1e-6;
      beol::ValidationOptions opts;
      opts.voxel_xy = val_voxel_xy * 1e-6;
      opts.voxel_z = val_voxel_z * 1e-6;
      const auto rows =
          beol::compare_homogenized_vs_resolved(db, stack, top, w, sizes, opts);

      std::ostringstream table;
      table << "model,T_top,avg (K),T_bot,avg (K),Error (%)\n";
      for (const auto& r : rows)
        table << r.model << ',' << fmt6(r.t_top_avg) << ',' << fmt6(r.t_bot_avg)
              << ',' << fmt6(r.error_pct) << '\n';
      std::cout << table.str();
      if (!val_out.empty()) {
        std::ofstream out(val_out);
        if (!out) throw ConfigError("cannot write " + val_out);
        out << "# "
            << config_line("validate", {{"window_um", val_window},
                                        {"rve_sizes_um", val_sizes},
                                        {"voxel_xy_um", fmt(val_voxel_xy)},
                                        {"seed", std::to_string(val_layout.seed)}})
            << "\n"
            << table.str();
      }
      return 0;
    }

    throw ConfigError("no subcommand given");
  } catch (const beol::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const beol::CycleError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const beol::UnsupportedError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const beol::FormatError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const beol::RangeError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const beol::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 4;
  } catch (const beol::SingularError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 4;
  } catch (const beol::MapError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
}
