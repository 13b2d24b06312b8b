#include "beol/property_map.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "beol/errors.hpp"

namespace beol {

Vec2 PropertyMap::cell_center(int i, int j) const {
  return {die_origin.x + (i + 0.5) * die_size.x / nx,
          die_origin.y + (j + 0.5) * die_size.y / ny};
}

namespace {

struct Corners {
  int i0, j0;
  double tx, ty;
};

Corners locate(const PropertyMap& m, Vec2 p) {
  const double cw = m.die_size.x / m.nx;
  const double ch = m.die_size.y / m.ny;
  double u = (p.x - m.die_origin.x) / cw - 0.5;
  double v = (p.y - m.die_origin.y) / ch - 0.5;
  u = std::clamp(u, 0.0, static_cast<double>(m.nx - 1));
  v = std::clamp(v, 0.0, static_cast<double>(m.ny - 1));
  Corners c;
  c.i0 = std::min(static_cast<int>(u), m.nx > 1 ? m.nx - 2 : 0);
  c.j0 = std::min(static_cast<int>(v), m.ny > 1 ? m.ny - 2 : 0);
  c.tx = m.nx > 1 ? u - c.i0 : 0.0;
  c.ty = m.ny > 1 ? v - c.j0 : 0.0;
  return c;
}

template <typename Get>
double bilerp(const PropertyMap& m, const Corners& c, Get get) {
  const int i1 = std::min(c.i0 + 1, m.nx - 1);
  const int j1 = std::min(c.j0 + 1, m.ny - 1);
  const double v00 = get(m.entry(c.i0, c.j0));
  const double v10 = get(m.entry(i1, c.j0));
  const double v01 = get(m.entry(c.i0, j1));
  const double v11 = get(m.entry(i1, j1));
  return (1 - c.ty) * ((1 - c.tx) * v00 + c.tx * v10) +
         c.ty * ((1 - c.tx) * v01 + c.tx * v11);
}

void require_ok(const PropertyMap& m, const Corners& c) {
  const int i1 = std::min(c.i0 + 1, m.nx - 1);
  const int j1 = std::min(c.j0 + 1, m.ny - 1);
  for (int j : {c.j0, j1})
    for (int i : {c.i0, i1})
      if (!m.entry(i, j).ok)
        throw MapError("interpolation touches failed cell (" +
                       std::to_string(i) + "," + std::to_string(j) +
                       "): " + m.entry(i, j).fail_reason);
}

}  // namespace

HomogenizedProps PropertyMap::interpolate(Vec2 p) const {
  const Corners c = locate(*this, p);
  require_ok(*this, c);
  HomogenizedProps out;
  out.rho_cp_eff = bilerp(*this, c, [](const Entry& e) { return e.props.rho_cp_eff; });
  for (int r = 0; r < 3; ++r)
    for (int cc = 0; cc < 3; ++cc)
      out.kappa_ss(r, cc) = bilerp(
          *this, c, [&](const Entry& e) { return e.props.kappa_ss(r, cc); });
  for (std::size_t d = 0; d < dt_list.size(); ++d) {
    Mat3 kd;
    for (int r = 0; r < 3; ++r)
      for (int cc = 0; cc < 3; ++cc)
        kd(r, cc) = bilerp(*this, c, [&](const Entry& e) {
          return e.props.kappa_transient[d].second(r, cc);
        });
    out.kappa_transient.emplace_back(dt_list[d], kd);
  }
  out.rve_size = rve_size;
  return out;
}

Mat3 PropertyMap::kappa(Vec2 p, std::optional<double> dt) const {
  const HomogenizedProps props = interpolate(p);
  if (!dt) return props.kappa_ss;
  const Mat3* k = props.kappa_at(*dt);
  if (!k)
    throw KeyError("timestep " + std::to_string(*dt) + " not in map dt list");
  return *k;
}

double PropertyMap::rho_cp(Vec2 p) const {
  const Corners c = locate(*this, p);
  require_ok(*this, c);
  return bilerp(*this, c, [](const Entry& e) { return e.props.rho_cp_eff; });
}

std::vector<LayerSlice> flatten_stack(const LayoutDatabase& db,
                                      const TechStack& stack,
                                      const std::string& top_cell) {
  std::vector<LayerSlice> slices;
  slices.reserve(stack.layers.size());
  for (const TechLayer& l : stack.layers) {
    LayerSlice s;
    s.polys = flatten_layer(db, top_cell, {l.gds_layer, l.gds_datatype});
    s.z_bottom = l.z_bottom;
    s.thickness = l.thickness;
    s.material_id = l.material_id;
    slices.push_back(std::move(s));
  }
  return slices;
}

MaterialGrid window_grid(const std::vector<LayerSlice>& slices,
                         const TechStack& stack, const Window& w,
                         double voxel_xy, double voxel_z) {
  if (voxel_z <= 0) voxel_z = default_dz(stack);
  std::vector<LayerSlice> clipped;
  clipped.reserve(slices.size());
  for (const LayerSlice& s : slices) {
    LayerSlice c = s;
    c.polys = clip(s.polys, w);
    clipped.push_back(std::move(c));
  }
  return voxelize(clipped, stack, w, {voxel_xy, voxel_xy, voxel_z});
}

PropertyMap build_map(const LayoutDatabase& db, const TechStack& stack,
                      const std::string& top_cell, int nx, int ny,
                      double rve_size, const std::vector<double>& dt_list,
                      const BuildMapConfig& config) {
  PropertyMap map;
  map.nx = nx;
  map.ny = ny;
  map.rve_size = rve_size;
  map.dt_list = dt_list;

  const std::vector<LayerSlice> slices = flatten_stack(db, stack, top_cell);
  if (config.die) {
    map.die_origin = {config.die->x_min, config.die->y_min};
    map.die_size = {config.die->width(), config.die->height()};
  } else {
    bool any = false;
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    for (const LayerSlice& s : slices)
      for (const Polygon& p : s.polys.polygons)
        for (const Vec2& v : p) {
          if (!any) {
            x0 = x1 = v.x;
            y0 = y1 = v.y;
            any = true;
          }
          x0 = std::min(x0, v.x);
          x1 = std::max(x1, v.x);
          y0 = std::min(y0, v.y);
          y1 = std::max(y1, v.y);
        }
    if (!any)
      throw MapError("layout has no geometry; die extents must be given");
    map.die_origin = {x0, y0};
    map.die_size = {x1 - x0, y1 - y0};
  }

  map.entries.assign(static_cast<std::size_t>(nx) * ny, {});
  std::atomic<int> next{0};
  const int total = nx * ny;
  auto worker = [&]() {
    for (;;) {
      const int idx = next.fetch_add(1);
      if (idx >= total) return;
      const int i = idx % nx;
      const int j = idx / nx;
      const Vec2 c = map.cell_center(i, j);
      const Window w{c.x - rve_size / 2, c.y - rve_size / 2,
                     c.x + rve_size / 2, c.y + rve_size / 2};
      PropertyMap::Entry& e = map.entries[idx];
      try {
        const MaterialGrid grid =
            window_grid(slices, stack, w, config.voxel_xy, config.voxel_z);
        e.props = homogenize_rve(grid, dt_list, w, rve_size);
        e.ok = true;
      } catch (const std::exception& ex) {
        e.ok = false;
        e.fail_reason = ex.what();
      }
    }
  };
  const int nthreads = std::max(1, config.threads);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  int failed = 0;
  std::string first_reason;
  for (const auto& e : map.entries)
    if (!e.ok) {
      if (failed == 0) first_reason = e.fail_reason;
      ++failed;
    }
  if (failed * 100 > total)
    throw MapError(std::to_string(failed) + " of " + std::to_string(total) +
                   " cells failed; first: " + first_reason);
  return map;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_map(const PropertyMap& map, std::ostream& out,
               const std::vector<std::string>& header_extra) {
  out << "#beol-homog-map v1; dt_list=";
  for (std::size_t i = 0; i < map.dt_list.size(); ++i)
    out << (i ? "," : "") << fmt(map.dt_list[i]);
  out << '\n';
  out << "#grid nx=" << map.nx << " ny=" << map.ny
      << " die_origin=" << fmt(map.die_origin.x) << ',' << fmt(map.die_origin.y)
      << " die_size=" << fmt(map.die_size.x) << ',' << fmt(map.die_size.y)
      << " rve_size=" << fmt(map.rve_size) << '\n';
  for (const std::string& line : header_extra) out << '#' << line << '\n';
  static const char* comp[9] = {"xx", "xy", "xz", "yx", "yy",
                                "yz", "zx", "zy", "zz"};
  out << "x_c,y_c,rho_cp";
  for (const char* c : comp) out << ",k_ss_" << c;
  for (std::size_t d = 0; d < map.dt_list.size(); ++d)
    for (const char* c : comp) out << ",k_dt" << d << '_' << c;
  out << ",status\n";
  for (int j = 0; j < map.ny; ++j)
    for (int i = 0; i < map.nx; ++i) {
      const PropertyMap::Entry& e = map.entry(i, j);
      const Vec2 c = map.cell_center(i, j);
      out << fmt(c.x) << ',' << fmt(c.y) << ',' << fmt(e.props.rho_cp_eff);
      for (int n = 0; n < 9; ++n) out << ',' << fmt(e.props.kappa_ss.a[n]);
      for (std::size_t d = 0; d < map.dt_list.size(); ++d) {
        Mat3 k;
        if (e.ok) k = e.props.kappa_transient[d].second;
        for (int n = 0; n < 9; ++n) out << ',' << fmt(k.a[n]);
      }
      if (e.ok) {
        out << ",ok\n";
      } else {
        std::string reason = e.fail_reason;
        for (char& ch : reason)
          if (ch == ',' || ch == '\n') ch = ';';
        out << ",fail:" << reason << '\n';
      }
    }
}

void write_map_file(const PropertyMap& map, const std::string& path,
                    const std::vector<std::string>& header_extra) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path);
  write_map(map, out, header_extra);
}

PropertyMap read_map(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("#beol-homog-map v1", 0) != 0)
    throw FormatError("missing or wrong map header version");
  PropertyMap map;
  {
    const auto pos = line.find("dt_list=");
    if (pos == std::string::npos) throw FormatError("header missing dt_list");
    std::stringstream ss(line.substr(pos + 8));
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) map.dt_list.push_back(std::stod(tok));
  }
  if (!std::getline(in, line) || line.rfind("#grid ", 0) != 0)
    throw FormatError("missing grid header line");
  if (std::sscanf(line.c_str(),
                  "#grid nx=%d ny=%d die_origin=%lf,%lf die_size=%lf,%lf "
                  "rve_size=%lf",
                  &map.nx, &map.ny, &map.die_origin.x, &map.die_origin.y,
                  &map.die_size.x, &map.die_size.y, &map.rve_size) != 7)
    throw FormatError("malformed grid header line");
  // skip extra comments, then the column header
  while (std::getline(in, line) && !line.empty() && line[0] == '#') {
  }
  if (line.rfind("x_c,y_c,rho_cp", 0) != 0)
    throw FormatError("missing column header");
  const std::size_t expected_cols = 3 + 9 + 9 * map.dt_list.size() + 1;
  {
    std::size_t cols = 1;
    for (char c : line)
      if (c == ',') ++cols;
    if (cols != expected_cols) throw FormatError("wrong column count in header");
  }
  map.entries.assign(static_cast<std::size_t>(map.nx) * map.ny, {});
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (row >= map.entries.size()) throw FormatError("too many data rows");
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    if (f.size() != expected_cols)
      throw FormatError("row " + std::to_string(row) + " has " +
                        std::to_string(f.size()) + " columns, expected " +
                        std::to_string(expected_cols));
    PropertyMap::Entry& e = map.entries[row];
    e.props.rho_cp_eff = std::stod(f[2]);
    for (int n = 0; n < 9; ++n) e.props.kappa_ss.a[n] = std::stod(f[3 + n]);
    for (std::size_t d = 0; d < map.dt_list.size(); ++d) {
      Mat3 k;
      for (int n = 0; n < 9; ++n) k.a[n] = std::stod(f[12 + 9 * d + n]);
      e.props.kappa_transient.emplace_back(map.dt_list[d], k);
    }
    e.props.rve_size = map.rve_size;
    const std::string& status = f.back();
    e.ok = (status == "ok");
    if (!e.ok) e.fail_reason = status;
    ++row;
  }
  if (row != map.entries.size()) throw FormatError("missing data rows");
  return map;
}

PropertyMap read_map_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open map file: " + path);
  return read_map(in);
}

}  // namespace beol
