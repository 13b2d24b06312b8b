#include "beol/macro.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "beol/errors.hpp"

namespace beol {

double FluxMap::value_at(double u, double v) const {
  const double cu = size.x / nx, cv = size.y / ny;
  int i = static_cast<int>(std::floor((u - origin.x) / cu));
  int j = static_cast<int>(std::floor((v - origin.y) / cv));
  i = std::clamp(i, 0, nx - 1);
  j = std::clamp(j, 0, ny - 1);
  return value(i, j);
}

FluxMap read_flux_map(std::istream& in) {
  std::string line;
  auto next_data_line = [&](std::string& out) {
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      out = line;
      return true;
    }
    return false;
  };
  std::string header;
  if (!next_data_line(header)) throw FormatError("flux map: empty file");
  int nx = 0, ny = 0;
  char sep = 0;
  std::istringstream hs(header);
  if (!(hs >> nx >> sep >> ny) || sep != ',' || nx <= 0 || ny <= 0)
    throw FormatError("flux map: bad header, expected nx,ny");
  FluxMap f;
  f.nx = nx;
  f.ny = ny;
  f.q.reserve(static_cast<std::size_t>(nx) * ny);
  std::string row;
  while (f.q.size() < f.q.capacity() && next_data_line(row)) {
    for (char& c : row)
      if (c == ',') c = ' ';
    std::istringstream rs(row);
    double v;
    while (rs >> v) f.q.push_back(v);
    if (!rs.eof()) throw FormatError("flux map: non-numeric value");
  }
  if (f.q.size() != static_cast<std::size_t>(nx) * ny)
    throw FormatError("flux map: expected " + std::to_string(nx * ny) +
                      " values, got " + std::to_string(f.q.size()));
  return f;
}

FluxMap read_flux_map_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open flux map: " + path);
  return read_flux_map(in);
}

void write_flux_map(const FluxMap& f, std::ostream& out) {
  out << "# surface heat flux, W/m^2, row-major\n" << f.nx << ',' << f.ny << '\n';
  out.precision(17);
  for (int j = 0; j < f.ny; ++j) {
    for (int i = 0; i < f.nx; ++i) out << (i ? "," : "") << f.value(i, j);
    out << '\n';
  }
}

MaterialGrid make_mesh(int nx, int ny, int nz, double dx, double dy, double dz,
                       Vec3 origin) {
  MaterialGrid g = uniform_grid(Material{1.0, 1.0, 1.0}, nx, ny, nz, dx, dy, dz);
  g.origin = origin;
  return g;
}

namespace {

struct FaceInfo {
  int d;       // normal dimension
  bool hi;     // max side
  int tu, tv;  // tangent dimensions
};

FaceInfo face_info(Face f) {
  const int d = f / 2;
  return {d, (f % 2) != 0, d == 0 ? 1 : 0, d == 2 ? 1 : 2};
}

int dim_n(const MaterialGrid& g, int d) { return d == 0 ? g.nx : d == 1 ? g.ny : g.nz; }
double dim_h(const MaterialGrid& g, int d) { return d == 0 ? g.dx : d == 1 ? g.dy : g.dz; }
double dim_o(const MaterialGrid& g, int d) {
  return d == 0 ? g.origin.x : d == 1 ? g.origin.y : g.origin.z;
}

// Visits every boundary face element of `face`: the 4 corner node indices
// (bit 0 -> +u, bit 1 -> +v) and the lower tangent corner (u0, v0).
template <typename Fn>
void for_each_face_elem(const MaterialGrid& g, Face face, Fn fn) {
  const FaceInfo fi = face_info(face);
  const int nu = dim_n(g, fi.tu), nv = dim_n(g, fi.tv);
  const double du = dim_h(g, fi.tu), dv = dim_h(g, fi.tv);
  int idx[3];
  idx[fi.d] = fi.hi ? dim_n(g, fi.d) : 0;
  for (int ev = 0; ev < nv; ++ev)
    for (int eu = 0; eu < nu; ++eu) {
      int nodes[4];
      for (int c = 0; c < 4; ++c) {
        idx[fi.tu] = eu + (c & 1);
        idx[fi.tv] = ev + ((c >> 1) & 1);
        nodes[c] = node_index(g, idx[0], idx[1], idx[2]);
      }
      fn(nodes, dim_o(g, fi.tu) + eu * du, dim_o(g, fi.tv) + ev * dv);
    }
}

// Cut points of [lo, hi] at the lattice {m0 + i*cell}, endpoints included.
std::vector<double> lattice_cuts(double lo, double hi, double m0, double cell) {
  std::vector<double> cuts{lo};
  if (cell > 0) {
    const double eps = 1e-9 * cell;
    int i = static_cast<int>(std::ceil((lo - m0) / cell - 1e-9));
    for (; m0 + i * cell < hi - eps; ++i) {
      const double x = m0 + i * cell;
      if (x > lo + eps) cuts.push_back(x);
    }
  }
  cuts.push_back(hi);
  return cuts;
}

// Integral of the two linear face basis functions over [ua, ub] within a
// cell [u0, u0 + du]: index 0 falls from 1 at u0, index 1 rises to 1.
void basis_integrals(double u0, double du, double ua, double ub, double out[2]) {
  const double sa = (ua - u0) / du, sb = (ub - u0) / du;
  out[1] = du * 0.5 * (sb * sb - sa * sa);
  out[0] = (ub - ua) - out[1];
}

// Exact integration of a piecewise-constant flux against the bilinear face
// shape functions; adds the nodal loads to f.
void add_flux_loads(const MaterialGrid& g, Face face, const FluxMap& flux,
                    std::vector<double>& f) {
  const FaceInfo fi = face_info(face);
  const double du = dim_h(g, fi.tu), dv = dim_h(g, fi.tv);
  const double cu = flux.size.x / flux.nx, cv = flux.size.y / flux.ny;
  for_each_face_elem(g, face, [&](const int nodes[4], double u0, double v0) {
    const auto ucuts = lattice_cuts(u0, u0 + du, flux.origin.x, cu);
    const auto vcuts = lattice_cuts(v0, v0 + dv, flux.origin.y, cv);
    for (std::size_t jv = 0; jv + 1 < vcuts.size(); ++jv)
      for (std::size_t ju = 0; ju + 1 < ucuts.size(); ++ju) {
        const double q = flux.value_at(0.5 * (ucuts[ju] + ucuts[ju + 1]),
                                       0.5 * (vcuts[jv] + vcuts[jv + 1]));
        double Iu[2], Iv[2];
        basis_integrals(u0, du, ucuts[ju], ucuts[ju + 1], Iu);
        basis_integrals(v0, dv, vcuts[jv], vcuts[jv + 1], Iv);
        for (int c = 0; c < 4; ++c)
          f[nodes[c]] += q * Iu[c & 1] * Iv[(c >> 1) & 1];
      }
  });
}

// Applies the per-face conditions: Robin terms into K and f, Neumann loads
// into f, Dirichlet values into dir.
void apply_face_bcs(const MaterialGrid& g, const std::array<FaceBC, 6>& faces,
                    CsrMatrix& K, std::vector<double>& f, Dirichlet& dir,
                    bool& has_dirichlet, bool& has_robin) {
  for (int fc = 0; fc < 6; ++fc) {
    const Face face = static_cast<Face>(fc);
    const FaceBC& bc = faces[fc];
    const FaceInfo fi = face_info(face);
    const double du = dim_h(g, fi.tu), dv = dim_h(g, fi.tv);
    const double area = du * dv;
    switch (bc.type) {
      case FaceBC::Adiabatic:
        break;
      case FaceBC::DirichletT:
        has_dirichlet = true;
        for_each_face_elem(g, face, [&](const int nodes[4], double, double) {
          for (int c = 0; c < 4; ++c) {
            dir.flag[nodes[c]] = 1;
            dir.value[nodes[c]] = bc.value;
          }
        });
        break;
      case FaceBC::NeumannUniform:
        for_each_face_elem(g, face, [&](const int nodes[4], double, double) {
          for (int c = 0; c < 4; ++c) f[nodes[c]] += bc.value * area / 4.0;
        });
        break;
      case FaceBC::NeumannMap:
        if (!bc.flux || bc.flux->nx <= 0 || bc.flux->size.x <= 0 ||
            bc.flux->size.y <= 0)
          throw ConfigError("flux-map face without a sized flux map");
        add_flux_loads(g, face, *bc.flux, f);
        break;
      case FaceBC::Robin: {
        has_robin = true;
        // exact bilinear face mass: 1D factors du/3 (same corner) or du/6
        for_each_face_elem(g, face, [&](const int nodes[4], double, double) {
          for (int a = 0; a < 4; ++a) {
            f[nodes[a]] += bc.h * bc.t_amb * area / 4.0;
            for (int b = 0; b < 4; ++b) {
              const double fu = ((a & 1) == (b & 1)) ? du / 3.0 : du / 6.0;
              const double fv = ((a & 2) == (b & 2)) ? dv / 3.0 : dv / 6.0;
              K.at(nodes[a], nodes[b]) += bc.h * fu * fv;
            }
          }
        });
        break;
      }
    }
  }
}

const double kGp = 0.5 / std::sqrt(3.0);

}  // namespace

MacroModel::MacroModel(const MacroProblem& p) : p_(p) {
  const MaterialGrid& g = p_.geometry;
  if (g.nx < 1 || g.ny < 1 || g.nz < 1) throw ConfigError("empty macro mesh");
  if (p_.mode == PropertyMode::Map && !p_.map)
    throw ConfigError("map mode without a property map");

  K_ = structured_pattern(g);
  M_ = structured_pattern(g);
  const HexKernel kern(g.dx, g.dy, g.dz);
  double Ke[8][8], Me[8][8];
  Mat3 kgp[8];
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        if (p_.mode == PropertyMode::Map) {
          const Vec3 c = g.voxel_center(i, j, k);
          double rho[8];
          for (int gp = 0; gp < 8; ++gp) {
            const Vec2 xy{c.x + ((gp & 1) ? kGp : -kGp) * g.dx,
                          c.y + ((gp & 2) ? kGp : -kGp) * g.dy};
            kgp[gp] = p_.map->kappa(xy, p_.map_dt);
            rho[gp] = p_.map->rho_cp(xy);
          }
          kern.conductivity(kgp, Ke);
          for (int a = 0; a < 8; ++a)
            for (int b = 0; b < 8; ++b) {
              double s = 0;
              for (int gp = 0; gp < 8; ++gp)
                s += rho[gp] * kern.N[gp][a] * kern.N[gp][b];
              Me[a][b] = kern.wdetJ * s;
            }
        } else {
          const Material& m =
              p_.mode == PropertyMode::Uniform ? p_.uniform : g.mat(i, j, k);
          kern.conductivity(m.kappa, Ke);
          kern.mass(m.rho_cp(), Me);
        }
        int nodes[8];
        for (int a = 0; a < 8; ++a)
          nodes[a] = node_index(g, i + (a & 1), j + ((a >> 1) & 1),
                                k + ((a >> 2) & 1));
        for (int a = 0; a < 8; ++a)
          for (int b = 0; b < 8; ++b) {
            K_.at(nodes[a], nodes[b]) += Ke[a][b];
            M_.at(nodes[a], nodes[b]) += Me[a][b];
          }
      }

  f_.assign(node_count(g), 0.0);
  dir_ = Dirichlet::none(node_count(g));
  apply_face_bcs(g, p_.faces, K_, f_, dir_, has_dirichlet_, has_robin_);
}

ThermalField MacroModel::initial() const {
  ThermalField f;
  f.values.assign(node_count(p_.geometry), p_.T0);
  return f;
}

ThermalField MacroModel::solve_steady() const {
  if (!has_dirichlet_ && !has_robin_)
    throw SingularError(
        "steady problem has no temperature reference (all faces Neumann or "
        "adiabatic)");
  ThermalField out;
  out.values = solve_constrained(K_, dir_, f_, initial().values,
                                 {p_.cg_tol, 0});
  return out;
}

ThermalField MacroModel::step(const ThermalField& state) const {
  if (!(p_.dt > 0)) throw ConfigError("nonpositive timestep");
  if (cached_dt_ != p_.dt) {
    cached_A_ = K_;
    cached_A_.add_scaled(M_, 1.0 / p_.dt);
    cached_dt_ = p_.dt;
  }
  std::vector<double> rhs(f_);
  std::vector<double> mth = M_.matvec(state.values);
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += mth[i] / p_.dt;
  ThermalField out;
  out.values = solve_constrained(cached_A_, dir_, rhs, state.values,
                                 {p_.cg_tol, 0});
  out.time = state.time + p_.dt;
  return out;
}

MacroModel::TransientResult MacroModel::run_transient() const {
  const int steps = std::max(1, static_cast<int>(std::llround(p_.t_end / p_.dt)));
  TransientResult r;
  ThermalField cur = initial();
  r.series.push_back({0.0, t_max(cur), t_avg(cur)});
  for (int s = 0; s < steps; ++s) {
    cur = step(cur);
    r.series.push_back({cur.time, t_max(cur), t_avg(cur)});
  }
  r.final = std::move(cur);
  return r;
}

double MacroModel::t_max(const ThermalField& f) const {
  return *std::max_element(f.values.begin(), f.values.end());
}

double MacroModel::t_avg(const ThermalField& f) const {
  const std::vector<double> ones(f.values.size(), 1.0);
  const std::vector<double> lumped = M_.matvec(ones);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < lumped.size(); ++i) {
    num += lumped[i] * f.values[i];
    den += lumped[i];
  }
  return num / den;
}

double MacroModel::face_average(Face face, const ThermalField& f) const {
  const MaterialGrid& g = p_.geometry;
  const FaceInfo fi = face_info(face);
  const double area = dim_h(g, fi.tu) * dim_h(g, fi.tv);
  double num = 0, den = 0;
  for_each_face_elem(g, face, [&](const int nodes[4], double, double) {
    for (int c = 0; c < 4; ++c) num += f.values[nodes[c]] * area / 4.0;
    den += area;
  });
  return num / den;
}

double MacroModel::energy_balance_residual(const ThermalField& prev,
                                           const ThermalField& next) const {
  // 1^T of the discrete equation: stored-energy rate vs net inflow at the
  // end of the step. Meaningful for Neumann/Robin problems (no constrained
  // rows dropped).
  std::vector<double> dth(next.values);
  for (std::size_t i = 0; i < dth.size(); ++i) dth[i] -= prev.values[i];
  const std::vector<double> mdt = M_.matvec(dth);
  const std::vector<double> kth = K_.matvec(next.values);
  double stored = 0, load = 0, conducted = 0;
  for (std::size_t i = 0; i < mdt.size(); ++i) {
    stored += mdt[i] / p_.dt;
    load += f_[i];
    conducted += kth[i];
  }
  const double scale =
      std::abs(stored) + std::abs(load) + std::abs(conducted) + 1e-300;
  return std::abs(stored - (load - conducted)) / scale;
}

ThermalField solve_steady_macro(const MacroProblem& p) {
  return MacroModel(p).solve_steady();
}

ThermalField step_macro(const MacroProblem& p, const ThermalField& state) {
  return MacroModel(p).step(state);
}

MacroModel::TransientResult run_transient(const MacroProblem& p) {
  return MacroModel(p).run_transient();
}

ResolvedResult run_resolved(const MaterialGrid& grid,
                            const std::array<FaceBC, 6>& faces, double cg_tol) {
  MacroProblem p;
  p.geometry = grid;
  p.mode = PropertyMode::Resolved;
  p.faces = faces;
  p.cg_tol = cg_tol;
  MacroModel model(p);
  ResolvedResult r;
  r.field = model.solve_steady();
  r.t_top_avg = model.face_average(ZMax, r.field);
  r.t_bot_avg = model.face_average(ZMin, r.field);
  return r;
}

std::vector<ValidationRow> compare_homogenized_vs_resolved(
    const LayoutDatabase& db, const TechStack& stack,
    const std::string& top_cell, const Window& window,
    const std::vector<double>& rve_sizes, const ValidationOptions& opts) {
  const double dz = opts.voxel_z > 0 ? opts.voxel_z : default_dz(stack);
  const auto slices = flatten_stack(db, stack, top_cell);
  const MaterialGrid resolved =
      window_grid(slices, stack, window, opts.voxel_xy, dz);

  std::array<FaceBC, 6> faces;
  faces[ZMin] = FaceBC::neumann(opts.flux);
  faces[ZMax] = FaceBC::robin(opts.h, opts.t_amb);

  std::vector<ValidationRow> rows;
  const ResolvedResult ref = run_resolved(resolved, faces, opts.cg_tol);
  rows.push_back({"fully-resolved", ref.t_top_avg, ref.t_bot_avg, 0.0});

  for (double L : rve_sizes) {
    const int mx = std::max(1, static_cast<int>(std::llround(window.width() / L)));
    const int my = std::max(1, static_cast<int>(std::llround(window.height() / L)));
    BuildMapConfig cfg;
    cfg.voxel_xy = opts.voxel_xy;
    cfg.voxel_z = dz;
    cfg.die = window;
    const PropertyMap map =
        build_map(db, stack, top_cell, mx, my, L, {}, cfg);

    MacroProblem hp;
    hp.geometry = make_mesh(resolved.nx, resolved.ny, resolved.nz, resolved.dx,
                            resolved.dy, resolved.dz, resolved.origin);
    hp.mode = PropertyMode::Map;
    hp.map = &map;
    hp.faces = faces;
    hp.cg_tol = opts.cg_tol;
    MacroModel model(hp);
    const ThermalField sol = model.solve_steady();
    ValidationRow row;
    {
      std::ostringstream name;
      name << "homogenized-" << L * 1e6 << "um";
      row.model = name.str();
    }
    row.t_top_avg = model.face_average(ZMax, sol);
    row.t_bot_avg = model.face_average(ZMin, sol);
    row.error_pct =
        100.0 * std::abs(row.t_bot_avg - ref.t_bot_avg) / std::abs(ref.t_bot_avg);
    rows.push_back(row);
  }
  return rows;
}

CoupledMacro::CoupledMacro(MaterialGrid geometry, std::array<FaceBC, 6> faces,
                           double dt, CoupledConfig config)
    : geom_(std::move(geometry)),
      faces_(faces),
      dt_(dt),
      cfg_(std::move(config)),
      micro_(cfg_.rve, cfg_.cg_tol) {
  if (!(dt_ > 0)) throw ConfigError("nonpositive timestep");
  n_gp_ = 8 * geom_.voxel_count();
  if (n_gp_ > cfg_.max_points)
    throw ConfigError("coupled mode: " + std::to_string(n_gp_) +
                      " quadrature points exceed the configured cap of " +
                      std::to_string(cfg_.max_points));

  // The micro response over one macro step is affine in (initial state,
  // previous macro pair, new macro pair); probe the constant tangent once.
  // These probe steps also warm the micro system cache for dt_, so the
  // per-point solves below can run concurrently.
  const std::vector<double> zero(node_count(micro_.grid()), 0.0);
  std::vector<double> end;
  micro_response(zero, {}, {1.0, {}}, end, a_, c_);
  for (int j = 0; j < 3; ++j) {
    Vec3 ej;
    if (j == 0) ej.x = 1;
    if (j == 1) ej.y = 1;
    if (j == 2) ej.z = 1;
    double bj;
    Vec3 dj;
    micro_response(zero, {}, {0.0, ej}, end, bj, dj);
    if (j == 0) b_.x = bj;
    if (j == 1) b_.y = bj;
    if (j == 2) b_.z = bj;
    for (int i = 0; i < 3; ++i) D_(i, j) = dj[i];
  }

  // Macro operator: for the test function N_a and trial N_b,
  //   integral of N_a*(a N_b + b.grad N_b) - grad N_a . (c N_b + D grad N_b).
  L_ = structured_pattern(geom_);
  const HexKernel kern(geom_.dx, geom_.dy, geom_.dz);
  double Le[8][8];
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b) {
      double s = 0;
      for (int gp = 0; gp < 8; ++gp) {
        double bg = 0, cg = 0, dg = 0;
        for (int i = 0; i < 3; ++i) {
          bg += b_[i] * kern.dN[gp][b][i];
          cg += kern.dN[gp][a][i] * c_[i];
          for (int j = 0; j < 3; ++j)
            dg += kern.dN[gp][a][i] * D_(i, j) * kern.dN[gp][b][j];
        }
        s += kern.N[gp][a] * (a_ * kern.N[gp][b] + bg) -
             (cg * kern.N[gp][b] + dg);
      }
      Le[a][b] = kern.wdetJ * s;
    }
  for (int k = 0; k < geom_.nz; ++k)
    for (int j = 0; j < geom_.ny; ++j)
      for (int i = 0; i < geom_.nx; ++i) {
        int nodes[8];
        for (int a = 0; a < 8; ++a)
          nodes[a] = node_index(geom_, i + (a & 1), j + ((a >> 1) & 1),
                                k + ((a >> 2) & 1));
        for (int a = 0; a < 8; ++a)
          for (int b = 0; b < 8; ++b) L_.at(nodes[a], nodes[b]) += Le[a][b];
      }

  f_bc_.assign(node_count(geom_), 0.0);
  dir_ = Dirichlet::none(node_count(geom_));
  bool has_dir = false, has_robin = false;
  apply_face_bcs(geom_, faces_, L_, f_bc_, dir_, has_dir, has_robin);
}

void CoupledMacro::micro_response(const std::vector<double>& init,
                                  MacroPair from, MacroPair to,
                                  std::vector<double>& end_state,
                                  double& eps_dot_bar, Vec3& q_bar) const {
  ThermalField start;
  start.values = init;
  const MicroBCSchedule sched = [&](double t) {
    const double s = t / dt_;
    return MicroBC{from.theta_bar + s * (to.theta_bar - from.theta_bar),
                   from.grad + (to.grad - from.grad) * s};
  };
  const ThermalField end =
      micro_.step_transient(start, sched, dt_, cfg_.subcycles);
  const UpscaledState u = upscale(micro_.grid(), end, start, dt_);
  end_state = end.values;
  eps_dot_bar = u.eps_dot_bar;
  q_bar = u.q_bar;
}

ThermalField CoupledMacro::initialize(double T0) {
  micro_state_.assign(n_gp_, std::vector<double>(node_count(micro_.grid()), T0));
  prev_pair_.assign(n_gp_, MacroPair{T0, {}});
  time_ = 0;
  ThermalField f;
  f.values.assign(node_count(geom_), T0);
  return f;
}

ThermalField CoupledMacro::step(const ThermalField& state) {
  if (micro_state_.empty()) throw Error("coupled model not initialized");
  const HexKernel kern(geom_.dx, geom_.dy, geom_.dz);

  auto parallel_gp = [&](auto&& body) {
    const int nthreads =
        std::max(1, std::min(cfg_.threads, static_cast<int>(
                                               std::thread::hardware_concurrency()
                                                   ? std::thread::hardware_concurrency()
                                                   : 1u)));
    if (nthreads == 1) {
      for (int gp = 0; gp < n_gp_; ++gp) body(gp);
      return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mu;
    for (int t = 0; t < nthreads; ++t)
      pool.emplace_back([&] {
        for (int gp = next.fetch_add(1); gp < n_gp_; gp = next.fetch_add(1)) {
          try {
            body(gp);
          } catch (...) {
            std::lock_guard<std::mutex> lock(err_mu);
            if (!err) err = std::current_exception();
          }
        }
      });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
  };

  // History part of the micro response: what each RVE would return if the
  // new macro pair were zero.
  std::vector<double> e_hist(n_gp_);
  std::vector<Vec3> q_hist(n_gp_);
  parallel_gp([&](int gp) {
    try {
      std::vector<double> end;
      micro_response(micro_state_[gp], prev_pair_[gp], MacroPair{},
                     end, e_hist[gp], q_hist[gp]);
    } catch (const std::exception& e) {
      throw SolverError("coupled RVE failure at quadrature point " +
                        std::to_string(gp) + ": " + e.what(),
                        {});
    }
  });

  std::vector<double> rhs(f_bc_);
  int elem = 0;
  for (int k = 0; k < geom_.nz; ++k)
    for (int j = 0; j < geom_.ny; ++j)
      for (int i = 0; i < geom_.nx; ++i, ++elem) {
        int nodes[8];
        for (int a = 0; a < 8; ++a)
          nodes[a] = node_index(geom_, i + (a & 1), j + ((a >> 1) & 1),
                                k + ((a >> 2) & 1));
        for (int gp = 0; gp < 8; ++gp) {
          const int p = 8 * elem + gp;
          for (int a = 0; a < 8; ++a) {
            double qd = 0;
            for (int d = 0; d < 3; ++d) qd += kern.dN[gp][a][d] * q_hist[p][d];
            rhs[nodes[a]] -= kern.wdetJ * (kern.N[gp][a] * e_hist[p] - qd);
          }
        }
      }

  ThermalField out;
  out.values = solve_constrained_bicgstab(L_, dir_, rhs, state.values,
                                          {cfg_.cg_tol, 0});
  out.time = time_ + dt_;

  // Advance every RVE to the accepted macro state.
  std::vector<MacroPair> new_pair(n_gp_);
  elem = 0;
  for (int k = 0; k < geom_.nz; ++k)
    for (int j = 0; j < geom_.ny; ++j)
      for (int i = 0; i < geom_.nx; ++i, ++elem) {
        int nodes[8];
        for (int a = 0; a < 8; ++a)
          nodes[a] = node_index(geom_, i + (a & 1), j + ((a >> 1) & 1),
                                k + ((a >> 2) & 1));
        for (int gp = 0; gp < 8; ++gp) {
          MacroPair mp;
          for (int a = 0; a < 8; ++a) {
            const double v = out.values[nodes[a]];
            mp.theta_bar += kern.N[gp][a] * v;
            mp.grad.x += kern.dN[gp][a][0] * v;
            mp.grad.y += kern.dN[gp][a][1] * v;
            mp.grad.z += kern.dN[gp][a][2] * v;
          }
          new_pair[8 * elem + gp] = mp;
        }
      }

  parallel_gp([&](int gp) {
    std::vector<double> end;
    double e;
    Vec3 q;
    micro_response(micro_state_[gp], prev_pair_[gp], new_pair[gp], end, e, q);
    micro_state_[gp] = std::move(end);
  });
  prev_pair_ = std::move(new_pair);
  time_ = out.time;
  return out;
}

}  // namespace beol
