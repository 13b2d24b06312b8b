#include "beol/homogenize.hpp"

#include <cmath>

#include "beol/errors.hpp"

namespace beol {

const Mat3* HomogenizedProps::kappa_at(double dt) const {
  for (const auto& [d, k] : kappa_transient)
    if (std::abs(d - dt) <= 1e-12 * std::max(std::abs(d), std::abs(dt)))
      return &k;
  return nullptr;
}

namespace {

// Visits every Gauss point of every element. fn receives the element voxel
// indices, node ids, the kernel, the gp index, and the gp position.
template <typename Fn>
void for_each_element(const MaterialGrid& g, Fn fn) {
  const HexKernel kern(g.dx, g.dy, g.dz);
  const double gl = 0.5 / std::sqrt(3.0);
  int nodes[8];
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        for (int a = 0; a < 8; ++a)
          nodes[a] =
              node_index(g, i + (a & 1), j + ((a >> 1) & 1), k + ((a >> 2) & 1));
        const Vec3 c = g.voxel_center(i, j, k);
        Vec3 gp_pos[8];
        for (int gp = 0; gp < 8; ++gp)
          gp_pos[gp] = {c.x + ((gp & 1) ? gl : -gl) * g.dx,
                        c.y + ((gp & 2) ? gl : -gl) * g.dy,
                        c.z + ((gp & 4) ? gl : -gl) * g.dz};
        fn(i, j, k, nodes, kern, gp_pos);
      }
}

double eval_value(const double* N, const int* nodes,
                  const std::vector<double>& v) {
  double s = 0;
  for (int a = 0; a < 8; ++a) s += N[a] * v[nodes[a]];
  return s;
}

Vec3 eval_grad(const double dN[8][3], const int* nodes,
               const std::vector<double>& v) {
  Vec3 gvec;
  for (int a = 0; a < 8; ++a) {
    gvec.x += dN[a][0] * v[nodes[a]];
    gvec.y += dN[a][1] * v[nodes[a]];
    gvec.z += dN[a][2] * v[nodes[a]];
  }
  return gvec;
}

// Nodal values of (x - xbar)_dim.
std::vector<double> coordinate_field(const MaterialGrid& g, int dim) {
  std::vector<double> v(node_count(g));
  const Vec3 xbar = g.centroid();
  for (int k = 0; k <= g.nz; ++k)
    for (int j = 0; j <= g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i)
        v[node_index(g, i, j, k)] = (node_pos(g, i, j, k) - xbar)[dim];
  return v;
}

}  // namespace

double effective_heat_capacity(const MaterialGrid& grid) {
  double sum = 0;
  for (int id : grid.voxel_material) sum += grid.materials[id].rho_cp();
  return sum / static_cast<double>(grid.voxel_count());
}

UpscaledState upscale(const MaterialGrid& grid, const ThermalField& state,
                      const ThermalField& prev, double dt) {
  UpscaledState out;
  const Vec3 xbar = grid.centroid();
  double vol = 0;
  for_each_element(grid, [&](int i, int j, int k, const int* nodes,
                             const HexKernel& kern, const Vec3* gp_pos) {
    const Material& m = grid.mat(i, j, k);
    for (int gp = 0; gp < 8; ++gp) {
      const Vec3 grad = eval_grad(kern.dN[gp], nodes, state.values);
      double dth = 0;
      for (int a = 0; a < 8; ++a)
        dth += kern.N[gp][a] * (state.values[nodes[a]] - prev.values[nodes[a]]);
      const double eps_dot = m.rho_cp() * dth / dt;
      const Vec3 q = grad * (-m.kappa);
      const Vec3 r = gp_pos[gp] - xbar;
      out.q_bar = out.q_bar + (q - r * eps_dot) * kern.wdetJ;
      out.q_naive = out.q_naive + q * kern.wdetJ;
      out.eps_dot_bar += eps_dot * kern.wdetJ;
      vol += kern.wdetJ;
    }
  });
  out.q_bar = out.q_bar * (1.0 / vol);
  out.q_naive = out.q_naive * (1.0 / vol);
  out.eps_dot_bar /= vol;
  return out;
}

Mat3 steady_kappa(const MicroModel& model, double* asymmetry) {
  const MaterialGrid& g = model.grid();
  Mat3 raw;
  for (int dir = 0; dir < 3; ++dir) {
    MicroBC bc;
    bc.grad = {dir == 0 ? 1.0 : 0.0, dir == 1 ? 1.0 : 0.0, dir == 2 ? 1.0 : 0.0};
    const ThermalField th = model.solve_steady(bc);
    Vec3 flux;  // <kappa grad(theta)> = -<q>
    double vol = 0;
    for_each_element(g, [&](int i, int j, int k, const int* nodes,
                            const HexKernel& kern, const Vec3*) {
      const double kap = g.mat(i, j, k).kappa;
      for (int gp = 0; gp < 8; ++gp) {
        flux = flux + eval_grad(kern.dN[gp], nodes, th.values) * (kap * kern.wdetJ);
        vol += kern.wdetJ;
      }
    });
    flux = flux * (1.0 / vol);
    raw(0, dir) = flux.x;
    raw(1, dir) = flux.y;
    raw(2, dir) = flux.z;
  }
  if (asymmetry) {
    const double denom = raw.frobenius();
    *asymmetry = denom > 0 ? (raw - raw.transpose()).frobenius() / denom : 0.0;
  }
  return raw.sym();
}

Mat3 steady_kappa(const MaterialGrid& grid, double* asymmetry) {
  return steady_kappa(MicroModel(grid), asymmetry);
}

namespace {

SensitivityFields corrector_like(const MicroModel& model, double inv_dt) {
  const MaterialGrid& g = model.grid();
  const int n = node_count(g);
  const CsrMatrix& K = model.conductivity();
  const CsrMatrix& M = model.capacity();
  CsrMatrix A = K;
  if (inv_dt > 0) A.add_scaled(M, inv_dt);
  Dirichlet zero = Dirichlet::none(n);
  for (int k = 0; k <= g.nz; ++k)
    for (int j = 0; j <= g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i)
        if (node_on_boundary(g, i, j, k)) zero.flag[node_index(g, i, j, k)] = 1;

  SensitivityFields out;
  std::vector<double> rhs(n), tmp(n);
  for (int dir = 0; dir < 3; ++dir) {
    const std::vector<double> xj = coordinate_field(g, dir);
    K.matvec(xj.data(), rhs.data());
    if (inv_dt > 0) {
      M.matvec(xj.data(), tmp.data());
      for (int a = 0; a < n; ++a) rhs[a] += inv_dt * tmp[a];
    }
    for (double& v : rhs) v = -v;
    out.w[dir] =
        solve_constrained(A, zero, rhs, std::vector<double>(n, 0.0),
                          {model.cg_tol(), 0});
  }
  return out;
}

}  // namespace

SensitivityFields steady_corrector_fields(const MicroModel& model) {
  return corrector_like(model, 0.0);
}

SensitivityFields sensitivity_fields(const MicroModel& model, double dt) {
  if (!(dt > 0)) throw Error("sensitivity_fields requires dt > 0");
  return corrector_like(model, 1.0 / dt);
}

Mat3 transient_kappa(const MicroModel& model, double dt, bool include_w) {
  const MaterialGrid& g = model.grid();
  SensitivityFields sens;
  if (include_w) {
    sens = sensitivity_fields(model, dt);
  } else {
    for (auto& w : sens.w) w.assign(node_count(g), 0.0);
  }
  const Vec3 xbar = g.centroid();
  Mat3 kbar;
  double vol = 0;
  for_each_element(g, [&](int i, int j, int k, const int* nodes,
                          const HexKernel& kern, const Vec3* gp_pos) {
    const Material& m = g.mat(i, j, k);
    const double rc_dt = m.rho_cp() / dt;
    for (int gp = 0; gp < 8; ++gp) {
      const Vec3 r = gp_pos[gp] - xbar;
      for (int dir = 0; dir < 3; ++dir) {
        const Vec3 gw = eval_grad(kern.dN[gp], nodes, sens.w[dir]);
        const double wv = eval_value(kern.N[gp], nodes, sens.w[dir]);
        for (int row = 0; row < 3; ++row) {
          const double e = (row == dir) ? 1.0 : 0.0;
          kbar(row, dir) += kern.wdetJ * (m.kappa * (e + gw[row]) +
                                          rc_dt * r[row] * (r[dir] + wv));
        }
      }
      vol += kern.wdetJ;
    }
  });
  return kbar * (1.0 / vol);
}

Mat3 transient_kappa(const MaterialGrid& grid, double dt, bool include_w) {
  return transient_kappa(MicroModel(grid), dt, include_w);
}

double RampSeries::plateau() const { return qss_z.empty() ? 0.0 : std::abs(qss_z.back()); }

RampSeries rve_ramp_study(const MaterialGrid& grid, double t_L, double dt,
                          double dT_max, double t_end) {
  if (!(t_L > 0) || !(dt > 0) || !(t_end > 0))
    throw Error("ramp study requires positive times");
  if (t_L / dt < 20.0 - 1e-9)
    throw Error("dt must resolve the ramp with at least 20 steps");
  const MicroModel model(grid);
  const double lz = grid.nz * grid.dz;
  const double g_end = dT_max / lz;
  const auto schedule = [&](double t) {
    MicroBC bc;
    bc.grad = {0, 0, g_end * std::min(t / t_L, 1.0)};
    return bc;
  };
  const Mat3 kss = steady_kappa(model);

  RampSeries out;
  ThermalField cur;
  cur.values.assign(node_count(grid), 0.0);
  const int n_steps = static_cast<int>(std::llround(t_end / dt));
  for (int s = 1; s <= n_steps; ++s) {
    ThermalField next = model.step_transient(cur, schedule, dt, 1);
    const UpscaledState up = upscale(grid, next, cur, dt);
    const Vec3 q_ss = (kss * schedule(next.time).grad) * -1.0;
    out.t.push_back(next.time);
    out.qbar_z.push_back(up.q_bar.z);
    out.qavg_z.push_back(up.q_naive.z);
    out.qss_z.push_back(q_ss.z);
    cur = std::move(next);
  }
  return out;
}

HomogenizedProps homogenize_rve(const MaterialGrid& grid,
                                const std::vector<double>& dt_list,
                                const Window& rve_window, double rve_size) {
  const MicroModel model(grid);
  HomogenizedProps props;
  props.rho_cp_eff = effective_heat_capacity(grid);
  props.kappa_ss = steady_kappa(model, &props.kappa_ss_asymmetry);
  for (double dt : dt_list)
    props.kappa_transient.emplace_back(dt, transient_kappa(model, dt));
  props.rve_window = rve_window;
  props.rve_size = rve_size;
  return props;
}

double hill_mandel_residual(const MicroModel& model, const ThermalField& state,
                            const ThermalField& prev, double dt,
                            double delta_theta_bar, Vec3 delta_grad,
                            const std::vector<double>& delta_fluct) {
  const MaterialGrid& g = model.grid();
  const UpscaledState up = upscale(g, state, prev, dt);
  const double lhs = delta_theta_bar * up.eps_dot_bar - delta_grad.dot(up.q_bar);

  const Vec3 xbar = g.centroid();
  double rhs = 0, vol = 0;
  for_each_element(g, [&](int i, int j, int k, const int* nodes,
                          const HexKernel& kern, const Vec3* gp_pos) {
    const Material& m = g.mat(i, j, k);
    for (int gp = 0; gp < 8; ++gp) {
      const Vec3 r = gp_pos[gp] - xbar;
      double dth = 0;
      for (int a = 0; a < 8; ++a)
        dth += kern.N[gp][a] * (state.values[nodes[a]] - prev.values[nodes[a]]);
      const double eps_dot = m.rho_cp() * dth / dt;
      const Vec3 q = eval_grad(kern.dN[gp], nodes, state.values) * (-m.kappa);
      const double dtheta =
          delta_theta_bar + delta_grad.dot(r) + eval_value(kern.N[gp], nodes, delta_fluct);
      const Vec3 dgrad = delta_grad + eval_grad(kern.dN[gp], nodes, delta_fluct);
      rhs += kern.wdetJ * (dtheta * eps_dot - dgrad.dot(q));
      vol += kern.wdetJ;
    }
  });
  rhs /= vol;
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  return std::abs(lhs - rhs) / scale;
}

std::pair<double, double> fluctuation_averages(const MaterialGrid& grid,
                                               const ThermalField& field) {
  const Vec3 xbar = grid.centroid();
  double theta_bar = 0, vol = 0;
  Vec3 grad_bar;
  for_each_element(grid, [&](int, int, int, const int* nodes,
                             const HexKernel& kern, const Vec3*) {
    for (int gp = 0; gp < 8; ++gp) {
      theta_bar += kern.wdetJ * eval_value(kern.N[gp], nodes, field.values);
      grad_bar = grad_bar + eval_grad(kern.dN[gp], nodes, field.values) * kern.wdetJ;
      vol += kern.wdetJ;
    }
  });
  theta_bar /= vol;
  grad_bar = grad_bar * (1.0 / vol);

  double tilde_avg = 0;
  Vec3 tilde_grad;
  for_each_element(grid, [&](int, int, int, const int* nodes,
                             const HexKernel& kern, const Vec3* gp_pos) {
    for (int gp = 0; gp < 8; ++gp) {
      const Vec3 r = gp_pos[gp] - xbar;
      const double tilde =
          eval_value(kern.N[gp], nodes, field.values) - theta_bar - grad_bar.dot(r);
      tilde_avg += kern.wdetJ * tilde;
      tilde_grad = tilde_grad +
                   (eval_grad(kern.dN[gp], nodes, field.values) - grad_bar) * kern.wdetJ;
    }
  });
  tilde_avg /= vol;
  tilde_grad = tilde_grad * (1.0 / vol);
  return {tilde_avg, tilde_grad.norm()};
}

std::pair<double, double> conductivity_bounds(const MaterialGrid& grid) {
  double harm = 0, arith = 0;
  for (int id : grid.voxel_material) {
    const double k = grid.materials[id].kappa;
    harm += 1.0 / k;
    arith += k;
  }
  const auto n = static_cast<double>(grid.voxel_count());
  return {n / harm, arith / n};
}

}  // namespace beol
