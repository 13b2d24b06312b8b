#include "beol/fem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "beol/errors.hpp"

namespace beol {

void CsrMatrix::matvec(const double* x, double* y) const {
  for (int r = 0; r < n; ++r) {
    double s = 0;
    for (int p = row_ptr[r]; p < row_ptr[r + 1]; ++p) s += val[p] * x[col[p]];
    y[r] = s;
  }
}

std::vector<double> CsrMatrix::matvec(const std::vector<double>& x) const {
  std::vector<double> y(n);
  matvec(x.data(), y.data());
  return y;
}

double& CsrMatrix::at(int r, int c) {
  auto first = col.begin() + row_ptr[r];
  auto last = col.begin() + row_ptr[r + 1];
  auto it = std::lower_bound(first, last, c);
  if (it == last || *it != c) throw Error("entry outside sparsity pattern");
  return val[it - col.begin()];
}

double CsrMatrix::get(int r, int c) const {
  auto first = col.begin() + row_ptr[r];
  auto last = col.begin() + row_ptr[r + 1];
  auto it = std::lower_bound(first, last, c);
  if (it == last || *it != c) return 0.0;
  return val[it - col.begin()];
}

void CsrMatrix::add_scaled(const CsrMatrix& o, double alpha) {
  for (std::size_t i = 0; i < val.size(); ++i) val[i] += alpha * o.val[i];
}

double CsrMatrix::symmetry_gap() const {
  double gap = 0;
  for (int r = 0; r < n; ++r)
    for (int p = row_ptr[r]; p < row_ptr[r + 1]; ++p)
      gap = std::max(gap, std::abs(val[p] - get(col[p], r)));
  return gap;
}

namespace {

double masked_dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// y = A x with constrained rows/columns eliminated (x is zero there on entry).
void masked_matvec(const CsrMatrix& A, const Dirichlet& bc,
                   const std::vector<double>& x, std::vector<double>& y) {
  A.matvec(x.data(), y.data());
  for (int i = 0; i < A.n; ++i)
    if (bc.flag[i]) y[i] = 0;
}

struct ReducedSystem {
  std::vector<double> b;     // moved rhs, zero at constrained dofs
  std::vector<double> x;     // initial guess, zero at constrained dofs
  std::vector<double> diag;  // Jacobi, 1 at constrained dofs
  double bnorm = 0;
};

ReducedSystem reduce(const CsrMatrix& A, const Dirichlet& bc,
                     const std::vector<double>& f,
                     const std::vector<double>& x0) {
  ReducedSystem rs;
  const int n = A.n;
  rs.b.assign(n, 0.0);
  rs.x.assign(n, 0.0);
  rs.diag.assign(n, 1.0);
  for (int i = 0; i < n; ++i) {
    if (bc.flag[i]) continue;
    double moved = 0;
    for (int p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p)
      if (bc.flag[A.col[p]]) moved += A.val[p] * bc.value[A.col[p]];
    rs.b[i] = f[i] - moved;
    rs.x[i] = x0.empty() ? 0.0 : x0[i];
    rs.diag[i] = A.get(i, i);
    if (rs.diag[i] == 0) rs.diag[i] = 1.0;
  }
  rs.bnorm = std::sqrt(masked_dot(rs.b, rs.b));
  return rs;
}

int iteration_cap(const CsrMatrix& A, const Dirichlet& bc,
                  const CgOptions& opts) {
  if (opts.max_iter > 0) return opts.max_iter;
  double dmin = 0, dmax = 0;
  bool first = true;
  for (int i = 0; i < A.n; ++i) {
    if (bc.flag[i]) continue;
    const double d = std::abs(A.get(i, i));
    if (first || d < dmin) dmin = d;
    if (first || d > dmax) dmax = d;
    first = false;
  }
  const double contrast = (dmin > 0) ? dmax / dmin : 1.0;
  const double cap = 20.0 * std::cbrt(static_cast<double>(A.n)) * contrast;
  return static_cast<int>(std::clamp(cap, 500.0, 2.0e6));
}

std::vector<double> finish(std::vector<double> x, const Dirichlet& bc) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (bc.flag[i]) x[i] = bc.value[i];
  return x;
}

}  // namespace

std::vector<double> solve_constrained(const CsrMatrix& A, const Dirichlet& bc,
                                      const std::vector<double>& f,
                                      const std::vector<double>& x0,
                                      const CgOptions& opts) {
  const int n = A.n;
  ReducedSystem rs = reduce(A, bc, f, x0);
  if (rs.bnorm == 0) return finish(std::vector<double>(n, 0.0), bc);

  std::vector<double> r(n), z(n), p(n), q(n);
  masked_matvec(A, bc, rs.x, q);
  for (int i = 0; i < n; ++i) r[i] = rs.b[i] - q[i];
  for (int i = 0; i < n; ++i) z[i] = bc.flag[i] ? 0.0 : r[i] / rs.diag[i];
  p = z;
  double rho = masked_dot(r, z);
  double rnorm = std::sqrt(masked_dot(r, r));
  const double target = opts.rel_tol * rs.bnorm;
  const int cap = iteration_cap(A, bc, opts);
  std::vector<double> history;
  history.push_back(rnorm);

  int it = 0;
  while (rnorm > target) {
    if (it++ >= cap)
      throw SolverError("CG failed to converge in " + std::to_string(cap) +
                            " iterations",
                        std::move(history));
    masked_matvec(A, bc, p, q);
    const double alpha = rho / masked_dot(p, q);
    for (int i = 0; i < n; ++i) rs.x[i] += alpha * p[i];
    for (int i = 0; i < n; ++i) r[i] -= alpha * q[i];
    for (int i = 0; i < n; ++i) z[i] = bc.flag[i] ? 0.0 : r[i] / rs.diag[i];
    const double rho_new = masked_dot(r, z);
    const double beta = rho_new / rho;
    rho = rho_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    rnorm = std::sqrt(masked_dot(r, r));
    history.push_back(rnorm);
  }
  return finish(std::move(rs.x), bc);
}

std::vector<double> solve_constrained_bicgstab(const CsrMatrix& A,
                                               const Dirichlet& bc,
                                               const std::vector<double>& f,
                                               const std::vector<double>& x0,
                                               const CgOptions& opts) {
  const int n = A.n;
  ReducedSystem rs = reduce(A, bc, f, x0);
  if (rs.bnorm == 0) return finish(std::vector<double>(n, 0.0), bc);

  std::vector<double> r(n), r0(n), p(n, 0.0), v(n, 0.0), s(n), t(n), y(n), z(n);
  masked_matvec(A, bc, rs.x, v);
  for (int i = 0; i < n; ++i) r[i] = rs.b[i] - v[i];
  r0 = r;
  std::fill(v.begin(), v.end(), 0.0);
  double rho = 1, alpha = 1, omega = 1;
  double rnorm = std::sqrt(masked_dot(r, r));
  const double target = opts.rel_tol * rs.bnorm;
  const int cap = iteration_cap(A, bc, opts);
  std::vector<double> history{rnorm};

  int it = 0;
  while (rnorm > target) {
    if (it++ >= cap)
      throw SolverError("BiCGSTAB failed to converge in " +
                            std::to_string(cap) + " iterations",
                        std::move(history));
    const double rho_new = masked_dot(r0, r);
    if (rho_new == 0)
      throw SolverError("BiCGSTAB breakdown", std::move(history));
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    for (int i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    for (int i = 0; i < n; ++i) y[i] = bc.flag[i] ? 0.0 : p[i] / rs.diag[i];
    masked_matvec(A, bc, y, v);
    alpha = rho / masked_dot(r0, v);
    for (int i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    for (int i = 0; i < n; ++i) z[i] = bc.flag[i] ? 0.0 : s[i] / rs.diag[i];
    masked_matvec(A, bc, z, t);
    const double tt = masked_dot(t, t);
    omega = (tt == 0) ? 0.0 : masked_dot(t, s) / tt;
    for (int i = 0; i < n; ++i) rs.x[i] += alpha * y[i] + omega * z[i];
    for (int i = 0; i < n; ++i) r[i] = s[i] - omega * t[i];
    rnorm = std::sqrt(masked_dot(r, r));
    history.push_back(rnorm);
    if (omega == 0) {
      if (rnorm <= target) break;
      throw SolverError("BiCGSTAB breakdown (omega = 0)", std::move(history));
    }
  }
  return finish(std::move(rs.x), bc);
}

HexKernel::HexKernel(double dx, double dy, double dz) {
  const double g = 1.0 / std::sqrt(3.0);
  wdetJ = dx * dy * dz / 8.0;
  const double inv[3] = {2.0 / dx, 2.0 / dy, 2.0 / dz};
  for (int gp = 0; gp < 8; ++gp) {
    const double xi[3] = {(gp & 1) ? g : -g, (gp & 2) ? g : -g,
                          (gp & 4) ? g : -g};
    for (int a = 0; a < 8; ++a) {
      const double s[3] = {(a & 1) ? 1.0 : -1.0, (a & 2) ? 1.0 : -1.0,
                           (a & 4) ? 1.0 : -1.0};
      const double f[3] = {0.5 * (1 + s[0] * xi[0]), 0.5 * (1 + s[1] * xi[1]),
                           0.5 * (1 + s[2] * xi[2])};
      N[gp][a] = f[0] * f[1] * f[2];
      dN[gp][a][0] = 0.5 * s[0] * f[1] * f[2] * inv[0];
      dN[gp][a][1] = f[0] * 0.5 * s[1] * f[2] * inv[1];
      dN[gp][a][2] = f[0] * f[1] * 0.5 * s[2] * inv[2];
    }
  }
}

void HexKernel::conductivity(double kappa, double Ke[8][8]) const {
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b) {
      double s = 0;
      for (int gp = 0; gp < 8; ++gp)
        s += dN[gp][a][0] * dN[gp][b][0] + dN[gp][a][1] * dN[gp][b][1] +
             dN[gp][a][2] * dN[gp][b][2];
      Ke[a][b] = kappa * wdetJ * s;
    }
}

void HexKernel::conductivity(const Mat3 kappa[8], double Ke[8][8]) const {
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b) {
      double s = 0;
      for (int gp = 0; gp < 8; ++gp)
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            s += dN[gp][a][i] * kappa[gp](i, j) * dN[gp][b][j];
      Ke[a][b] = wdetJ * s;
    }
}

void HexKernel::mass(double rho_cp, double Me[8][8]) const {
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b) {
      double s = 0;
      for (int gp = 0; gp < 8; ++gp) s += N[gp][a] * N[gp][b];
      Me[a][b] = rho_cp * wdetJ * s;
    }
}

int node_count(const MaterialGrid& g) {
  return (g.nx + 1) * (g.ny + 1) * (g.nz + 1);
}

int node_index(const MaterialGrid& g, int i, int j, int k) {
  return i + (g.nx + 1) * (j + (g.ny + 1) * k);
}

Vec3 node_pos(const MaterialGrid& g, int i, int j, int k) {
  return {g.origin.x + i * g.dx, g.origin.y + j * g.dy, g.origin.z + k * g.dz};
}

bool node_on_boundary(const MaterialGrid& g, int i, int j, int k) {
  return i == 0 || i == g.nx || j == 0 || j == g.ny || k == 0 || k == g.nz;
}

CsrMatrix structured_pattern(const MaterialGrid& g) {
  CsrMatrix A;
  A.n = node_count(g);
  A.row_ptr.reserve(A.n + 1);
  A.row_ptr.push_back(0);
  for (int k = 0; k <= g.nz; ++k)
    for (int j = 0; j <= g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i) {
        for (int dk = -1; dk <= 1; ++dk)
          for (int dj = -1; dj <= 1; ++dj)
            for (int di = -1; di <= 1; ++di) {
              const int ii = i + di, jj = j + dj, kk = k + dk;
              if (ii < 0 || ii > g.nx || jj < 0 || jj > g.ny || kk < 0 ||
                  kk > g.nz)
                continue;
              A.col.push_back(node_index(g, ii, jj, kk));
            }
        A.row_ptr.push_back(static_cast<int>(A.col.size()));
      }
  A.val.assign(A.col.size(), 0.0);
  return A;
}

namespace {

template <typename ElemValue>
CsrMatrix assemble(const MaterialGrid& g, ElemValue elem_coeff, bool mass) {
  CsrMatrix A = structured_pattern(g);
  const HexKernel kern(g.dx, g.dy, g.dz);
  double Ee[8][8];
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const double c = elem_coeff(i, j, k);
        if (mass)
          kern.mass(c, Ee);
        else
          kern.conductivity(c, Ee);
        int nodes[8];
        for (int a = 0; a < 8; ++a)
          nodes[a] =
              node_index(g, i + (a & 1), j + ((a >> 1) & 1), k + ((a >> 2) & 1));
        for (int a = 0; a < 8; ++a)
          for (int b = 0; b < 8; ++b) A.at(nodes[a], nodes[b]) += Ee[a][b];
      }
  return A;
}

}  // namespace

CsrMatrix assemble_conductivity(const MaterialGrid& g) {
  return assemble(
      g, [&](int i, int j, int k) { return g.mat(i, j, k).kappa; }, false);
}

CsrMatrix assemble_capacity(const MaterialGrid& g) {
  return assemble(
      g, [&](int i, int j, int k) { return g.mat(i, j, k).rho_cp(); }, true);
}

Dirichlet affine_boundary(const MaterialGrid& g, const MicroBC& bc) {
  Dirichlet d = Dirichlet::none(node_count(g));
  const Vec3 xbar = g.centroid();
  for (int k = 0; k <= g.nz; ++k)
    for (int j = 0; j <= g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i) {
        if (!node_on_boundary(g, i, j, k)) continue;
        const int n = node_index(g, i, j, k);
        d.flag[n] = 1;
        d.value[n] = bc.value_at(node_pos(g, i, j, k), xbar);
      }
  return d;
}

std::vector<double> affine_field(const MaterialGrid& g, const MicroBC& bc) {
  std::vector<double> v(node_count(g));
  const Vec3 xbar = g.centroid();
  for (int k = 0; k <= g.nz; ++k)
    for (int j = 0; j <= g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i)
        v[node_index(g, i, j, k)] = bc.value_at(node_pos(g, i, j, k), xbar);
  return v;
}

MicroModel::MicroModel(MaterialGrid grid, double cg_tol)
    : grid_(std::move(grid)),
      K_(assemble_conductivity(grid_)),
      M_(assemble_capacity(grid_)),
      cg_tol_(cg_tol) {}

const CsrMatrix& MicroModel::system_for(double dt_sub) const {
  if (cached_dt_ != dt_sub) {
    cached_A_ = K_;
    cached_A_.add_scaled(M_, 1.0 / dt_sub);
    cached_dt_ = dt_sub;
  }
  return cached_A_;
}

ThermalField MicroModel::solve_steady(const MicroBC& bc) const {
  const Dirichlet d = affine_boundary(grid_, bc);
  const std::vector<double> x0 = affine_field(grid_, bc);
  const std::vector<double> f(node_count(grid_), 0.0);
  ThermalField out;
  out.values = solve_constrained(K_, d, f, x0, {cg_tol_, 0});
  return out;
}

ThermalField MicroModel::step_transient(const ThermalField& state,
                                        const MicroBCSchedule& bc_at,
                                        double dt, int subcycles) const {
  if (!(dt > 0) || subcycles < 1) throw Error("invalid transient step");
  const double dt_sub = dt / subcycles;
  const CsrMatrix& A = system_for(dt_sub);
  ThermalField cur = state;
  std::vector<double> rhs(node_count(grid_));
  for (int s = 1; s <= subcycles; ++s) {
    const double t_end = state.time + s * dt_sub;
    M_.matvec(cur.values.data(), rhs.data());
    for (double& v : rhs) v /= dt_sub;
    const Dirichlet d = affine_boundary(grid_, bc_at(t_end));
    cur.values = solve_constrained(A, d, rhs, cur.values, {cg_tol_, 0});
    cur.time = t_end;
  }
  return cur;
}

ThermalField solve_steady(const MaterialGrid& g, const MicroBC& bc) {
  return MicroModel(g).solve_steady(bc);
}

ThermalField step_transient(const MaterialGrid& g, const ThermalField& state,
                            const MicroBCSchedule& bc_at, double dt,
                            int subcycles) {
  return MicroModel(g).step_transient(state, bc_at, dt, subcycles);
}

void write_vtk_temperature(const MaterialGrid& g, const ThermalField& f,
                           const std::string& path) {
  std::ofstream out(path);
  out << "# vtk DataFile Version 3.0\nnodal temperature\nASCII\n"
      << "DATASET STRUCTURED_POINTS\n"
      << "DIMENSIONS " << g.nx + 1 << ' ' << g.ny + 1 << ' ' << g.nz + 1
      << '\n'
      << "ORIGIN " << g.origin.x << ' ' << g.origin.y << ' ' << g.origin.z
      << '\n'
      << "SPACING " << g.dx << ' ' << g.dy << ' ' << g.dz << '\n'
      << "POINT_DATA " << node_count(g) << '\n'
      << "SCALARS temperature double 1\nLOOKUP_TABLE default\n";
  out.precision(17);
  for (double v : f.values) out << v << '\n';
}

}  // namespace beol
