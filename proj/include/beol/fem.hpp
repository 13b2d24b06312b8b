#pragma once

#include <functional>
#include <string>
#include <vector>

#include "beol/grid.hpp"

namespace beol {

// Compressed sparse row matrix with a fixed pattern.
struct CsrMatrix {
  int n = 0;
  std::vector<int> row_ptr;
  std::vector<int> col;
  std::vector<double> val;

  void matvec(const double* x, double* y) const;
  std::vector<double> matvec(const std::vector<double>& x) const;
  double& at(int r, int c);
  double get(int r, int c) const;
  // this += alpha * o; patterns must match.
  void add_scaled(const CsrMatrix& o, double alpha);
  double symmetry_gap() const;  // max |A - A^T| entry
};

struct Dirichlet {
  std::vector<char> flag;    // nonzero -> constrained
  std::vector<double> value;
  static Dirichlet none(int n) { return {std::vector<char>(n, 0), std::vector<double>(n, 0.0)}; }
};

struct CgOptions {
  double rel_tol = 1e-10;
  int max_iter = 0;  // 0 -> heuristic from size and diagonal contrast
};

// Jacobi-preconditioned CG with symmetric row/column elimination of the
// constrained dofs. Deterministic serial reductions. Throws SolverError with
// the residual history on non-convergence.
std::vector<double> solve_constrained(const CsrMatrix& A, const Dirichlet& bc,
                                      const std::vector<double>& f,
                                      const std::vector<double>& x0,
                                      const CgOptions& opts = {});

// Jacobi-preconditioned BiCGSTAB for the mildly nonsymmetric coupled system.
std::vector<double> solve_constrained_bicgstab(const CsrMatrix& A,
                                               const Dirichlet& bc,
                                               const std::vector<double>& f,
                                               const std::vector<double>& x0,
                                               const CgOptions& opts = {});

// Nodal temperature on the structured hex mesh of a MaterialGrid.
struct ThermalField {
  std::vector<double> values;  // (nx+1)(ny+1)(nz+1), x fastest
  double time = 0;
};

// Homogeneous-temperature RVE boundary data: theta(x) = theta_bar + g.(x-xbar).
struct MicroBC {
  double theta_bar = 0;
  Vec3 grad;
  double value_at(Vec3 x, Vec3 xbar) const { return theta_bar + grad.dot(x - xbar); }
};

using MicroBCSchedule = std::function<MicroBC(double t)>;

// Trilinear hex reference element for a fixed voxel size: shape values and
// physical gradients at the 8 Gauss points.
struct HexKernel {
  double N[8][8];      // [gp][node]
  double dN[8][8][3];  // [gp][node][dim]
  double wdetJ;        // weight * |J|, identical at all 8 points

  HexKernel(double dx, double dy, double dz);
  void conductivity(double kappa, double Ke[8][8]) const;
  void conductivity(const Mat3 kappa[8], double Ke[8][8]) const;  // per-gp tensor
  void mass(double rho_cp, double Me[8][8]) const;
};

// Node indexing helpers for the (nx+1)(ny+1)(nz+1) lattice of a grid.
int node_count(const MaterialGrid& g);
int node_index(const MaterialGrid& g, int i, int j, int k);
Vec3 node_pos(const MaterialGrid& g, int i, int j, int k);
bool node_on_boundary(const MaterialGrid& g, int i, int j, int k);

CsrMatrix structured_pattern(const MaterialGrid& g);  // 27-point stencil
CsrMatrix assemble_conductivity(const MaterialGrid& g);
CsrMatrix assemble_capacity(const MaterialGrid& g);

// Affine Dirichlet data on every boundary node of the RVE box.
Dirichlet affine_boundary(const MaterialGrid& g, const MicroBC& bc);
// The affine field evaluated at every node (also the exact homogeneous
// solution and a good CG starting point).
std::vector<double> affine_field(const MaterialGrid& g, const MicroBC& bc);

// Micro-scale model: assembles once, then serves steady and transient solves.
class MicroModel {
 public:
  explicit MicroModel(MaterialGrid grid, double cg_tol = 1e-10);

  const MaterialGrid& grid() const { return grid_; }
  const CsrMatrix& conductivity() const { return K_; }
  const CsrMatrix& capacity() const { return M_; }
  double cg_tol() const { return cg_tol_; }

  ThermalField solve_steady(const MicroBC& bc) const;
  // `subcycles` backward-Euler substeps of size dt/subcycles, boundary data
  // evaluated at each substep end time.
  ThermalField step_transient(const ThermalField& state,
                              const MicroBCSchedule& bc_at, double dt,
                              int subcycles = 1) const;

 private:
  const CsrMatrix& system_for(double dt_sub) const;  // K + M/dt, cached

  MaterialGrid grid_;
  CsrMatrix K_, M_;
  double cg_tol_;
  mutable double cached_dt_ = 0;
  mutable CsrMatrix cached_A_;
};

// Convenience wrappers over MicroModel.
ThermalField solve_steady(const MaterialGrid& g, const MicroBC& bc);
ThermalField step_transient(const MaterialGrid& g, const ThermalField& state,
                            const MicroBCSchedule& bc_at, double dt,
                            int subcycles = 1);

void write_vtk_temperature(const MaterialGrid& g, const ThermalField& f,
                           const std::string& path);

}  // namespace beol
