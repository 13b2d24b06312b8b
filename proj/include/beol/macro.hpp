#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "beol/fem.hpp"
#include "beol/property_map.hpp"

namespace beol {

// Piecewise-constant surface heat flux, W/m^2, positive into the domain.
// Origin/size are in the face's tangent coordinates.
struct FluxMap {
  int nx = 0, ny = 0;
  Vec2 origin, size;
  std::vector<double> q;  // row-major, x fastest

  double value(int i, int j) const { return q[j * nx + i]; }
  double value_at(double u, double v) const;
};

FluxMap read_flux_map(std::istream& in);
FluxMap read_flux_map_file(const std::string& path);
void write_flux_map(const FluxMap& f, std::ostream& out);

enum Face : int { XMin = 0, XMax, YMin, YMax, ZMin, ZMax };

struct FaceBC {
  enum Type { Adiabatic, DirichletT, NeumannUniform, NeumannMap, Robin } type = Adiabatic;
  double value = 0;   // Dirichlet T or uniform flux
  double h = 0;       // Robin film coefficient
  double t_amb = 0;   // Robin ambient
  const FluxMap* flux = nullptr;

  static FaceBC dirichlet(double T) { return {DirichletT, T}; }
  static FaceBC neumann(double q) { return {NeumannUniform, q}; }
  static FaceBC neumann_map(const FluxMap* f) { return {NeumannMap, 0, 0, 0, f}; }
  static FaceBC robin(double h, double t_amb) { return {Robin, 0, h, t_amb}; }
};

enum class PropertyMode { Uniform, Map, Resolved };

// Die-scale problem on a structured hex mesh. `geometry` carries the mesh;
// in Resolved mode it also carries the per-voxel materials.
struct MacroProblem {
  MaterialGrid geometry;
  PropertyMode mode = PropertyMode::Uniform;
  Material uniform;
  const PropertyMap* map = nullptr;
  std::optional<double> map_dt;  // transient tensor; empty -> steady tensor
  std::array<FaceBC, 6> faces;
  double dt = 1e-3;
  double t_end = 0;
  double T0 = 300;
  double cg_tol = 1e-10;
};

MaterialGrid make_mesh(int nx, int ny, int nz, double dx, double dy, double dz,
                       Vec3 origin = {});

class MacroModel {
 public:
  explicit MacroModel(const MacroProblem& p);

  const MaterialGrid& geometry() const { return p_.geometry; }
  ThermalField initial() const;
  ThermalField solve_steady() const;
  ThermalField step(const ThermalField& state) const;

  struct Sample {
    double t, t_max, t_avg;
  };
  struct TransientResult {
    ThermalField final;
    std::vector<Sample> series;
  };
  TransientResult run_transient() const;

  double t_max(const ThermalField& f) const;
  double t_avg(const ThermalField& f) const;  // lumped-mass volume average
  double face_average(Face face, const ThermalField& f) const;

  // |stored-energy rate - net boundary inflow| / scale for one accepted step.
  double energy_balance_residual(const ThermalField& prev,
                                 const ThermalField& next) const;

 private:
  MacroProblem p_;
  CsrMatrix K_, M_;
  std::vector<double> f_;
  Dirichlet dir_;
  bool has_dirichlet_ = false, has_robin_ = false;
  mutable double cached_dt_ = 0;
  mutable CsrMatrix cached_A_;
};

ThermalField solve_steady_macro(const MacroProblem& p);
ThermalField step_macro(const MacroProblem& p, const ThermalField& state);
MacroModel::TransientResult run_transient(const MacroProblem& p);

// Steady solve with explicit per-voxel materials (validation reference).
struct ResolvedResult {
  ThermalField field;
  double t_top_avg = 0, t_bot_avg = 0;
};
ResolvedResult run_resolved(const MaterialGrid& grid,
                            const std::array<FaceBC, 6>& faces,
                            double cg_tol = 1e-10);

struct ValidationRow {
  std::string model;
  double t_top_avg = 0, t_bot_avg = 0;
  double error_pct = 0;  // vs resolved T_bot,avg; 0 for the resolved row
};

struct ValidationOptions {
  double voxel_xy = 5e-7;   // resolved/macro in-plane resolution
  double voxel_z = 0;       // 0 -> default_dz
  double flux = 1e6;        // bottom Neumann, W/m^2
  double h = 1e5;           // top Robin film coefficient
  double t_amb = 300;       // top Robin ambient
  double cg_tol = 1e-10;
};

// Table-style validation: fully resolved reference vs homogenized models
// built from maps at each RVE size, identical mesh and BCs.
std::vector<ValidationRow> compare_homogenized_vs_resolved(
    const LayoutDatabase& db, const TechStack& stack,
    const std::string& top_cell, const Window& window,
    const std::vector<double>& rve_sizes, const ValidationOptions& opts = {});

// Coupled two-scale stepping: every macro quadrature point owns an RVE whose
// homogenized flux and energy rate drive the macro backward-Euler step.
struct CoupledConfig {
  MaterialGrid rve;
  int subcycles = 1;
  int threads = 1;
  int max_points = 10000;
  double cg_tol = 1e-12;
};

class CoupledMacro {
 public:
  CoupledMacro(MaterialGrid geometry, std::array<FaceBC, 6> faces, double dt,
               CoupledConfig config);

  ThermalField initialize(double T0);
  ThermalField step(const ThermalField& state);

 private:
  struct MacroPair {
    double theta_bar = 0;
    Vec3 grad;
  };

  void micro_response(const std::vector<double>& init, MacroPair from,
                      MacroPair to, std::vector<double>& end_state,
                      double& eps_dot_bar, Vec3& q_bar) const;

  MaterialGrid geom_;
  std::array<FaceBC, 6> faces_;
  double dt_;
  CoupledConfig cfg_;
  MicroModel micro_;
  int n_gp_ = 0;
  // constant affine tangent of the micro response
  double a_ = 0;   // d eps_dot_bar / d theta_bar
  Vec3 b_, c_;     // d eps_dot_bar / d grad, d q_bar / d theta_bar
  Mat3 D_;         // d q_bar / d grad
  CsrMatrix L_;    // macro operator including face terms
  std::vector<double> f_bc_;  // boundary load
  Dirichlet dir_;
  std::vector<std::vector<double>> micro_state_;  // per gp
  std::vector<MacroPair> prev_pair_;              // per gp
  double time_ = 0;
};

}  // namespace beol
