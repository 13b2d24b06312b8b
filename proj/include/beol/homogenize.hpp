#pragma once

#include <array>
#include <utility>
#include <vector>

#include "beol/fem.hpp"

namespace beol {

// Effective properties of one RVE: volumetric heat capacity, steady
// conductivity, and the timestep-dependent transient conductivities.
struct HomogenizedProps {
  double rho_cp_eff = 0;  // J/(m^3*K)
  Mat3 kappa_ss;
  double kappa_ss_asymmetry = 0;  // ||K - K^T|| / ||K|| before symmetrization
  std::vector<std::pair<double, Mat3>> kappa_transient;  // (dt, raw tensor)
  Window rve_window;
  double rve_size = 0;

  const Mat3* kappa_at(double dt) const;  // nullptr if dt absent
};

// Volume-averaged flux and energy rate returned to the macroscale.
struct UpscaledState {
  Vec3 q_bar;              // <q - eps_dot (x - xbar)>, q = -kappa grad(theta)
  double eps_dot_bar = 0;  // <eps_dot>
  Vec3 q_naive;        // <q>, without the inertia moment
};

// Fluctuation sensitivities w_j, one nodal field per macro gradient
// direction; zero on the RVE boundary.
struct SensitivityFields {
  std::array<std::vector<double>, 3> w;
};

double effective_heat_capacity(const MaterialGrid& grid);

UpscaledState upscale(const MaterialGrid& grid, const ThermalField& state,
                      const ThermalField& prev, double dt);

Mat3 steady_kappa(const MicroModel& model, double* asymmetry = nullptr);
Mat3 steady_kappa(const MaterialGrid& grid, double* asymmetry = nullptr);

// Steady corrector fields: K w_j = -K x_j on the interior, w_j = 0 on the
// boundary (the dt -> infinity limit of sensitivity_fields).
SensitivityFields steady_corrector_fields(const MicroModel& model);

SensitivityFields sensitivity_fields(const MicroModel& model, double dt);

// Transient effective conductivity for timestep dt. `include_w = false` drops
// the fluctuation sensitivity (diagnostic mode).
Mat3 transient_kappa(const MicroModel& model, double dt, bool include_w = true);
Mat3 transient_kappa(const MaterialGrid& grid, double dt, bool include_w = true);

// Single-RVE ramp study: z gradient ramping linearly to dT_max/Lz over t_L,
// held constant after. Emits per step the homogenized flux, the naive flux
// average, and the steady-state prediction (z components).
struct RampSeries {
  std::vector<double> t;
  std::vector<double> qbar_z;
  std::vector<double> qavg_z;
  std::vector<double> qss_z;
  double plateau() const;  // steady flux magnitude after the ramp
};

RampSeries rve_ramp_study(const MaterialGrid& grid, double t_L, double dt,
                          double dT_max, double t_end);

// Full per-RVE pipeline used by property maps.
HomogenizedProps homogenize_rve(const MaterialGrid& grid,
                                const std::vector<double>& dt_list,
                                const Window& rve_window, double rve_size);

// Diagnostics used by the verification suite.

// |macro virtual power - volume-averaged micro virtual power| / scale, for a
// converged transient step and an arbitrary macro test pair plus an
// admissible fluctuation test field (zero on the boundary).
double hill_mandel_residual(const MicroModel& model, const ThermalField& state,
                            const ThermalField& prev, double dt,
                            double delta_theta_bar, Vec3 delta_grad,
                            const std::vector<double>& delta_fluct);

// Downscaling consistency: returns (<theta_tilde>, |<grad theta_tilde>|)
// where the macro pair is recovered from the field by volume averaging.
std::pair<double, double> fluctuation_averages(const MaterialGrid& grid,
                                               const ThermalField& field);

// Reuss/Voigt bounds of the constituent conductivities actually present.
std::pair<double, double> conductivity_bounds(const MaterialGrid& grid);

}  // namespace beol
