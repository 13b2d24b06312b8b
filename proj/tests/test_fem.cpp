#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "beol/errors.hpp"
#include "beol/fem.hpp"
#include "beol/synthetic.hpp"

using namespace beol;

namespace {

// z-laminate of the built-in stack layers: Al / SiO2 / Al / ...
MaterialGrid laminate(int nx, int ny, int nz, double h) {
  const TechStack ts = synthetic::tech();
  MaterialGrid g = uniform_grid(ts.materials[0], nx, ny, nz, h, h, h);
  g.materials = ts.materials;
  const int al = ts.material_index("Al"), ox = ts.material_index("SiO2");
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        g.voxel_material[g.vox(i, j, k)] = (k % 2 ? ox : al);
  return g;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("element conductivity matrix on the unit cube") {
  HexKernel kern(1.0, 1.0, 1.0);
  double Ke[8][8];
  kern.conductivity(1.0, Ke);
  // classic trilinear hex values: diagonal 1/3, full row sums zero
  for (int a = 0; a < 8; ++a) {
    CHECK(Ke[a][a] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    double row = 0;
    for (int b = 0; b < 8; ++b) {
      row += Ke[a][b];
      CHECK(Ke[a][b] == doctest::Approx(Ke[b][a]).epsilon(1e-12));
    }
    CHECK(row == doctest::Approx(0.0).epsilon(1e-12));
  }
  // opposite corner (distance sqrt(3)) couples with -1/12
  CHECK(Ke[0][7] == doctest::Approx(-1.0 / 12.0).epsilon(1e-12));
}

TEST_CASE("element mass matrix is the consistent one") {
  const double rho_cp = 5.0, V = 2.0 * 3.0 * 4.0;
  HexKernel kern(2.0, 3.0, 4.0);
  double Me[8][8];
  kern.mass(rho_cp, Me);
  CHECK(Me[0][0] == doctest::Approx(rho_cp * V / 27.0).epsilon(1e-12));
  CHECK(Me[0][7] == doctest::Approx(rho_cp * V / 216.0).epsilon(1e-12));
  double total = 0;
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b) total += Me[a][b];
  CHECK(total == doctest::Approx(rho_cp * V).epsilon(1e-12));
}

TEST_CASE("tensor-conductivity kernel matches the scalar one") {
  HexKernel kern(1e-6, 2e-6, 0.5e-6);
  double Ks[8][8], Kt[8][8];
  kern.conductivity(3.7, Ks);
  Mat3 iso[8];
  for (int gp = 0; gp < 8; ++gp) iso[gp] = Mat3::identity(3.7);
  kern.conductivity(iso, Kt);
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b)
      CHECK(Kt[a][b] == doctest::Approx(Ks[a][b]).epsilon(1e-12));
}

TEST_CASE("assembled operators: K annihilates constants, M integrates rho_cp") {
  const MaterialGrid g = laminate(3, 4, 5, 1e-6);
  const CsrMatrix K = assemble_conductivity(g);
  const CsrMatrix M = assemble_capacity(g);
  CHECK(K.symmetry_gap() == 0.0);
  CHECK(M.symmetry_gap() == 0.0);

  const std::vector<double> ones(node_count(g), 1.0);
  const std::vector<double> K1 = K.matvec(ones);
  for (double v : K1) CHECK(std::abs(v) < 1e-12);

  double total = 0, expect = 0;
  for (double v : M.matvec(ones)) total += v;
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        expect += g.mat(i, j, k).rho_cp() * g.dx * g.dy * g.dz;
  CHECK(total == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("CsrMatrix accessors and scaled add") {
  const MaterialGrid g = laminate(2, 2, 2, 1e-6);
  CsrMatrix A = structured_pattern(g);
  A.at(0, 1) = 2.5;
  CHECK(A.get(0, 1) == 2.5);
  CHECK(A.get(0, 26) == 0.0);  // not in the 27-point stencil
  CsrMatrix B = A;
  B.add_scaled(A, 3.0);
  CHECK(B.get(0, 1) == doctest::Approx(10.0));
}

TEST_CASE("steady solve reproduces the affine field on homogeneous media") {
  Material m{11.0, 1000.0, 700.0};
  const MaterialGrid g = uniform_grid(m, 4, 4, 4, 1e-6, 1e-6, 1e-6);
  const MicroBC bc{300.0, {1e5, -3e4, 7e4}};
  const ThermalField sol = solve_steady(g, bc);
  const std::vector<double> exact = affine_field(g, bc);
  CHECK(max_abs_diff(sol.values, exact) < 1e-8);
}

TEST_CASE("laminate with in-plane gradient stays affine, per-layer flux") {
  // kappa varies only in z and the gradient is in x, so the affine field
  // satisfies the strong form exactly; heat flux in each layer is kappa_k * g.
  const MaterialGrid g = laminate(4, 4, 6, 0.5e-6);
  const MicroBC bc{0.0, {1.0, 0, 0}};
  const ThermalField sol = solve_steady(g, bc);
  CHECK(max_abs_diff(sol.values, affine_field(g, bc)) < 1e-8);
}

TEST_CASE("transient integrator") {
  const MaterialGrid g = laminate(3, 3, 4, 1e-6);
  const MicroModel model(g, 1e-12);
  const MicroBC hold{300.0, {0, 0, 0}};
  const MicroBCSchedule constant = [&](double) { return hold; };

  SUBCASE("uniform state is a fixed point") {
    ThermalField state;
    state.values.assign(node_count(g), 300.0);
    const ThermalField next = model.step_transient(state, constant, 1e-6);
    for (double v : next.values) CHECK(v == doctest::Approx(300.0).epsilon(1e-12));
    CHECK(next.time == doctest::Approx(1e-6));
  }
  SUBCASE("interior perturbations decay monotonically to the boundary value") {
    ThermalField state;
    state.values.assign(node_count(g), 300.0);
    state.values[node_index(g, 1, 1, 1)] = 310.0;
    state.values[node_index(g, 2, 2, 2)] = 290.0;
    double prev = 10.0;
    ThermalField cur = state;
    for (int s = 0; s < 6; ++s) {
      cur = model.step_transient(cur, constant, 2e-9);
      double dev = 0;
      for (double v : cur.values) dev = std::max(dev, std::abs(v - 300.0));
      CHECK(dev < prev * (1 + 1e-12));  // max principle: never overshoots
      prev = dev;
    }
    CHECK(prev < 2.0);
  }
  SUBCASE("many steps approach the steady solution") {
    const MicroBC bc{300.0, {0, 0, 1e5}};
    const MicroBCSchedule ramp_done = [&](double) { return bc; };
    ThermalField cur;
    cur.values.assign(node_count(g), 300.0);
    for (int s = 0; s < 200; ++s)
      cur = model.step_transient(cur, ramp_done, 1e-5, 1);
    const ThermalField steady = model.solve_steady(bc);
    CHECK(max_abs_diff(cur.values, steady.values) < 1e-6 * 1e5 * 4e-6);
  }
  SUBCASE("subcycling changes the path, not the boundary values") {
    ThermalField state;
    state.values.assign(node_count(g), 300.0);
    const double dt = 3e-8;  // short against the micron diffusion time
    const MicroBCSchedule rising = [](double t) {
      return MicroBC{300.0 + 1e8 * t, {0, 0, 0}};
    };
    const ThermalField a = model.step_transient(state, rising, dt, 1);
    const ThermalField b = model.step_transient(state, rising, dt, 4);
    // boundary nodes carry the end-time value in both cases
    const int bn = node_index(g, 0, 0, 0);
    CHECK(a.values[bn] == doctest::Approx(303.0).epsilon(1e-12));
    CHECK(b.values[bn] == doctest::Approx(303.0).epsilon(1e-12));
    // one big implicit step applies the end-time boundary data for the whole
    // interval; subcycling resolves the ramp, so the interior heats less
    const int in = node_index(g, 1, 1, 2);
    CHECK(a.values[in] > b.values[in]);
  }
}

TEST_CASE("solver failure carries the residual history") {
  const MaterialGrid g = laminate(4, 4, 4, 1e-6);
  const CsrMatrix K = assemble_conductivity(g);
  const MicroBC bc{0.0, {1e6, 0, 0}};
  const Dirichlet d = affine_boundary(g, bc);
  std::vector<double> f(node_count(g), 0.0), x0(node_count(g), 0.0);
  try {
    solve_constrained(K, d, f, x0, {1e-14, 2});
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(e.residual_history.size() >= 2);
    CHECK(e.residual_history.front() > e.residual_history.back() * 0.0);
  }
}

TEST_CASE("BiCGSTAB agrees with CG on an SPD system") {
  const MaterialGrid g = laminate(3, 3, 3, 1e-6);
  CsrMatrix A = assemble_conductivity(g);
  const CsrMatrix M = assemble_capacity(g);
  A.add_scaled(M, 1.0 / 1e-6);  // K + M/dt, SPD
  const int n = node_count(g);
  std::vector<double> f(n), x0(n, 0.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : f) v = u(rng);
  const Dirichlet none = Dirichlet::none(n);
  const std::vector<double> xa = solve_constrained(A, none, f, x0, {1e-12, 0});
  const std::vector<double> xb =
      solve_constrained_bicgstab(A, none, f, x0, {1e-12, 0});
  double scale = 0;
  for (double v : xa) scale = std::max(scale, std::abs(v));
  CHECK(max_abs_diff(xa, xb) < 1e-9 * scale);
}

TEST_CASE("constrained solve is deterministic across repeats") {
  const MaterialGrid g = laminate(4, 4, 6, 0.5e-6);
  const CsrMatrix K = assemble_conductivity(g);
  const MicroBC bc{300.0, {0, 0, 1e5}};
  const Dirichlet d = affine_boundary(g, bc);
  std::vector<double> f(node_count(g), 0.0);
  const std::vector<double> x0 = affine_field(g, bc);
  const std::vector<double> a = solve_constrained(K, d, f, x0);
  const std::vector<double> b = solve_constrained(K, d, f, x0);
  CHECK(a == b);  // bitwise
}
