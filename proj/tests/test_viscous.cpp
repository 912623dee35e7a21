#include <cmath>
#include <vector>

#include "cns/grid.hpp"
#include "cns/operators.hpp"
#include "cns/quadrature.hpp"
#include "cns/viscous.hpp"
#include "doctest.h"
#include "manufactured_sources.hpp"

using namespace cns;

namespace {

double max_abs_field(const ScalarField2D& f) {
  double m = 0.0;
  for (double v : f.v) m = std::max(m, std::fabs(v));
  return m;
}

double l2_field(const ScalarField2D& f) {
  ScalarField2D sq(f.grid);
  for (size_t q = 0; q < f.v.size(); ++q) sq.v[q] = f.v[q] * f.v[q];
  return std::sqrt(strip_integral(sq));
}

// Flux-compatible plume data (dy n = n dy c pointwise at t=0) with a gentle
// recirculation.  The oxygen profile is reflected about y = Ymax so that
// dy c vanishes there: the top boundary of the truncated strip then carries
// no analytic chemotactic or diffusive through-flow, and strip mass is an
// honest conserved quantity for the run.
ViscousState plume_state(const std::shared_ptr<const Grid2D>& g, double eps) {
  ScalarField2D n(g), c(g), phi(g);
  const double Ytop = g->y[g->Ny - 1];
  for (int j = 0; j < g->Ny; ++j) {
    const double y = g->y[j];
    for (int i = 0; i < g->Nx; ++i) {
      const double x = g->x(i);
      c.at(i, j) = 1.0 + 0.3 * (std::exp(-y) + std::exp(y - 2.0 * Ytop));
      n.at(i, j) = (1.0 + 0.2 * std::cos(x) * (std::exp(-(y - 1.5) * (y - 1.5)) +
                                               std::exp(-(y + 1.5) * (y + 1.5)))) *
                   std::exp(c.at(i, j) - 1.0);
      const double f = 1.0 - std::exp(-y);
      phi.at(i, j) = 0.2 * std::sin(x) * f * f;
    }
  }
  ScalarField2D omega = laplacian(phi);
  std::vector<double> u1far(g->Nx);
  const double Y = g->y[g->Ny - 1];
  for (int i = 0; i < g->Nx; ++i)
    u1far[i] = 0.2 * std::sin(g->x(i)) * 2.0 * (1.0 - std::exp(-Y)) * std::exp(-Y);
  return make_viscous_state(std::move(n), std::move(c), std::move(omega), u1far, eps);
}

ViscousState manufactured_state(const std::shared_ptr<const Grid2D>& g, double eps,
                                double rho, bool with_sources) {
  const double Y = g->y[g->Ny - 1];
  ScalarField2D n(g), c(g), omega(g);
  for (int j = 0; j < g->Ny; ++j)
    for (int i = 0; i < g->Nx; ++i) {
      const double x = g->x(i), y = g->y[j];
      n.at(i, j) = mms::field_n(x, y, 0.0, Y, rho);
      c.at(i, j) = mms::field_c(x, y, 0.0, Y, rho);
      omega.at(i, j) = mms::field_omega(x, y, 0.0, Y, rho);
    }
  std::vector<double> u1far(g->Nx, 0.0);  // manufactured u1 vanishes at y = Y
  ViscousState s =
      make_viscous_state(std::move(n), std::move(c), std::move(omega), u1far, eps);
  if (with_sources) {
    ViscousSources src;
    src.n = [Y, rho](double x, double y, double t) {
      return mms::source_n(x, y, t, Y, rho);
    };
    src.c = [Y, eps, rho](double x, double y, double t) {
      return mms::source_c(x, y, t, Y, eps, rho);
    };
    src.omega = [Y, eps, rho](double x, double y, double t) {
      return mms::source_omega(x, y, t, Y, eps, rho);
    };
    enable_manufactured_sources(s, src);
  }
  return s;
}

// Sup-over-fields L2 error of a manufactured run at its current time.
double manufactured_error(const ViscousState& s, double rho) {
  const Grid2D& g = *s.n.grid;
  const double Y = g.y[g.Ny - 1];
  ScalarField2D en(s.n.grid), ec(s.n.grid), eo(s.n.grid);
  for (int j = 0; j < g.Ny; ++j)
    for (int i = 0; i < g.Nx; ++i) {
      const double x = g.x(i), y = g.y[j];
      en.at(i, j) = s.n.at(i, j) - mms::field_n(x, y, s.time, Y, rho);
      ec.at(i, j) = s.c.at(i, j) - mms::field_c(x, y, s.time, Y, rho);
      eo.at(i, j) = s.omega.at(i, j) - mms::field_omega(x, y, s.time, Y, rho);
    }
  return std::max({l2_field(en), l2_field(ec), l2_field(eo)});
}

}  // namespace

TEST_CASE("spatially uniform data reduces to the exact reaction decay") {
  auto g = make_uniform_grid(2.0 * M_PI, 16, 4.0, 65);
  ScalarField2D n(g), c(g), omega(g);
  for (double& v : n.v) v = 1.0;
  for (double& v : c.v) v = 1.0;
  ViscousState s =
      make_viscous_state(std::move(n), std::move(c), std::move(omega),
                         std::vector<double>(g->Nx, 0.0), 0.5);
  const double dt = 1e-3;
  for (int k = 0; k < 1000; ++k) s = step_viscous(s, dt);
  CHECK(s.time == doctest::Approx(1.0).epsilon(1e-12));
  for (double v : s.n.v) CHECK(std::fabs(v - 1.0) <= 1e-11);
  const double cexact = std::exp(-1.0);
  for (double v : s.c.v) CHECK(std::fabs(v - cexact) / cexact <= 5e-3);
  CHECK(max_abs_field(s.u.u1) <= 1e-12);
  CHECK(max_abs_field(s.u.u2) <= 1e-12);
}

TEST_CASE("zero data stays zero") {
  auto g = make_uniform_grid(2.0 * M_PI, 16, 4.0, 33);
  ViscousState s = make_viscous_state(ScalarField2D(g), ScalarField2D(g), ScalarField2D(g),
                                      std::vector<double>(g->Nx, 0.0), 0.5);
  for (int k = 0; k < 20; ++k) s = step_viscous(s, 1e-3);
  CHECK(max_abs_field(s.n) == 0.0);
  CHECK(max_abs_field(s.c) == 0.0);
  CHECK(max_abs_field(s.omega) <= 1e-15);
  CHECK(max_abs_field(s.u.u1) <= 1e-15);
}

TEST_CASE("layer resolution guard is a hard error") {
  auto g = make_uniform_grid(2.0 * M_PI, 16, 4.0, 33);  // wall spacing 0.125
  ScalarField2D n(g), c(g), omega(g);
  for (double& v : n.v) v = 1.0;
  for (double& v : c.v) v = 1.0;
  CHECK_THROWS_AS(make_viscous_state(std::move(n), std::move(c), std::move(omega),
                                     std::vector<double>(g->Nx, 0.0), 0.1),
                  std::runtime_error);
}

TEST_CASE("advective CFL violation is a hard error") {
  auto g = make_graded_grid_ny(2.0 * M_PI, 32, 4.0, 129, 0.03);
  ViscousState s = plume_state(g, 0.2);
  CHECK_THROWS_AS(step_viscous(s, 1.0), std::runtime_error);
}

TEST_CASE("wall conditions, divergence, mass, and max principle on a plume run") {
  auto g = make_graded_grid_ny(2.0 * M_PI, 32, 4.0, 129, 0.03);
  ViscousState s = plume_state(g, 0.2);
  const double mass0 = strip_integral(s.n);
  const double cmax0 = s.c_max0;
  for (int k = 0; k < 50; ++k) {
    s = step_viscous(s, 2e-4);  // throws if positivity or max principle break
    for (int i = 0; i < g->Nx; ++i) {
      CHECK(s.omega.at(i, 0) == 0.0);          // Dirichlet row is exact
      CHECK(std::fabs(s.u.u2.at(i, 0)) <= 1e-14);
    }
    CHECK(max_abs_field(divergence(s.u)) <= 1e-10);
  }
  const double mass1 = strip_integral(s.n);
  CHECK(std::fabs(mass1 - mass0) / std::fabs(mass0) <= 1e-6);
  CHECK(max_abs_field(s.c) <= cmax0 + 1e-10);
  // the flow actually moved: this is not a trivial run
  CHECK(max_abs_field(s.u.u1) > 1e-3);
}

TEST_CASE("attaching identically zero sources leaves the step bitwise unchanged") {
  auto g = make_graded_grid_ny(2.0 * M_PI, 16, 4.0, 65, 0.04);
  ViscousState a = plume_state(g, 0.2);
  ViscousState b = plume_state(g, 0.2);
  ViscousSources zero;
  zero.n = [](double, double, double) { return 0.0; };
  zero.c = [](double, double, double) { return 0.0; };
  zero.omega = [](double, double, double) { return 0.0; };
  enable_manufactured_sources(b, zero);
  ViscousState sa = step_viscous(a, 2e-4);
  ViscousState sb = step_viscous(b, 2e-4);
  // max principle guard is skipped with sources, so compare fields directly
  for (size_t q = 0; q < sa.n.v.size(); ++q) {
    CHECK(sa.n.v[q] == sb.n.v[q]);
    CHECK(sa.c.v[q] == sb.c.v[q]);
    CHECK(sa.omega.v[q] == sb.omega.v[q]);
  }
}

TEST_CASE("steady manufactured state is a discrete fixed point") {
  auto g = make_uniform_grid(2.0 * M_PI, 48, 4.0, 257);
  ViscousState s = manufactured_state(g, 0.5, 0.0, true);
  double dev = 0.0;
  for (int k = 0; k < 100; ++k) {
    s = step_viscous(s, 2e-4);
    dev = std::max(dev, manufactured_error(s, 0.0));
  }
  CHECK(dev <= 1e-4);
}

TEST_CASE("temporal refinement of a time-dependent manufactured run is first order") {
  auto g = make_uniform_grid(2.0 * M_PI, 32, 4.0, 129);
  const double rho = 0.8, T = 0.2;
  std::vector<double> dts = {4e-3, 2e-3, 1e-3}, errs;
  for (double dt : dts) {
    ViscousState s = manufactured_state(g, 0.5, rho, true);
    const int steps = static_cast<int>(std::lround(T / dt));
    for (int k = 0; k < steps; ++k) s = step_viscous(s, dt);
    errs.push_back(manufactured_error(s, rho));
  }
  // least-squares slope of log err against log dt across the three runs
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < dts.size(); ++i) {
    const double lx = std::log(dts[i]), ly = std::log(errs[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double npt = static_cast<double>(dts.size());
  const double slope = (npt * sxy - sx * sy) / (npt * sxx - sx * sx);
  CHECK(slope >= 0.8);
  CHECK(slope <= 1.25);
}

TEST_CASE("spatial refinement of a steady manufactured run is second order") {
  const double T = 0.05, dt = 1e-5;
  std::vector<int> nys = {33, 65, 129};
  std::vector<double> errs;
  for (int ny : nys) {
    auto g = make_uniform_grid(2.0 * M_PI, 16, 4.0, ny);
    ViscousState s = manufactured_state(g, 0.5, 0.0, true);
    const int steps = static_cast<int>(std::lround(T / dt));
    for (int k = 0; k < steps; ++k) s = step_viscous(s, dt);
    errs.push_back(manufactured_error(s, 0.0));
  }
  const double order_coarse = std::log2(errs[0] / errs[1]);
  const double order_fine = std::log2(errs[1] / errs[2]);
  CHECK(order_coarse >= 1.8);
  CHECK(order_fine >= 1.8);
}

TEST_CASE("nearby viscosities stay close: continuity in epsilon squared") {
  auto g = make_graded_grid_ny(2.0 * M_PI, 32, 4.0, 129, 0.03);
  ViscousState a = plume_state(g, 0.2);
  ViscousState b = plume_state(g, 0.25);
  for (int k = 0; k < 500; ++k) {
    a = step_viscous(a, 2e-4);
    b = step_viscous(b, 2e-4);
  }
  ScalarField2D dn(g), dc(g), du1(g), du2(g);
  for (size_t q = 0; q < dn.v.size(); ++q) {
    dn.v[q] = a.n.v[q] - b.n.v[q];
    dc.v[q] = a.c.v[q] - b.c.v[q];
    du1.v[q] = a.u.u1.v[q] - b.u.u1.v[q];
    du2.v[q] = a.u.u2.v[q] - b.u.u2.v[q];
  }
  const double d =
      std::max({l2_field(dn), l2_field(dc), l2_field(du1), l2_field(du2)});
  const double gap = std::fabs(0.2 * 0.2 - 0.25 * 0.25);
  // Pinned from a gap-refinement study of this exact configuration: the ratio
  // dist/gap measured 0.121, 0.127, 0.130 as the viscosity gap shrank 4x, so
  // 0.3 gives ~2.3x headroom while still catching a broken epsilon coupling.
  const double C = 0.3;
  CHECK(d <= C * gap);
}
