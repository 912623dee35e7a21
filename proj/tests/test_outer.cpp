#include <cmath>
#include <vector>

#include "cns/grid.hpp"
#include "cns/operators.hpp"
#include "cns/outer.hpp"
#include "cns/quadrature.hpp"
#include "doctest.h"

using namespace cns;

namespace {

// y-localized flow-and-plume data obeying the wall flux condition exactly:
// c = c0 + b e^{-y}, n = [n0 + a cos(2 pi x/Lx)(e^{-(y-y0)^2} + e^{-(y+y0)^2})] e^{c-c0},
// velocity from the streamfunction phi = s sin(2 pi x/Lx)(1-e^{-y})^2 (+ optional
// mean shear m*y). The mirrored Gaussian pair has zero wall derivative, so
// d_y n = n d_y c at y = 0 analytically.
struct PlumeParams {
  double n0 = 1.0, c0 = 1.0, a = 0.2, b = 0.3, y0 = 1.5, s = 0.2, m = 0.0;
};

OuterState make_plume_state(const std::shared_ptr<const Grid2D>& g, const PlumeParams& p) {
  ScalarField2D n(g), c(g), phi(g);
  const double kx = 2.0 * M_PI / g->Lx;
  for (int j = 0; j < g->Ny; ++j) {
    const double y = g->y[j];
    for (int i = 0; i < g->Nx; ++i) {
      const double x = g->x(i);
      const double cv = p.c0 + p.b * std::exp(-y);
      const double pair = std::exp(-(y - p.y0) * (y - p.y0)) + std::exp(-(y + p.y0) * (y + p.y0));
      c.at(i, j) = cv;
      n.at(i, j) = (p.n0 + p.a * std::cos(kx * x) * pair) * std::exp(cv - p.c0);
      const double f = 1.0 - std::exp(-y);
      phi.at(i, j) = p.s * std::sin(kx * x) * f * f + p.m * y;
    }
  }
  ScalarField2D omega = laplacian(phi);
  std::vector<double> u1far(g->Nx);
  const double Y = g->y[g->Ny - 1];
  for (int i = 0; i < g->Nx; ++i) {
    const double x = g->x(i);
    u1far[i] = p.s * std::sin(kx * x) * 2.0 * (1.0 - std::exp(-Y)) * std::exp(-Y) + p.m;
  }
  return make_outer_state(std::move(n), std::move(c), std::move(omega), std::move(u1far));
}

OuterState make_uniform_state(const std::shared_ptr<const Grid2D>& g, double n0, double c0) {
  ScalarField2D n(g), c(g), omega(g);
  for (double& v : n.v) v = n0;
  for (double& v : c.v) v = c0;
  return make_outer_state(std::move(n), std::move(c), std::move(omega),
                          std::vector<double>(g->Nx, 0.0));
}

double wall_stencil(const Grid2D& g, double f0, double f1, double f2) {
  const double y1 = g.y[1], y2 = g.y[2];
  const double w0 = -(y1 + y2) / (y1 * y2);
  const double w1 = y2 / (y1 * (y2 - y1));
  const double w2 = -y1 / (y2 * (y2 - y1));
  return w0 * f0 + w1 * f1 + w2 * f2;
}

}  // namespace

TEST_CASE("uniform state decays the oxygen exactly and fixes everything else") {
  auto g = make_uniform_grid(2.0 * M_PI, 16, 4.0, 33);
  const double n0 = 1.0, c0 = 0.8, dt = 1e-3;
  OuterState s = make_uniform_state(g, n0, c0);
  for (int k = 0; k < 200; ++k) s = step_outer(s, dt);
  const double t = s.time;
  CHECK(t == doctest::Approx(0.2).epsilon(1e-12));
  const double cexact = c0 * std::exp(-n0 * t);
  for (int j = 0; j < g->Ny; ++j)
    for (int i = 0; i < g->Nx; ++i) {
      CHECK(s.n.at(i, j) == doctest::Approx(n0).epsilon(1e-12));
      CHECK(s.c.at(i, j) == doctest::Approx(cexact).epsilon(1e-12));
    }
  CHECK(max_abs(s.u.u1.v) <= 1e-14);
  CHECK(max_abs(s.u.u2.v) <= 1e-14);
  CHECK(max_abs(s.omega.v) <= 1e-14);
}

TEST_CASE("zero data stays zero") {
  auto g = make_uniform_grid(2.0 * M_PI, 16, 4.0, 17);
  OuterState s = make_uniform_state(g, 0.0, 0.0);
  for (int k = 0; k < 5; ++k) s = step_outer(s, 1e-3);
  CHECK(max_abs(s.n.v) == 0.0);
  CHECK(max_abs(s.c.v) == 0.0);
  CHECK(max_abs(s.omega.v) == 0.0);
  CHECK(max_abs(s.u.u1.v) == 0.0);
  CHECK(max_abs(s.u.u2.v) == 0.0);
}

TEST_CASE("mass is conserved and positivity holds on a plume run") {
  auto g = make_graded_grid_ny(2.0 * M_PI, 32, 6.0, 161, 0.02);
  PlumeParams p;
  OuterState s = make_plume_state(g, p);
  const double m0 = strip_integral(s.n);
  REQUIRE(m0 > 0.0);
  double minn = 0.0, minc = 0.0;
  for (int k = 0; k < 100; ++k) {
    s = step_outer(s, 5e-4);
    minn = std::min(minn, *std::min_element(s.n.v.begin(), s.n.v.end()));
    minc = std::min(minc, *std::min_element(s.c.v.begin(), s.c.v.end()));
  }
  const double m1 = strip_integral(s.n);
  CHECK(std::fabs(m1 - m0) / m0 <= 1e-6);
  CHECK(minn >= -1e-12);
  CHECK(minc >= -1e-12);
  // The wall stays impermeable and the recovered field divergence free.
  double u2w = 0.0;
  for (int i = 0; i < g->Nx; ++i) u2w = std::max(u2w, std::fabs(s.u.u2.at(i, 0)));
  CHECK(u2w == 0.0);
  CHECK(max_abs(divergence(s.u).v) <= 1e-10);
}

TEST_CASE("x-independent data stays one-dimensional with zero flow and monotone oxygen") {
  auto g = make_graded_grid_ny(2.0 * M_PI, 32, 4.0, 97, 0.02);
  PlumeParams p;
  p.a = 0.0;  // no x-dependence in n
  p.s = 0.0;  // no flow
  OuterState s = make_plume_state(g, p);
  for (int k = 0; k < 50; ++k) {
    OuterState next = step_outer(s, 5e-4);
    double growth = -1.0;
    for (size_t q = 0; q < next.c.v.size(); ++q)
      growth = std::max(growth, next.c.v[q] - s.c.v[q]);
    CHECK(growth <= 1e-15);  // oxygen nonincreasing pointwise (u = 0, n >= 0)
    s = std::move(next);
  }
  CHECK(max_abs(s.u.u1.v) <= 1e-12);
  CHECK(max_abs(s.u.u2.v) <= 1e-12);
  double var = 0.0;
  for (int j = 0; j < g->Ny; ++j) {
    double lo = s.n.at(0, j), hi = lo, loc = s.c.at(0, j), hic = loc;
    for (int i = 1; i < g->Nx; ++i) {
      lo = std::min(lo, s.n.at(i, j));
      hi = std::max(hi, s.n.at(i, j));
      loc = std::min(loc, s.c.at(i, j));
      hic = std::max(hic, s.c.at(i, j));
    }
    var = std::max({var, hi - lo, hic - loc});
  }
  CHECK(var <= 1e-12);
}

TEST_CASE("steps enforce the stability guards") {
  auto g = make_uniform_grid(2.0 * M_PI, 64, 4.0, 33);
  PlumeParams p;
  p.s = 1.0;
  OuterState s = make_plume_state(g, p);
  CHECK_THROWS(step_outer(s, 0.5));    // advective CFL and x-diffusion limit both blown
  CHECK_THROWS(step_outer(s, -1e-3));  // nonpositive dt
}

TEST_CASE("trace extraction matches analytic wall data") {
  auto g = make_graded_grid_ny(2.0 * M_PI, 32, 4.0, 129, 0.005);
  // n = e^{-y} cos x scaled to satisfy the flux condition against c = 1 + e^{-y}:
  // d_y n = n d_y c requires n = N(x) e^{-e^{-y}}... keep it direct instead:
  // build the plume family where all traces are known in closed form.
  PlumeParams p;
  p.a = 0.25;
  p.b = 0.4;
  p.s = 0.15;
  p.m = 0.1;
  OuterState s = make_plume_state(g, p);
  BoundaryTraces tr = extract_traces(s);
  const double kx = 2.0 * M_PI / g->Lx;
  for (int i = 0; i < g->Nx; ++i) {
    const double x = g->x(i);
    const double pair0 = 2.0 * std::exp(-p.y0 * p.y0);
    const double nbar = (p.n0 + p.a * std::cos(kx * x) * pair0) * std::exp(p.b);
    const double cbar = p.c0 + p.b;
    const double u1bar = p.m;  // d_y phi at y=0: 2 s sin(kx x) f f' with f(0)=0, plus m
    CHECK(tr.nbar[i] == doctest::Approx(nbar).epsilon(1e-12));
    CHECK(tr.cbar[i] == doctest::Approx(cbar).epsilon(1e-12));
    CHECK(std::fabs(tr.u1bar[i] - u1bar) <= 5e-4);
    // one-sided stencil values of the exponential: second-order accurate
    CHECK(tr.dyc[i] == doctest::Approx(-p.b).epsilon(2e-4));
    // wall shear of the streamfunction: phi_yy(0) = 2 s sin(kx x)
    CHECK(std::fabs(tr.dyu1[i] - 2.0 * p.s * std::sin(kx * x)) <= 8e-3);
    // enforced combined-flux and incompressibility traces
    CHECK(tr.dyn[i] == tr.nbar[i] * tr.dyc[i]);
  }
  std::vector<double> dxu1 = ddx_trace(tr.u1bar, g->Lx);
  std::vector<double> dxdyu1 = ddx_trace(tr.dyu1, g->Lx);
  for (int i = 0; i < g->Nx; ++i) {
    const double x = g->x(i);
    CHECK(std::fabs(tr.dyu2[i] + dxu1[i]) <= 1e-10);
    CHECK(std::fabs(tr.dyyu2[i] + dxdyu1[i]) <= 1e-10);
    // analytic: u1bar = m constant, so dyu2 = 0; dyyu2 = -d_x(2 s sin) = -2 s kx cos
    CHECK(std::fabs(tr.dyu2[i]) <= 5e-3);
    CHECK(std::fabs(tr.dyyu2[i] + 2.0 * p.s * kx * std::cos(kx * x)) <= 2e-2);
  }
}

TEST_CASE("trace extraction on an exponential-times-cosine density") {
  // c = c0 + e^{-y} gives d_y c(0) = -1, and n = cos(2 pi x/Lx) e^{c-c0} then
  // satisfies the flux condition with nbar = cos(...) e, dyn ~ -nbar.
  auto g = make_graded_grid_ny(2.0 * M_PI, 32, 4.0, 129, 0.005);
  ScalarField2D n(g), c(g), omega(g);
  const double kx = 1.0;
  for (int j = 0; j < g->Ny; ++j)
    for (int i = 0; i < g->Nx; ++i) {
      const double e = std::exp(-g->y[j]);
      c.at(i, j) = 1.0 + e;
      n.at(i, j) = (2.0 + std::cos(kx * g->x(i))) * std::exp(e);
    }
  OuterState s = make_outer_state(std::move(n), std::move(c), std::move(omega),
                                  std::vector<double>(g->Nx, 0.0));
  BoundaryTraces tr = extract_traces(s);
  for (int i = 0; i < g->Nx; ++i) {
    const double nb = (2.0 + std::cos(kx * g->x(i))) * std::exp(1.0);
    CHECK(tr.nbar[i] == doctest::Approx(nb).epsilon(1e-12));
    CHECK(tr.dyn[i] == doctest::Approx(-nb).epsilon(3e-4));  // nbar * dyc, dyc ~ -1
  }
}

TEST_CASE("trace extensions evaluate the Taylor data") {
  auto zg = make_uniform_layer_grid(12.0, 32);
  BoundaryTraces tr;
  tr.Lx = 2.0 * M_PI;
  tr.time = 0.25;
  const int nx = 8;
  tr.nbar.assign(nx, 1.0);
  tr.cbar.assign(nx, 0.5);
  tr.u1bar.assign(nx, 0.0);
  tr.dyn.assign(nx, 0.0);
  tr.dyc.assign(nx, 0.0);
  tr.dyu1.assign(nx, 0.0);
  tr.dyu2.resize(nx);
  tr.dyyu2.resize(nx);
  for (int i = 0; i < nx; ++i) {
    const double x = tr.Lx * i / nx;
    tr.dyu2[i] = std::sin(x);
    tr.dyyu2[i] = std::cos(x);
  }
  TraceExtensionSet ext = build_extensions(tr);
  LayerField2D nE0 = ext.nE0(zg), nE1 = ext.nE1(zg), u2E1 = ext.u2E1(zg), u2E2 = ext.u2E2(zg);
  CHECK(nE0.time == 0.25);
  for (int k = 0; k < zg->Nz; ++k)
    for (int i = 0; i < nx; ++i) {
      const double x = tr.Lx * i / nx, z = zg->z[k];
      CHECK(nE0.at(i, k) == 1.0);
      CHECK(nE1.at(i, k) == 0.0);
      CHECK(u2E1.at(i, k) == doctest::Approx(z * std::sin(x)).epsilon(1e-14));
      CHECK(u2E2.at(i, k) == doctest::Approx(0.5 * z * z * std::cos(x)).epsilon(1e-14));
    }
  tr.dyyu2.pop_back();
  CHECK_THROWS(build_extensions(tr));
}

TEST_CASE("compatibility report flags the analytic flux mismatch") {
  auto g = make_graded_grid_ny(2.0 * M_PI, 16, 4.0, 129, 0.005);
  // zero and uniform data: all residuals vanish
  OuterState z = make_uniform_state(g, 0.0, 0.0);
  CompatibilityReport rz = check_compatibility(z, 1);
  CHECK(rz.flux0 == 0.0);
  CHECK(rz.u2wall == 0.0);
  CHECK(rz.divu == 0.0);
  CHECK(rz.flux1 == 0.0);
  OuterState uni = make_uniform_state(g, 2.0, 1.5);
  CompatibilityReport ru = check_compatibility(uni, 2);
  CHECK(ru.flux0 <= 1e-12);
  CHECK(ru.flux1 <= 1e-7);  // two nested 1/h stencil applications amplify rounding
  CHECK(ru.clamped);
  CHECK(ru.order_checked == 1);

  // n = e^{-y}, c = 1: the combined flux at the wall is the one-sided stencil
  // of e^{-y}, about -1; the report must reproduce that stencil value exactly.
  ScalarField2D n(g), c(g), omega(g);
  for (int j = 0; j < g->Ny; ++j)
    for (int i = 0; i < g->Nx; ++i) {
      n.at(i, j) = std::exp(-g->y[j]);
      c.at(i, j) = 1.0;
    }
  OuterState s = make_outer_state(std::move(n), std::move(c), std::move(omega),
                                  std::vector<double>(g->Nx, 0.0));
  CompatibilityReport r = check_compatibility(s, 0);
  const double expected =
      std::fabs(wall_stencil(*g, 1.0, std::exp(-g->y[1]), std::exp(-g->y[2])));
  CHECK(r.flux0 == doctest::Approx(expected).epsilon(1e-12));
  CHECK(r.flux0 == doctest::Approx(1.0).epsilon(5e-4));  // stencil accuracy
  CHECK(r.order_checked == 0);

  // compatible plume data: flux residuals are pure discretization error
  OuterState sp = make_plume_state(g, PlumeParams{});
  CompatibilityReport rp = check_compatibility(sp, 1);
  CHECK(rp.flux0 <= 5e-3);
  CHECK(rp.u2wall == 0.0);
  CHECK(rp.divu <= 1e-10);
}

TEST_CASE("wall-normal curvature of n matches the elliptic residual form") {
  auto g = make_graded_grid_ny(2.0 * M_PI, 32, 4.0, 129, 0.01);
  PlumeParams p;
  p.s = 0.1;
  const double dt = 1e-4;
  OuterState s0 = make_plume_state(g, p);
  OuterState s1 = step_outer(s0, dt);
  OuterState s2 = step_outer(s1, dt);

  // residual form at the middle state: d_yy n = dt n + u.grad n - d_xx n + div(n grad c)
  ScalarField2D lhs = d2dy2(s1.n);
  ScalarField2D dxn = ddx(s1.n), dyn = ddy(s1.n), dxc = ddx(s1.c), dyc = ddy(s1.c);
  ScalarField2D fx(g), fy(g);
  for (size_t q = 0; q < fx.v.size(); ++q) {
    fx.v[q] = s1.n.v[q] * dxc.v[q];
    fy.v[q] = s1.n.v[q] * dyc.v[q];
  }
  ScalarField2D dfx = ddx(fx), dfy = ddy(fy), nxx = d2dx2(s1.n);
  double maxdiff = 0.0, scale = 0.0;
  for (int j = 0; j < g->Ny; ++j)
    for (int i = 0; i < g->Nx; ++i) {
      const size_t q = static_cast<size_t>(j) * g->Nx + i;
      const double dtn = (s2.n.v[q] - s0.n.v[q]) / (2.0 * dt);
      const double rhs = dtn + s1.u.u1.v[q] * dxn.v[q] + s1.u.u2.v[q] * dyn.v[q] -
                         nxx.v[q] + dfx.v[q] + dfy.v[q];
      maxdiff = std::max(maxdiff, std::fabs(lhs.v[q] - rhs));
      scale = std::max(scale, std::fabs(lhs.v[q]));
    }
  REQUIRE(scale > 0.1);
  CHECK(maxdiff <= 0.05 * scale);
}

TEST_CASE("diagnostic pressure of a uniform column is hydrostatic") {
  auto g = make_uniform_grid(2.0 * M_PI, 16, 4.0, 65);
  const double n0 = 1.3;
  OuterState s = make_uniform_state(g, n0, 1.0);
  ScalarField2D p = outer_pressure(s);
  // exact: p = n0 y + C with the strip mean removed
  ScalarField2D exact(g);
  for (int j = 0; j < g->Ny; ++j)
    for (int i = 0; i < g->Nx; ++i) exact.at(i, j) = n0 * g->y[j];
  const double mean = strip_integral(exact) / (g->Lx * g->y[g->Ny - 1]);
  double maxdiff = 0.0;
  for (size_t q = 0; q < p.v.size(); ++q)
    maxdiff = std::max(maxdiff, std::fabs(p.v[q] - (exact.v[q] - mean)));
  CHECK(maxdiff <= 1e-8);
}
