// Composite-solution assembly and remainder-forcing evaluation.
//
// Layer profiles live on the stretched strip (x, z); they reach the physical
// strip through `lift`, a per-column monotone cubic in z queried at z = y/eps
// (exact at nodes, zero beyond the layer mesh).  Outer fields reach the
// target grid through `to_grid` (bitwise copy when layouts agree, monotone
// cubic re-meshing in y otherwise).  The remainder formulas are sums of
// pointwise products of three ingredient families:
//   * lifted layer profiles and their x/z/t derivatives (derivatives are
//     taken on the layer mesh, then lifted),
//   * outer fields on the target grid and their x/y derivatives (taken on
//     the target mesh after transfer),
//   * wall traces replicated in y, optionally weighted by y or powers of
//     z = y/eps (the Taylor extension fields).
// Outer-minus-Taylor coefficients (A, B, C0, G, H, Pn below) multiply the
// fastest-varying layer derivatives; their vanishing at the wall is what
// keeps every term integrable against the boundary-layer weight.

#include "cns/composer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cns/interp.hpp"
#include "cns/operators.hpp"

namespace cns {
namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

bool times_match(double a, double b) {
  return std::fabs(a - b) <= 1e-9 * std::max({1.0, std::fabs(a), std::fabs(b)});
}

// ---- pointwise field algebra -------------------------------------------------

ScalarField2D operator*(const ScalarField2D& a, const ScalarField2D& b) {
  check_same_layout(a, b);
  ScalarField2D out = a;
  for (size_t q = 0; q < out.v.size(); ++q) out.v[q] *= b.v[q];
  return out;
}

ScalarField2D operator*(double s, ScalarField2D a) {
  for (double& v : a.v) v *= s;
  return a;
}

ScalarField2D operator+(ScalarField2D a, const ScalarField2D& b) {
  check_same_layout(a, b);
  for (size_t q = 0; q < a.v.size(); ++q) a.v[q] += b.v[q];
  return a;
}

ScalarField2D operator-(ScalarField2D a, const ScalarField2D& b) {
  check_same_layout(a, b);
  for (size_t q = 0; q < a.v.size(); ++q) a.v[q] -= b.v[q];
  return a;
}

ScalarField2D operator-(ScalarField2D a) {
  for (double& v : a.v) v = -v;
  return a;
}

ScalarField2D& operator+=(ScalarField2D& a, const ScalarField2D& b) {
  check_same_layout(a, b);
  for (size_t q = 0; q < a.v.size(); ++q) a.v[q] += b.v[q];
  return a;
}

ScalarField2D& operator-=(ScalarField2D& a, const ScalarField2D& b) {
  check_same_layout(a, b);
  for (size_t q = 0; q < a.v.size(); ++q) a.v[q] -= b.v[q];
  return a;
}

// ---- transfers ---------------------------------------------------------------

/** Outer field on the target grid (monotone cubic in y when the meshes differ). */
ScalarField2D to_grid(const ScalarField2D& f, const std::shared_ptr<const Grid2D>& g) {
  if (f.grid->same_layout(*g)) {
    ScalarField2D out(g, f.time);
    out.v = f.v;
    return out;
  }
  require(f.grid->Nx == g->Nx &&
              std::fabs(f.grid->Lx - g->Lx) <= 1e-12 * std::max(1.0, g->Lx),
          "composer: outer and target grids have different x layouts");
  require(std::fabs(f.grid->Ymax - g->Ymax) <= 1e-12 * std::max(1.0, g->Ymax),
          "composer: outer and target grids have different heights");
  ScalarField2D out(g, f.time);
  std::vector<double> col(f.grid->Ny);
  for (int i = 0; i < g->Nx; ++i) {
    for (int j = 0; j < f.grid->Ny; ++j) col[j] = f.at(i, j);
    const MonotoneCubic spline(f.grid->y, col, col.back());
    for (int j = 0; j < g->Ny; ++j) out.at(i, j) = spline(g->y[j]);
  }
  return out;
}

/** Layer profile on the physical strip: column-wise monotone cubic in z,
 * queried at z = y/eps, zero above the layer mesh. */
ScalarField2D lift(const LayerField2D& f, const std::shared_ptr<const Grid2D>& g, double eps) {
  require(f.Nx == g->Nx && std::fabs(f.Lx - g->Lx) <= 1e-12 * std::max(1.0, g->Lx),
          "composer: layer and target grids have different x layouts");
  ScalarField2D out(g, f.time);
  std::vector<double> col(f.nz());
  for (int i = 0; i < g->Nx; ++i) {
    for (int k = 0; k < f.nz(); ++k) col[k] = f.at(i, k);
    const MonotoneCubic spline(f.zgrid->z, col, 0.0);
    for (int j = 0; j < g->Ny; ++j) out.at(i, j) = spline(g->y[j] / eps);
  }
  return out;
}

/** Wall trace replicated over y with a per-height weight w(y). */
template <class W>
ScalarField2D replicate(const std::vector<double>& trace, const std::shared_ptr<const Grid2D>& g,
                        double t, W weight) {
  require(static_cast<int>(trace.size()) == g->Nx, "composer: trace length != Nx");
  ScalarField2D out(g, t);
  for (int j = 0; j < g->Ny; ++j) {
    const double w = weight(g->y[j]);
    for (int i = 0; i < g->Nx; ++i) out.at(i, j) = w * trace[i];
  }
  return out;
}

void require_consistent(const OuterState& outer, const LayerState& layers, double eps,
                        const std::shared_ptr<const Grid2D>& target) {
  require(static_cast<bool>(target), "composer: null target grid");
  require(static_cast<bool>(outer.n.grid), "composer: outer state is empty");
  require(static_cast<bool>(layers.u1b1.zgrid), "composer: layer state is empty");
  require(eps > 0.0, "composer: eps must be positive");
  require(outer.n.grid->Nx == target->Nx &&
              std::fabs(outer.n.grid->Lx - target->Lx) <= 1e-12 * std::max(1.0, target->Lx),
          "composer: outer and target grids have different x layouts");
  require(layers.u1b1.Nx == target->Nx &&
              std::fabs(layers.u1b1.Lx - target->Lx) <= 1e-12 * std::max(1.0, target->Lx),
          "composer: layer and target grids have different x layouts");
  require(times_match(outer.time, layers.time),
          "composer: outer and layer states are at different times");
  require(eps * layers.u1b1.zgrid->Zmax <= target->Ymax * (1.0 + 1e-12),
          "composer: eps*Zmax exceeds the domain height; the scaled layer strip "
          "overflows the physical domain");
}

}  // namespace

void LayerHistories::push(const LayerState& st) {
  auto stamped = [&](const LayerField2D& f) {
    LayerField2D copy = f;
    copy.time = st.time;
    return copy;
  };
  nb1.push(stamped(st.nb1));
  nb2.push(stamped(st.nb2));
  u2b2.push(stamped(st.u2b2));
}

ApproxSolution assemble(const OuterState& outer, const LayerState& layers, double eps,
                        const std::shared_ptr<const Grid2D>& target) {
  require_consistent(outer, layers, eps, target);
  const double e2 = eps * eps;
  ApproxSolution a;
  a.epsilon = eps;
  a.time = outer.time;
  a.na = to_grid(outer.n, target) + eps * lift(layers.nb1, target, eps) +
         e2 * lift(layers.nb2, target, eps);
  a.ca = to_grid(outer.c, target) + eps * lift(layers.cb1, target, eps) +
         e2 * lift(layers.cb2, target, eps);
  a.u1a = to_grid(outer.u.u1, target) + eps * lift(layers.u1b1, target, eps);
  a.u2a = to_grid(outer.u.u2, target) + e2 * lift(layers.u2b2, target, eps);
  a.pa = to_grid(outer_pressure(outer), target) + e2 * lift(layers.pb2, target, eps);
  for (ScalarField2D* f : {&a.na, &a.ca, &a.u1a, &a.u2a, &a.pa}) f->time = outer.time;
  return a;
}

RemainderFields compute_remainders(const OuterState& outer, const LayerState& layers,
                                   double eps, const std::shared_ptr<const Grid2D>& target,
                                   const LayerHistories& hist, int at) {
  require_consistent(outer, layers, eps, target);
  const int m = hist.nb1.size();
  require(hist.nb2.size() == m && hist.u2b2.size() == m,
          "composer: layer histories have mismatched depths");
  require(m >= 2, "composer: layer history too shallow for time derivatives");
  const int idx = at < 0 ? m - 1 : at;
  require(idx < m, "composer: history index out of range");
  require(times_match(hist.nb1.snapshot(idx).time, layers.time),
          "composer: history snapshot is not aligned with the layer state");

  const auto& g = target;
  const double e2 = eps * eps, e3 = e2 * eps;
  const double t = outer.time;
  auto L = [&](const LayerField2D& f) { return lift(f, g, eps); };

  // layer profiles, their mesh derivatives, and their time derivatives, lifted
  const ScalarField2D dt_nb1 = L(hist.nb1.time_derivative(1, idx));
  const ScalarField2D dt_nb2 = L(hist.nb2.time_derivative(1, idx));
  const ScalarField2D dt_u2b2 = L(hist.u2b2.time_derivative(1, idx));
  const ScalarField2D Lnb1 = L(layers.nb1), Lnb2 = L(layers.nb2);
  const ScalarField2D Ldx_nb1 = L(ddx(layers.nb1)), Ldx_nb2 = L(ddx(layers.nb2));
  const ScalarField2D Ldz_nb1 = L(ddz(layers.nb1)), Ldz_nb2 = L(ddz(layers.nb2));
  const ScalarField2D Lcb1 = L(layers.cb1), Lcb2 = L(layers.cb2);
  const ScalarField2D Ldx_cb1 = L(ddx(layers.cb1)), Ldx_cb2 = L(ddx(layers.cb2));
  const ScalarField2D Ldz_cb1 = L(ddz(layers.cb1)), Ldz_cb2 = L(ddz(layers.cb2));
  const ScalarField2D Lu1b1 = L(layers.u1b1), Lu1b2 = L(layers.u1b2);
  const ScalarField2D Ldx_u1b1 = L(ddx(layers.u1b1)), Ldz_u1b1 = L(ddz(layers.u1b1));
  const ScalarField2D Ldxx_u1b1 = L(d2dx2(layers.u1b1));
  const ScalarField2D Lu2b2 = L(layers.u2b2);
  const ScalarField2D Ldx_u2b2 = L(ddx(layers.u2b2)), Ldz_u2b2 = L(ddz(layers.u2b2));
  const ScalarField2D Ldx_pb2 = L(ddx(layers.pb2));

  // outer fields on the target grid, with their derivatives
  const ScalarField2D ne0 = to_grid(outer.n, g), ce0 = to_grid(outer.c, g);
  const ScalarField2D u1e0 = to_grid(outer.u.u1, g), u2e0 = to_grid(outer.u.u2, g);
  const ScalarField2D dx_ne0 = ddx(ne0), dy_ne0 = ddy(ne0);
  const ScalarField2D dx_ce0 = ddx(ce0), dy_ce0 = ddy(ce0), dyy_ce0 = d2dy2(ce0);
  const ScalarField2D dx_u1e0 = ddx(u1e0), lap_u1e0 = laplacian(u1e0);
  const ScalarField2D dx_u2e0 = ddx(u2e0), dy_u2e0 = ddy(u2e0);

  // wall traces, replicated and Taylor-extended
  const BoundaryTraces tr = extract_traces(outer);
  auto one = [](double) { return 1.0; };
  auto lin = [](double y) { return y; };
  auto zlin = [&](double y) { return y / eps; };
  auto zquad = [&](double y) { return 0.5 * (y / eps) * (y / eps); };
  const ScalarField2D rep_nbar = replicate(tr.nbar, g, t, one);
  const ScalarField2D rep_cbar = replicate(tr.cbar, g, t, one);
  const ScalarField2D rep_u1bar = replicate(tr.u1bar, g, t, one);
  const ScalarField2D rep_dyc = replicate(tr.dyc, g, t, one);
  const ScalarField2D y_dyn = replicate(tr.dyn, g, t, lin);
  const ScalarField2D y_dyu2 = replicate(tr.dyu2, g, t, lin);
  const ScalarField2D u1E1 = replicate(tr.dyu1, g, t, zlin);
  const ScalarField2D u2E2 = replicate(tr.dyyu2, g, t, zquad);
  const ScalarField2D cE1 = replicate(tr.dyc, g, t, zlin);
  const ScalarField2D nE1 = replicate(tr.dyn, g, t, zlin);
  const ScalarField2D dx_cE1 = replicate(ddx_trace(tr.dyc, g->Lx), g, t, zlin);
  const ScalarField2D dx_cE0 = replicate(ddx_trace(tr.cbar, g->Lx), g, t, one);
  const ScalarField2D dx_u1E0 = replicate(ddx_trace(tr.u1bar, g->Lx), g, t, one);

  // outer-minus-Taylor coefficients (vanish at the wall)
  const ScalarField2D A = u1e0 - rep_u1bar;
  const ScalarField2D B = u2e0 - y_dyu2;
  const ScalarField2D C0 = ce0 - rep_cbar;
  const ScalarField2D G = y_dyn + rep_nbar - ne0;
  const ScalarField2D H = rep_dyc - dy_ce0;
  const ScalarField2D Pn = ne0 - rep_nbar;
  const ScalarField2D dx_A = dx_u1e0 - dx_u1E0;

  // assembled fields appearing inside the formulas
  const ApproxSolution a = assemble(outer, layers, eps, target);
  const ScalarField2D dxx_ca = d2dx2(a.ca);
  const ScalarField2D dy_u1a = ddy(a.u1a);
  const ScalarField2D lap_u2a = laplacian(a.u2a);

  // --- density forcing ---------------------------------------------------
  ScalarField2D mN = eps * dt_nb1 + e2 * dt_nb2;
  mN += u1e0 * (eps * Ldx_nb1 + e2 * Ldx_nb2);
  mN += eps * (Lu1b1 * dx_ne0);
  mN += eps * (Lu1b1 * (eps * Ldx_nb1 + e2 * Ldx_nb2));
  mN += u2e0 * (Ldz_nb1 + eps * Ldz_nb2);
  mN += e2 * (Lu2b2 * dy_ne0);
  mN += e2 * (Lu2b2 * (Ldz_nb1 + eps * Ldz_nb2));
  // tangential chemotactic-flux bracket, inside -d/dx
  ScalarField2D Fx = eps * Ldx_nb1 + e2 * Ldx_nb2;
  Fx -= ne0 * (eps * Ldx_cb1 + e2 * Ldx_cb2);
  Fx -= (eps * Lnb1 + e2 * Lnb2) * dx_ce0;
  Fx -= (eps * Lnb1 + e2 * Lnb2) * (eps * Ldx_cb1 + e2 * Ldx_cb2);
  // wall-normal flux brackets, inside -d/dy
  const ScalarField2D Fy1 = G * Ldz_cb1 + eps * (Lnb1 * H);
  ScalarField2D Fy2 = -(eps * (Pn * Ldz_cb2));
  Fy2 -= e2 * (Lnb2 * (dy_ce0 + Ldz_cb1));
  Fy2 -= eps * ((eps * Lnb1 + e2 * Lnb2) * Ldz_cb2);
  mN -= ddx(Fx);
  mN -= ddy(Fy1);
  mN -= ddy(Fy2);

  // --- oxygen forcing ----------------------------------------------------
  ScalarField2D mK = eps * (A * Ldx_cb1) + e2 * (A * Ldx_cb2);
  mK += B * Ldz_cb1 + eps * (B * Ldz_cb2);
  mK -= e2 * dyy_ce0;
  mK += eps * (C0 * Lnb1) + e2 * (C0 * Lnb2);
  mK += eps * (Lu1b1 * (dx_ce0 - dx_cE0));
  mK += e3 * (Lu1b1 * Ldx_cb2);
  mK -= e2 * (Lu2b2 * H);
  mK += e3 * (Lu2b2 * Ldz_cb2);
  mK -= e2 * dxx_ca;
  mK += e3 * (Lcb1 * Lnb2);
  mK += e2 * (Lcb2 * (eps * Lnb1 + e2 * Lnb2));
  mK += eps * (Lcb1 * Pn) + e2 * (Lcb2 * Pn);
  mK -= e2 * (u1E1 * Ldx_cb1 + u2E2 * Ldz_cb1 + Lu1b1 * dx_cE1 + Lu1b2 * dx_cE0 +
              cE1 * Lnb1 + Lcb1 * nE1);

  // --- tangential momentum forcing ----------------------------------------
  ScalarField2D mU1 = eps * (A * Ldx_u1b1);
  mU1 += B * Ldz_u1b1;
  mU1 += e2 * Ldx_pb2;
  mU1 -= e3 * Ldxx_u1b1;
  mU1 -= e2 * lap_u1e0;
  mU1 += eps * (Lu1b1 * dx_A);
  mU1 += e2 * (Lu2b2 * dy_u1a);
  mU1 += e2 * (Lu1b1 * Ldx_u1b1);

  // --- normal momentum forcing --------------------------------------------
  ScalarField2D mU2 = e2 * dt_u2b2;
  mU2 += eps * (Lu1b1 * dx_u2e0);
  mU2 += e2 * (u1e0 * Ldx_u2b2);
  mU2 += e3 * (Lu1b1 * Ldx_u2b2);
  mU2 -= e2 * lap_u2a;
  mU2 += e2 * (Lu2b2 * dy_u2e0);
  mU2 += eps * (u2e0 * Ldz_u2b2);
  mU2 += e3 * (Lu2b2 * Ldz_u2b2);
  mU2 -= e2 * Lnb2;

  RemainderFields rem;
  rem.epsilon = eps;
  rem.time = t;
  rem.N = -std::move(mN);
  rem.K = -std::move(mK);
  rem.U1 = -std::move(mU1);
  rem.U2 = -std::move(mU2);
  for (ScalarField2D* f : {&rem.N, &rem.K, &rem.U1, &rem.U2}) f->time = t;
  return rem;
}

}  // namespace cns
