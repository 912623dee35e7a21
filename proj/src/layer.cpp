#include "cns/layer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cns/operators.hpp"
#include "cns/parallel.hpp"
#include "cns/quadrature.hpp"
#include "cns/tridiag.hpp"

namespace cns {

namespace {

void require_layer_layout(const LayerField2D& a, const LayerField2D& b) {
  if (!a.zgrid || !b.zgrid) throw std::invalid_argument("layer field: missing grid");
  if (a.Nx != b.Nx || a.zgrid->Nz != b.zgrid->Nz ||
      std::fabs(a.Lx - b.Lx) > 1e-12 * std::max(1.0, std::fabs(a.Lx)) ||
      std::fabs(a.zgrid->Zmax - b.zgrid->Zmax) > 1e-12 * a.zgrid->Zmax)
    throw std::invalid_argument("layer field: layout mismatch");
}

LayerField2D product(const LayerField2D& a, const LayerField2D& b) {
  require_layer_layout(a, b);
  LayerField2D out(a.zgrid, a.Lx, a.Nx, a.time);
  for (size_t q = 0; q < out.v.size(); ++q) out.v[q] = a.v[q] * b.v[q];
  return out;
}

void add_product(LayerField2D& acc, const LayerField2D& a, const LayerField2D& b) {
  require_layer_layout(acc, a);
  require_layer_layout(acc, b);
  for (size_t q = 0; q < acc.v.size(); ++q) acc.v[q] += a.v[q] * b.v[q];
}

double min_spacing(const LayerGrid& g) {
  double h = g.z[1] - g.z[0];
  for (int k = 1; k + 1 < g.Nz; ++k) h = std::min(h, g.z[k + 1] - g.z[k]);
  return h;
}

/** Tail magnitude of a profile relative to its peak (second-to-last node;
 * the last node is pinned to zero by the Dirichlet condition). */
double tail_ratio(const LayerField2D& p) {
  const int nz = p.nz();
  double peak = max_abs(p.v);
  if (peak <= 0.0) return 0.0;
  double tail = 0.0;
  for (int i = 0; i < p.Nx; ++i) tail = std::max(tail, std::fabs(p.at(i, nz - 2)));
  return tail / peak;
}

/** Largest fitted decay length over the columns of a profile: OLS fit of
 * log|v| on z in [0.45, 0.9]*Zmax. Columns whose window values sit below the
 * noise floor are skipped (already decayed); a non-decaying fit above the
 * floor is reported as Zmax so that resolution guards trip. */
double profile_decay_length(const LayerField2D& p) {
  const auto& z = p.zgrid->z;
  const int nz = p.nz();
  const double Z = p.zgrid->Zmax;
  const double peak = max_abs(p.v);
  if (peak <= 0.0) return 0.0;
  double worst = 0.0;
  for (int i = 0; i < p.Nx; ++i) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int m = 0;
    bool usable = true;
    for (int k = 0; k < nz; ++k) {
      if (z[k] < 0.45 * Z || z[k] > 0.9 * Z) continue;
      const double a = std::fabs(p.at(i, k));
      if (a <= 1e-13 * peak) {
        usable = false;  // dips to the floor inside the window: treat as decayed
        break;
      }
      const double ly = std::log(a);
      sx += z[k];
      sy += ly;
      sxx += z[k] * z[k];
      sxy += z[k] * ly;
      ++m;
    }
    if (!usable || m < 4) continue;
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    worst = std::max(worst, slope < 0.0 ? -1.0 / slope : Z);
  }
  return worst;
}

}  // namespace

double layer_cutoff(double z, double Zmax) {
  double t = (2.0 * z - Zmax) / Zmax;
  t = std::min(1.0, std::max(0.0, t));
  return 1.0 - t * t * (3.0 - 2.0 * t);
}

LayerState make_layer_state(const std::shared_ptr<const LayerGrid>& zg, double Lx, int Nx) {
  LayerState st;
  st.u1b1 = LayerField2D(zg, Lx, Nx);
  st.cb1 = LayerField2D(zg, Lx, Nx);
  st.nb1 = LayerField2D(zg, Lx, Nx);
  st.u2b2 = LayerField2D(zg, Lx, Nx);
  st.pb2 = LayerField2D(zg, Lx, Nx);
  st.u1b2 = LayerField2D(zg, Lx, Nx);
  st.cb2 = LayerField2D(zg, Lx, Nx);
  st.nb2 = LayerField2D(zg, Lx, Nx);
  st.f.assign(Nx, 0.0);
  st.F.assign(Nx, 0.0);
  return st;
}

LayerCoefficients make_layer_coefficients(const TraceExtensionSet& ext,
                                          const std::shared_ptr<const LayerGrid>& zg) {
  LayerCoefficients co;
  co.time = ext.tr.time;
  co.u1E0 = ext.u1E0(zg);
  co.nE0 = ext.nE0(zg);
  co.cE0 = ext.cE0(zg);
  co.u2E1 = ext.u2E1(zg);
  co.u2E2 = ext.u2E2(zg);
  co.nE1 = ext.nE1(zg);
  co.cE1 = ext.cE1(zg);
  co.u1E1 = ext.u1E1(zg);
  for (int k = 0; k < zg->Nz; ++k) {
    const double chi = layer_cutoff(zg->z[k], zg->Zmax);
    for (int i = 0; i < co.u2E1.Nx; ++i) {
      co.u2E1.at(i, k) *= chi;
      co.u2E2.at(i, k) *= chi;
    }
  }
  co.dx_u1E0 = ddx(co.u1E0);
  co.dx_cE0 = ddx(co.cE0);
  co.dx_u1E1 = ddx(co.u1E1);
  co.dx_cE1 = ddx(co.cE1);
  const int nx = static_cast<int>(ext.tr.nbar.size());
  co.dyu1_f = LayerField2D(zg, ext.tr.Lx, nx, ext.tr.time);
  co.dyc_f = LayerField2D(zg, ext.tr.Lx, nx, ext.tr.time);
  for (int k = 0; k < zg->Nz; ++k)
    for (int i = 0; i < nx; ++i) {
      co.dyu1_f.at(i, k) = ext.tr.dyu1[i];
      co.dyc_f.at(i, k) = ext.tr.dyc[i];
    }
  co.react_cb1 = LayerField2D(zg, ext.tr.Lx, nx, ext.tr.time);
  for (size_t q = 0; q < co.react_cb1.v.size(); ++q)
    co.react_cb1.v[q] = co.nE0.v[q] * (1.0 + co.cE0.v[q]);
  co.neumann_u1b1.resize(nx);
  co.neumann_cb1.resize(nx);
  for (int i = 0; i < nx; ++i) {
    co.neumann_u1b1[i] = -ext.tr.dyu1[i];
    co.neumann_cb1[i] = -ext.tr.dyc[i];
  }
  return co;
}

void layer_heat_step(LayerField2D& v, const LayerField2D* a1, const LayerField2D* a2,
                     const LayerField2D* r, const LayerField2D* forcing,
                     const std::vector<double>* neumann, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("layer_heat_step: dt must be positive");
  if (!v.zgrid) throw std::invalid_argument("layer_heat_step: missing grid");
  const auto& zg = *v.zgrid;
  const int nx = v.Nx, nz = zg.Nz;
  if (a1) require_layer_layout(v, *a1);
  if (a2) require_layer_layout(v, *a2);
  if (r) require_layer_layout(v, *r);
  if (forcing) require_layer_layout(v, *forcing);
  if (neumann && static_cast<int>(neumann->size()) != nx)
    throw std::invalid_argument("layer_heat_step: Neumann datum length mismatch");

  // advective CFL in x and z
  const double m1 = a1 ? max_abs(a1->v) : 0.0;
  const double m2 = a2 ? max_abs(a2->v) : 0.0;
  if (dt * (m1 / v.dx() + m2 / min_spacing(zg)) > 1.0)
    throw std::runtime_error("layer_heat_step: advective CFL violated");

  // explicit transport and forcing
  LayerField2D vs = v;
  if (a1) {
    LayerField2D dxv = ddx(v);
    for (size_t q = 0; q < vs.v.size(); ++q) vs.v[q] -= dt * a1->v[q] * dxv.v[q];
  }
  if (a2) {
    LayerField2D dzv = ddz(v);
    for (size_t q = 0; q < vs.v.size(); ++q) vs.v[q] -= dt * a2->v[q] * dzv.v[q];
  }
  if (forcing)
    for (size_t q = 0; q < vs.v.size(); ++q) vs.v[q] -= dt * forcing->v[q];

  // implicit dzz (and reaction): per-column tridiagonal with a one-sided
  // second-order Neumann row at z=0 and a Dirichlet zero row at Zmax
  double wb[3];
  fornberg_weights(zg.z[0], zg.z.data(), 3, 1, wb);
  parallel_for(nx, [&](int i) {
    Tridiag T(nz);
    for (int k = 1; k + 1 < nz; ++k) {
      const double hlo = zg.z[k] - zg.z[k - 1], hhi = zg.z[k + 1] - zg.z[k];
      const double wlo = 2.0 / (hlo * (hlo + hhi)), whi = 2.0 / (hhi * (hlo + hhi));
      T.a[k] = -dt * wlo;
      T.c[k] = -dt * whi;
      T.b[k] = 1.0 + dt * (wlo + whi) + (r ? dt * r->at(i, k) : 0.0);
    }
    T.b[nz - 1] = 1.0;
    T.a[nz - 1] = 0.0;
    const double m = fold_bottom_row(T, BoundaryRow3{wb[0], wb[1], wb[2]});
    std::vector<double> col(nz);
    col[0] = (neumann ? (*neumann)[i] : 0.0) - m * vs.at(i, 1);
    for (int k = 1; k + 1 < nz; ++k) col[k] = vs.at(i, k);
    col[nz - 1] = 0.0;
    T.solve(col.data());
    for (int k = 0; k < nz; ++k) v.at(i, k) = col[k];
  });
}

void step_u1b1(LayerState& st, const LayerCoefficients& co, double dt) {
  layer_heat_step(st.u1b1, &co.u1E0, &co.u2E1, &co.dx_u1E0, nullptr, &co.neumann_u1b1, dt);
}

bool compute_u2b2_and_f(LayerState& st) {
  bool ok1 = true, ok2 = true;
  LayerField2D w = ddx(st.u1b1);
  st.u2b2 = tail_integral_field(w, &ok1);
  LayerField2D cumulative = tail_integral_field(st.u1b1, &ok2);
  const int nx = st.u1b1.Nx;
  st.f.resize(nx);
  st.F.resize(nx);
  for (int i = 0; i < nx; ++i) {
    st.f[i] = st.u2b2.at(i, 0);
    st.F[i] = cumulative.at(i, 0);
  }
  return ok1 && ok2;
}

void step_cb1_nb1(LayerState& st, const LayerCoefficients& co, double dt) {
  LayerField2D forcing = product(st.u1b1, co.dx_cE0);
  layer_heat_step(st.cb1, &co.u1E0, &co.u2E1, &co.react_cb1, &forcing, &co.neumann_cb1, dt);
  st.nb1 = product(co.nE0, st.cb1);
}

bool compute_pb2(LayerState& st) {
  bool ok = true;
  st.pb2 = tail_integral_field(st.nb1, &ok);
  for (double& x : st.pb2.v) x = -x;
  return ok;
}

void step_u1b2(LayerState& st, const LayerCoefficients& co, double dt) {
  LayerField2D dxu = ddx(st.u1b1), dzu = ddz(st.u1b1);
  LayerField2D forcing = ddx(st.pb2);
  add_product(forcing, co.u1E1, dxu);
  add_product(forcing, co.u2E2, dzu);
  add_product(forcing, st.u1b1, co.dx_u1E1);
  add_product(forcing, st.u2b2, co.dyu1_f);
  add_product(forcing, st.u1b1, dxu);
  add_product(forcing, st.u2b2, dzu);
  layer_heat_step(st.u1b2, &co.u1E0, &co.u2E1, &co.dx_u1E0, &forcing, nullptr, dt);
}

namespace {

/** Closure integrand whose tail integral gives -nb2. */
LayerField2D closure_integrand(const LayerState& st, const LayerCoefficients& co,
                               const LayerField2D& dzcb1, const LayerField2D& cb2) {
  LayerField2D g = product(co.nE1, dzcb1);
  add_product(g, st.nb1, co.dyc_f);
  add_product(g, st.nb1, dzcb1);
  LayerField2D dzc2 = ddz(cb2);
  add_product(g, co.nE0, dzc2);
  return g;
}

}  // namespace

double step_cb2_nb2(LayerState& st, const LayerCoefficients& co, double dt) {
  LayerField2D dxc1 = ddx(st.cb1), dzc1 = ddz(st.cb1);
  // forcing terms that do not involve nb2
  LayerField2D fixed = product(st.u1b2, co.dx_cE0);
  add_product(fixed, co.u1E1, dxc1);
  add_product(fixed, co.u2E2, dzc1);
  add_product(fixed, st.u1b1, co.dx_cE1);
  add_product(fixed, st.u2b2, co.dyc_f);
  add_product(fixed, st.u1b1, dxc1);
  add_product(fixed, st.u2b2, dzc1);
  add_product(fixed, co.cE1, st.nb1);
  add_product(fixed, st.cb1, co.nE1);
  add_product(fixed, st.cb1, st.nb1);

  auto solve_with = [&](const LayerField2D& nb2) {
    LayerField2D forcing = fixed;
    add_product(forcing, co.cE0, nb2);
    LayerField2D c = st.cb2;
    layer_heat_step(c, &co.u1E0, &co.u2E1, &co.nE0, &forcing, nullptr, dt);
    return c;
  };
  auto closure = [&](const LayerField2D& cb2) {
    LayerField2D g = closure_integrand(st, co, dzc1, cb2);
    LayerField2D nb2 = tail_integral_field(g, nullptr);
    for (double& x : nb2.v) x = -x;
    return nb2;
  };

  LayerField2D c1 = solve_with(st.nb2);
  LayerField2D n1 = closure(c1);
  LayerField2D c2 = solve_with(n1);  // one fixed-point sweep
  LayerField2D n2 = closure(c2);
  const double change = max_abs_diff(c1.v, c2.v);
  const double scale = max_abs(c2.v);
  st.cb2 = std::move(c2);
  st.nb2 = std::move(n2);
  return scale > 1e-14 ? change / scale : 0.0;
}

LayerStepReport step_layers(LayerState& st, const LayerCoefficients& co, double dt) {
  LayerStepReport rep;
  step_u1b1(st, co, dt);
  rep.quad_decay_ok = compute_u2b2_and_f(st);
  step_cb1_nb1(st, co, dt);
  rep.quad_decay_ok = compute_pb2(st) && rep.quad_decay_ok;
  step_u1b2(st, co, dt);
  rep.sweep_change = step_cb2_nb2(st, co, dt);

  st.time += dt;
  st.u1b1.time = st.cb1.time = st.nb1.time = st.u2b2.time = st.time;
  st.pb2.time = st.u1b2.time = st.cb2.time = st.nb2.time = st.time;

  for (const LayerField2D* p : {&st.u1b1, &st.cb1, &st.u1b2, &st.cb2}) {
    rep.tail_ratio = std::max(rep.tail_ratio, tail_ratio(*p));
    rep.max_decay_len = std::max(rep.max_decay_len, profile_decay_length(*p));
  }
  return rep;
}

double layer_divergence_residual(const LayerState& st) {
  LayerField2D w = ddx(st.u1b1);
  LayerField2D face = quad_face_field(w);
  const auto& z = st.u1b1.zgrid->z;
  double worst = 0.0;
  for (int k = 0; k + 1 < st.u1b1.nz(); ++k) {
    const double h = z[k + 1] - z[k];
    for (int i = 0; i < st.u1b1.Nx; ++i)
      worst = std::max(worst,
                       std::fabs((st.u2b2.at(i, k + 1) - st.u2b2.at(i, k)) / h + face.at(i, k)));
  }
  return worst;
}

double slip_identity_residual(const LayerState& st) {
  std::vector<double> dxF = ddx_trace(st.F, st.u1b1.Lx);
  double worst = 0.0;
  for (size_t i = 0; i < st.f.size(); ++i)
    worst = std::max(worst, std::fabs(st.f[i] - dxF[i]));
  return worst;
}

double pressure_gradient_residual(const LayerState& st) {
  LayerField2D face = quad_face_field(st.nb1);
  const auto& z = st.nb1.zgrid->z;
  double worst = 0.0;
  for (int k = 0; k + 1 < st.nb1.nz(); ++k) {
    const double h = z[k + 1] - z[k];
    for (int i = 0; i < st.nb1.Nx; ++i)
      worst = std::max(worst,
                       std::fabs((st.pb2.at(i, k + 1) - st.pb2.at(i, k)) / h - face.at(i, k)));
  }
  return worst;
}

double density_closure_residual(const LayerState& st, const LayerCoefficients& co) {
  LayerField2D dzc1 = ddz(st.cb1);
  LayerField2D g = closure_integrand(st, co, dzc1, st.cb2);
  LayerField2D face = quad_face_field(g);
  const auto& z = st.nb2.zgrid->z;
  double worst = 0.0;
  for (int k = 0; k + 1 < st.nb2.nz(); ++k) {
    const double h = z[k + 1] - z[k];
    for (int i = 0; i < st.nb2.Nx; ++i)
      worst = std::max(worst,
                       std::fabs((st.nb2.at(i, k + 1) - st.nb2.at(i, k)) / h - face.at(i, k)));
  }
  return worst;
}

double density_identity_residual(const LayerState& st, const LayerCoefficients& co) {
  double worst = 0.0;
  for (size_t q = 0; q < st.nb1.v.size(); ++q)
    worst = std::max(worst, std::fabs(st.nb1.v[q] - co.nE0.v[q] * st.cb1.v[q]));
  return worst;
}

double zero_order_density_closure(double nE0, double cb0) { return nE0 * std::expm1(cb0); }

}  // namespace cns
