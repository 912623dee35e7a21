#include "cns/viscous.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "cns/fft.hpp"
#include "cns/parallel.hpp"
#include "cns/poisson.hpp"
#include "cns/tridiag.hpp"

namespace cns {
namespace {

constexpr double kNegativityFloor = -1e-8;

double field_max_abs(const ScalarField2D& f) {
  double m = 0.0;
  for (double v : f.v) m = std::max(m, std::fabs(v));
  return m;
}

double field_min(const ScalarField2D& f) {
  double m = f.v.empty() ? 0.0 : f.v[0];
  for (double v : f.v) m = std::min(m, v);
  return m;
}

double field_max(const ScalarField2D& f) {
  double m = f.v.empty() ? 0.0 : f.v[0];
  for (double v : f.v) m = std::max(m, v);
  return m;
}

struct End3 {
  double w0, w1, w2;
};

End3 top_d1(const Grid2D& g) {
  const int ny = g.Ny;
  const double x0 = g.y[ny - 3], x1 = g.y[ny - 2], x2 = g.y[ny - 1];
  End3 w;
  w.w0 = (x2 - x1) / ((x0 - x1) * (x0 - x2));
  w.w1 = (x2 - x0) / ((x1 - x0) * (x1 - x2));
  w.w2 = (2.0 * x2 - x0 - x1) / ((x2 - x0) * (x2 - x1));
  return w;
}

void require_state(const ViscousState& s) {
  if (!s.n.grid || s.n.grid != s.c.grid || s.n.grid != s.omega.grid ||
      s.n.grid != s.u.u1.grid || s.n.grid != s.u.u2.grid)
    throw std::invalid_argument("viscous state: fields must share one grid");
  if (static_cast<int>(s.u1_far.size()) != s.n.grid->Nx)
    throw std::invalid_argument("viscous state: u1_far size must equal Nx");
  if (static_cast<int>(s.dyn_far.size()) != s.n.grid->Nx)
    throw std::invalid_argument("viscous state: dyn_far size must equal Nx");
  if (!(s.epsilon > 0.0))
    throw std::invalid_argument("viscous state: epsilon must be positive");
}

void require_layer_resolved(const Grid2D& g, double eps) {
  const double h0 = g.y[1] - g.y[0];
  if (h0 > eps / 4.0 + 1e-15)
    throw std::runtime_error(
        "viscous solver: wall spacing " + std::to_string(h0) +
        " does not resolve the viscous layer (need <= epsilon/4 = " +
        std::to_string(eps / 4.0) + ")");
}

/**
 * Backward-Euler solve of (I + dt*nu*(kappa^2 - D_yy)) f = rhs per x-mode,
 * where D_yy is the flux form with zero-flux faces at the wall and at the top
 * (the top boundary face is the caller's business, handled explicitly).
 * With dirichlet_wall / dirichlet_top set, the corresponding row instead pins
 * f to the given value (wall: 0; top: the explicitly transported row).
 */
void implicit_diffuse(ScalarField2D& f, double dt, double nu, bool dirichlet_wall,
                      bool dirichlet_top) {
  const Grid2D& g = *f.grid;
  const int nx = g.Nx, ny = g.Ny;
  auto fft = get_row_fft(nx);
  const int nk = fft->nk();

  std::vector<std::complex<double>> fhat(static_cast<size_t>(ny) * nk);
  for (int j = 0; j < ny; ++j)
    fft->forward(&f.v[static_cast<size_t>(j) * nx], &fhat[static_cast<size_t>(j) * nk]);

  parallel_for(nk, [&](int k) {
    const double kappa = 2.0 * M_PI * k / g.Lx;
    const double k2 = kappa * kappa;
    Tridiag T(ny);
    for (int j = 0; j < ny; ++j) {
      const double w = g.yweight(j);
      double diag = 1.0 + dt * nu * k2;
      if (j > 0) {
        const double hlo = g.y[j] - g.y[j - 1];
        T.a[j] = -dt * nu / (hlo * w);
        diag += dt * nu / (hlo * w);
      }
      if (j + 1 < ny) {
        const double hhi = g.y[j + 1] - g.y[j];
        T.c[j] = -dt * nu / (hhi * w);
        diag += dt * nu / (hhi * w);
      }
      T.b[j] = diag;
    }
    if (dirichlet_wall) {
      T.a[0] = 0.0;
      T.b[0] = 1.0;
      T.c[0] = 0.0;
    }
    if (dirichlet_top) {
      T.a[ny - 1] = 0.0;
      T.b[ny - 1] = 1.0;
      T.c[ny - 1] = 0.0;
    }
    thread_local std::vector<double> re, im;
    re.resize(ny);
    im.resize(ny);
    for (int j = 0; j < ny; ++j) {
      const std::complex<double> w = fhat[static_cast<size_t>(j) * nk + k];
      re[j] = w.real();
      im[j] = w.imag();
    }
    if (dirichlet_wall) re[0] = im[0] = 0.0;
    T.solve(re.data());
    T.solve(im.data());
    for (int j = 0; j < ny; ++j)
      fhat[static_cast<size_t>(j) * nk + k] = {re[j], im[j]};
  });

  for (int j = 0; j < ny; ++j)
    fft->inverse(&fhat[static_cast<size_t>(j) * nk], &f.v[static_cast<size_t>(j) * nx]);
}

/** Adds dt * S(x, y, t) pointwise; exact zeros are skipped so that attaching
 *  all-zero sources leaves the step bitwise unchanged. */
void add_source(ScalarField2D& f, const std::function<double(double, double, double)>& src,
                double dt, double t) {
  if (!src) return;
  const Grid2D& g = *f.grid;
  for (int j = 0; j < g.Ny; ++j)
    for (int i = 0; i < g.Nx; ++i) {
      const double sv = src(g.x(i), g.y[j], t);
      if (sv != 0.0) f.at(i, j) += dt * sv;
    }
}

}  // namespace

ViscousState make_viscous_state(ScalarField2D n, ScalarField2D c, ScalarField2D omega,
                                std::vector<double> u1_far, double epsilon) {
  ViscousState s;
  s.n = std::move(n);
  s.c = std::move(c);
  s.omega = std::move(omega);
  s.u1_far = std::move(u1_far);
  s.epsilon = epsilon;
  s.time = s.n.time;
  s.u = VectorField2D(s.n.grid);
  {
    const Grid2D& g = *s.n.grid;
    const End3 tw = top_d1(g);
    const int ny = g.Ny;
    s.dyn_far.resize(g.Nx);
    for (int i = 0; i < g.Nx; ++i)
      s.dyn_far[i] = tw.w0 * s.n.at(i, ny - 3) + tw.w1 * s.n.at(i, ny - 2) +
                     tw.w2 * s.n.at(i, ny - 1);
  }
  require_state(s);
  require_layer_resolved(*s.n.grid, epsilon);
  if (field_min(s.n) < kNegativityFloor || field_min(s.c) < kNegativityFloor)
    throw std::invalid_argument("viscous state: n and c must be nonnegative");
  StreamfunctionResult sr = solve_streamfunction(s.omega, s.u1_far);
  s.u = std::move(sr.u);
  s.c_max0 = field_max(s.c);
  return s;
}

void enable_manufactured_sources(ViscousState& s, ViscousSources src) {
  s.sources = std::make_shared<const ViscousSources>(std::move(src));
}

ViscousState step_viscous(const ViscousState& s, double dt) {
  require_state(s);
  if (!(dt > 0.0)) throw std::invalid_argument("step_viscous: dt must be positive");
  const Grid2D& g = *s.n.grid;
  require_layer_resolved(g, s.epsilon);
  const int nx = g.Nx, ny = g.Ny;
  const double eps2 = s.epsilon * s.epsilon;

  // Advective + chemotactic CFL (all transport is explicit; diffusion is not).
  ScalarField2D dxc = ddx(s.c);
  double vmax1 = field_max_abs(s.u.u1) + field_max_abs(dxc);
  double gray = 0.0;
  for (int j = 0; j + 1 < ny; ++j) {
    const double h = g.y[j + 1] - g.y[j];
    for (int i = 0; i < nx; ++i)
      gray = std::max(gray, std::fabs(s.c.at(i, j + 1) - s.c.at(i, j)) / h);
  }
  const double vmax2 = field_max_abs(s.u.u2) + gray;
  const double cfl = dt * (vmax1 / g.dx + vmax2 / g.min_dy());
  if (cfl > 1.0)
    throw std::runtime_error("step_viscous: advective CFL violated (dt too large): " +
                             std::to_string(cfl));

  // ---- density: explicit transport + chemotaxis in conservative form --------
  // The wall face vanishes term by term (u2 = 0, dy c = 0, dy n = 0); the top
  // control volume sees a one-sided explicit boundary face, as in the
  // inviscid-limit solver, so far-field behaviour matches between the two.
  ScalarField2D nstar(s.n.grid, s.time);
  {
    ScalarField2D fx(s.n.grid);
    for (size_t q = 0; q < fx.v.size(); ++q)
      fx.v[q] = s.u.u1.v[q] * s.n.v[q] + s.n.v[q] * dxc.v[q];
    ScalarField2D dfx = ddx(fx);
    for (size_t q = 0; q < nstar.v.size(); ++q) nstar.v[q] = s.n.v[q] - dt * dfx.v[q];

    std::vector<double> aface(static_cast<size_t>(nx) * (ny - 1));
    for (int j = 0; j + 1 < ny; ++j) {
      const double h = g.y[j + 1] - g.y[j];
      for (int i = 0; i < nx; ++i) {
        const double adv = 0.5 * (s.u.u2.at(i, j) * s.n.at(i, j) +
                                  s.u.u2.at(i, j + 1) * s.n.at(i, j + 1));
        const double nf = 0.5 * (s.n.at(i, j) + s.n.at(i, j + 1));
        const double dcf = (s.c.at(i, j + 1) - s.c.at(i, j)) / h;
        aface[static_cast<size_t>(j) * nx + i] = adv + nf * dcf;
      }
    }
    const End3 tw = top_d1(g);
    for (int j = 0; j < ny; ++j) {
      const double w = g.yweight(j);
      for (int i = 0; i < nx; ++i) {
        const double below = (j == 0) ? 0.0 : aface[static_cast<size_t>(j - 1) * nx + i];
        double above;
        if (j + 1 < ny) {
          above = aface[static_cast<size_t>(j) * nx + i];
        } else {
          const double dyc_top = tw.w0 * s.c.at(i, ny - 3) + tw.w1 * s.c.at(i, ny - 2) +
                                 tw.w2 * s.c.at(i, ny - 1);
          above = s.u.u2.at(i, ny - 1) * s.n.at(i, ny - 1) +
                  s.n.at(i, ny - 1) * dyc_top - s.dyn_far[i];
        }
        nstar.at(i, j) -= dt * (above - below) / w;
      }
    }
  }
  if (s.sources) add_source(nstar, s.sources->n, dt, s.time);
  // Implicit full Laplacian of n per x-mode (interior diffusive faces plus the
  // spectral x part); zero-flux faces at both walls keep mass exact.
  ScalarField2D nnew = nstar;
  implicit_diffuse(nnew, dt, 1.0, false, false);
  nnew.time = s.time + dt;
  if (field_min(nnew) < kNegativityFloor)
    throw std::runtime_error("step_viscous: density went negative beyond tolerance");

  // ---- oxygen: explicit transport, implicit eps^2 diffusion, exact reaction --
  ScalarField2D cnew(s.c.grid, s.time + dt);
  {
    ScalarField2D tr = advect(s.u, s.c);
    for (size_t q = 0; q < cnew.v.size(); ++q) cnew.v[q] = s.c.v[q] - dt * tr.v[q];
    if (s.sources) add_source(cnew, s.sources->c, dt, s.time);
    implicit_diffuse(cnew, dt, eps2, false, false);
    for (size_t q = 0; q < cnew.v.size(); ++q) cnew.v[q] *= std::exp(-dt * nnew.v[q]);
  }
  if (field_min(cnew) < kNegativityFloor)
    throw std::runtime_error("step_viscous: oxygen went negative beyond tolerance");
  if (!s.sources) {
    const double slack = 1e-10 * std::max(1.0, std::fabs(s.c_max0));
    if (field_max(cnew) > s.c_max0 + slack)
      throw std::runtime_error("step_viscous: oxygen maximum principle violated");
  }

  // ---- vorticity: explicit transport + buoyancy torque, implicit diffusion ---
  ScalarField2D onew(s.omega.grid, s.time + dt);
  {
    ScalarField2D tr = advect(s.u, s.omega);
    ScalarField2D dxn = ddx(s.n);
    for (size_t q = 0; q < onew.v.size(); ++q)
      onew.v[q] = s.omega.v[q] - dt * (tr.v[q] + dxn.v[q]);
    if (s.sources) add_source(onew, s.sources->omega, dt, s.time);
    // wall row pinned to zero (slip condition), top row left at its
    // transport-only value (no artificial viscous layer at the truncation)
    implicit_diffuse(onew, dt, eps2, true, true);
  }

  // ---- velocity recovery ------------------------------------------------------
  StreamfunctionResult sr = solve_streamfunction(onew, s.u1_far);

  ViscousState out;
  out.n = std::move(nnew);
  out.c = std::move(cnew);
  out.omega = std::move(onew);
  out.u = std::move(sr.u);
  out.u.u1.time = out.u.u2.time = s.time + dt;
  out.u1_far = s.u1_far;
  out.dyn_far = s.dyn_far;
  out.epsilon = s.epsilon;
  out.time = s.time + dt;
  out.c_max0 = s.c_max0;
  out.sources = s.sources;
  return out;
}

}  // namespace cns
