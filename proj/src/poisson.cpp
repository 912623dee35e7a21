#include "cns/poisson.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "cns/fft.hpp"
#include "cns/operators.hpp"
#include "cns/tridiag.hpp"

namespace cns {
namespace {

// 3-point second-derivative weights at an interior node of a nonuniform mesh.
void d2_weights(double hm, double hp, double& wl, double& wc, double& wr) {
  wl = 2.0 / (hm * (hm + hp));
  wc = -2.0 / (hm * hp);
  wr = 2.0 / (hp * (hm + hp));
}

// One-sided 3-point first-derivative weights at x2 for nodes {x0, x1, x2}.
void d1_end_weights(double x0, double x1, double x2, double& w0, double& w1, double& w2) {
  w0 = (x2 - x1) / ((x0 - x1) * (x0 - x2));
  w1 = (x2 - x0) / ((x1 - x0) * (x1 - x2));
  w2 = (2.0 * x2 - x0 - x1) / ((x2 - x0) * (x2 - x1));
}

// Assembles (D2 - kappa^2) on the interior rows; boundary rows are left for
// the caller to fill.
Tridiag interior_matrix(const Grid2D& g, double kappa2) {
  const int ny = g.Ny;
  Tridiag T(ny);
  for (int j = 1; j + 1 < ny; ++j) {
    double wl, wc, wr;
    d2_weights(g.y[j] - g.y[j - 1], g.y[j + 1] - g.y[j], wl, wc, wr);
    T.a[j] = wl;
    T.b[j] = wc - kappa2;
    T.c[j] = wr;
  }
  return T;
}

}  // namespace

StreamfunctionResult solve_streamfunction(const ScalarField2D& omega,
                                          const std::vector<double>& u1_far) {
  const Grid2D& g = *omega.grid;
  if (static_cast<int>(u1_far.size()) != g.Nx)
    throw std::invalid_argument("solve_streamfunction: u1_far size must equal Nx");
  const int nx = g.Nx, ny = g.Ny;
  auto fft = get_row_fft(nx);
  const int nk = fft->nk();

  std::vector<std::complex<double>> what(static_cast<size_t>(ny) * nk);
  std::vector<std::complex<double>> far(nk);
  for (int j = 0; j < ny; ++j) fft->forward(&omega.v[static_cast<size_t>(j) * nx], &what[static_cast<size_t>(j) * nk]);
  fft->forward(u1_far.data(), far.data());

  // Top boundary row: one-sided d_y Phi = u1_far.
  BoundaryRow3 top;
  {
    double w0, w1, w2;
    d1_end_weights(g.y[ny - 3], g.y[ny - 2], g.y[ny - 1], w0, w1, w2);
    top.d = w2;
    top.e = w1;
    top.f = w0;
  }

  std::vector<std::complex<double>> phihat(static_cast<size_t>(ny) * nk);
  std::vector<double> re(ny), im(ny);
  for (int k = 0; k < nk; ++k) {
    const double kappa = 2.0 * M_PI * k / g.Lx;
    Tridiag T = interior_matrix(g, kappa * kappa);
    T.b[0] = 1.0;  // Phi(wall) = 0
    T.c[0] = 0.0;
    const double m = fold_top_row(T, top);
    for (int j = 0; j < ny; ++j) {
      const std::complex<double> w = what[static_cast<size_t>(j) * nk + k];
      re[j] = w.real();
      im[j] = w.imag();
    }
    re[0] = im[0] = 0.0;
    re[ny - 1] = far[k].real() - m * re[ny - 2];
    im[ny - 1] = far[k].imag() - m * im[ny - 2];
    T.solve(re.data());
    T.solve(im.data());
    for (int j = 0; j < ny; ++j)
      phihat[static_cast<size_t>(j) * nk + k] = {re[j], im[j]};
  }

  StreamfunctionResult out{ScalarField2D(omega.grid), VectorField2D(omega.grid)};
  out.phi.time = omega.time;
  out.u.u1.time = out.u.u2.time = omega.time;
  for (int j = 0; j < ny; ++j)
    fft->inverse(&phihat[static_cast<size_t>(j) * nk], &out.phi.v[static_cast<size_t>(j) * nx]);
  out.u.u1 = ddy(out.phi);
  out.u.u2 = ddx(out.phi);
  for (double& v : out.u.u2.v) v = -v;
  out.u.u1.time = out.u.u2.time = omega.time;
  return out;
}

ScalarField2D solve_pressure(const ScalarField2D& rhs, const std::vector<double>& dyp_bottom,
                             const std::vector<double>& dyp_top) {
  const Grid2D& g = *rhs.grid;
  if (static_cast<int>(dyp_bottom.size()) != g.Nx || static_cast<int>(dyp_top.size()) != g.Nx)
    throw std::invalid_argument("solve_pressure: Neumann data size must equal Nx");
  const int nx = g.Nx, ny = g.Ny;
  auto fft = get_row_fft(nx);
  const int nk = fft->nk();

  std::vector<std::complex<double>> fhat(static_cast<size_t>(ny) * nk);
  std::vector<std::complex<double>> gb(nk), gt(nk);
  for (int j = 0; j < ny; ++j) fft->forward(&rhs.v[static_cast<size_t>(j) * nx], &fhat[static_cast<size_t>(j) * nk]);
  fft->forward(dyp_bottom.data(), gb.data());
  fft->forward(dyp_top.data(), gt.data());

  BoundaryRow3 bot, top;
  {
    double w0, w1, w2;
    // Lagrange weights for d1 at the FIRST node of {y0,y1,y2}.
    bot.d = (2.0 * g.y[0] - g.y[1] - g.y[2]) / ((g.y[0] - g.y[1]) * (g.y[0] - g.y[2]));
    bot.e = (g.y[0] - g.y[2]) / ((g.y[1] - g.y[0]) * (g.y[1] - g.y[2]));
    bot.f = (g.y[0] - g.y[1]) / ((g.y[2] - g.y[0]) * (g.y[2] - g.y[1]));
    d1_end_weights(g.y[ny - 3], g.y[ny - 2], g.y[ny - 1], w0, w1, w2);
    top.d = w2;
    top.e = w1;
    top.f = w0;
  }

  std::vector<std::complex<double>> phat(static_cast<size_t>(ny) * nk);
  std::vector<double> re(ny), im(ny);
  for (int k = 0; k < nk; ++k) {
    const double kappa = 2.0 * M_PI * k / g.Lx;
    Tridiag T = interior_matrix(g, kappa * kappa);
    double mb, mt;
    if (k == 0) {
      // The all-Neumann zero mode is defined up to a constant; pin it at the
      // wall and keep the top Neumann condition.
      T.b[0] = 1.0;
      T.c[0] = 0.0;
      mb = 0.0;
    } else {
      mb = fold_bottom_row(T, bot);
    }
    mt = fold_top_row(T, top);
    for (int j = 0; j < ny; ++j) {
      const std::complex<double> f = fhat[static_cast<size_t>(j) * nk + k];
      re[j] = f.real();
      im[j] = f.imag();
    }
    if (k == 0) {
      re[0] = im[0] = 0.0;
    } else {
      re[0] = gb[k].real() - mb * re[1];
      im[0] = gb[k].imag() - mb * im[1];
    }
    re[ny - 1] = gt[k].real() - mt * re[ny - 2];
    im[ny - 1] = gt[k].imag() - mt * im[ny - 2];
    T.solve(re.data());
    T.solve(im.data());
    for (int j = 0; j < ny; ++j)
      phat[static_cast<size_t>(j) * nk + k] = {re[j], im[j]};
  }

  ScalarField2D p(rhs.grid);
  p.time = rhs.time;
  for (int j = 0; j < ny; ++j)
    fft->inverse(&phat[static_cast<size_t>(j) * nk], &p.v[static_cast<size_t>(j) * nx]);

  // Shift to zero strip mean.
  double mass = 0.0, area = 0.0;
  for (int j = 0; j < ny; ++j) {
    const double wy = g.yweight(j);
    for (int i = 0; i < nx; ++i) {
      mass += wy * g.dx * p.at(i, j);
      area += wy * g.dx;
    }
  }
  const double mean = mass / area;
  for (double& v : p.v) v -= mean;
  return p;
}

}  // namespace cns
