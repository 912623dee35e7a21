#include "cns/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include "cns/operators.hpp"

namespace cns {

namespace {

// Stencil derivative of a single column (3-point, one-sided at the ends).
void column_d1(const std::vector<double>& z, const double* f, double* out) {
  const int n = static_cast<int>(z.size());
  for (int k = 0; k < n; ++k) {
    int b = std::min(std::max(k - 1, 0), n - 3);
    double x0 = z[b] - z[k], x1 = z[b + 1] - z[k], x2 = z[b + 2] - z[k];
    // Lagrange derivative weights at 0 for nodes (x0,x1,x2)
    double w0 = (0.0 - x1 + 0.0 - x2) / ((x0 - x1) * (x0 - x2));
    double w1 = (0.0 - x0 + 0.0 - x2) / ((x1 - x0) * (x1 - x2));
    double w2 = (0.0 - x0 + 0.0 - x1) / ((x2 - x0) * (x2 - x1));
    out[k] = w0 * f[b] + w1 * f[b + 1] + w2 * f[b + 2];
  }
}

}  // namespace

double fit_decay_length(const LayerGrid& g, const double* f, bool* ok) {
  if (ok) *ok = true;
  const int n = g.Nz;
  double fmax = 0.0;
  for (int k = 0; k < n; ++k) fmax = std::max(fmax, std::abs(f[k]));
  const double fend = f[n - 1];
  if (std::abs(fend) <= 1e-13 * std::max(1.0, fmax)) return 0.0;  // tail negligible

  // last decade of the mesh (at least 4 samples, at least one unit of z)
  const double zcut = g.Zmax - std::max(1.0, 0.1 * g.Zmax);
  int k0 = n - 4;
  while (k0 > 0 && g.z[k0 - 1] >= zcut) --k0;
  const double sgn = fend > 0.0 ? 1.0 : -1.0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int m = 0;
  for (int k = k0; k < n; ++k) {
    double val = sgn * f[k];
    if (val <= 0.0) {  // sign change in the fit window: no clean exponential
      if (ok) *ok = false;
      return 0.0;
    }
    double lx = g.z[k], ly = std::log(val);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  double denom = m * sxx - sx * sx;
  double slope = (m * sxy - sx * sy) / denom;
  if (!(slope < 0.0)) {  // not decaying
    if (ok) *ok = false;
    return 0.0;
  }
  double ell = -1.0 / slope;
  if (ell > 0.5 * g.Zmax) {  // decays too slowly for the truncated domain
    if (ok) *ok = false;
    return 0.0;
  }
  return ell;
}

std::vector<double> tail_integrals(const LayerGrid& g, const double* f, bool* tail_ok) {
  const int n = g.Nz;
  std::vector<double> d1(n);
  column_d1(g.z, f, d1.data());

  bool ok = true;
  double ell = fit_decay_length(g, f, &ok);
  if (tail_ok) *tail_ok = ok;

  std::vector<double> out(n);
  out[n - 1] = f[n - 1] * ell;  // single-exponential tail beyond Zmax
  for (int k = n - 2; k >= 0; --k) {
    double h = g.z[k + 1] - g.z[k];
    out[k] = out[k + 1] + 0.5 * h * (f[k] + f[k + 1]) + h * h * (d1[k] - d1[k + 1]) / 12.0;
  }
  return out;
}

TailIntegral integrate_z_tail(const LayerGrid& g, const double* f) {
  TailIntegral r;
  std::vector<double> cum = tail_integrals(g, f, &r.tail_ok);
  r.value = cum[0];
  r.decay_len = fit_decay_length(g, f, nullptr);
  r.tail = f[g.Nz - 1] * r.decay_len;
  return r;
}

LayerField2D tail_integral_field(const LayerField2D& f, bool* tail_ok) {
  const int nx = f.Nx, nz = f.nz();
  LayerField2D out(f.zgrid, f.Lx, f.Nx, f.time);
  bool all_ok = true;
  std::vector<double> col(nz);
  for (int i = 0; i < nx; ++i) {
    for (int k = 0; k < nz; ++k) col[k] = f.at(i, k);
    bool ok = true;
    std::vector<double> cum = tail_integrals(*f.zgrid, col.data(), &ok);
    all_ok = all_ok && ok;
    for (int k = 0; k < nz; ++k) out.at(i, k) = cum[k];
  }
  if (tail_ok) *tail_ok = all_ok;
  return out;
}

LayerField2D quad_face_field(const LayerField2D& f) {
  const int nx = f.Nx, nz = f.nz();
  const auto& z = f.zgrid->z;
  LayerField2D d1 = ddz(f);
  LayerField2D out(f.zgrid, f.Lx, f.Nx, f.time);
  for (int k = 0; k + 1 < nz; ++k) {
    double h = z[k + 1] - z[k];
    for (int i = 0; i < nx; ++i)
      out.at(i, k) =
          0.5 * (f.at(i, k) + f.at(i, k + 1)) + h * (d1.at(i, k) - d1.at(i, k + 1)) / 12.0;
  }
  return out;
}

double strip_integral(const ScalarField2D& f) {
  const Grid2D& g = *f.grid;
  double total = 0.0;
  for (int j = 0; j < g.Ny; ++j) {
    double rowsum = 0.0;
    const double* row = f.v.data() + static_cast<size_t>(j) * g.Nx;
    for (int i = 0; i < g.Nx; ++i) rowsum += row[i];
    total += rowsum * g.yweight(j);
  }
  return total * g.dx;
}

}  // namespace cns
