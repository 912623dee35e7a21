#include "cns/operators.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <stdexcept>

#include "cns/fft.hpp"

namespace cns {

// Fornberg's algorithm: weights of the m-th derivative at x0 from samples at
// nodes[0..nn-1]. Fills w[0..nn-1].
void fornberg_weights(double x0, const double* nodes, int nn, int m, double* w) {
  std::vector<double> c(static_cast<size_t>(nn) * (m + 1), 0.0);
  auto C = [&](int i, int j) -> double& { return c[static_cast<size_t>(i) * (m + 1) + j]; };
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  C(0, 0) = 1.0;
  for (int i = 1; i < nn; ++i) {
    int mn = std::min(i, m);
    double c2 = 1.0;
    double c5 = c4;
    c4 = nodes[i] - x0;
    for (int j = 0; j < i; ++j) {
      double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) C(i, k) = c1 * (k * C(i - 1, k - 1) - c5 * C(i - 1, k)) / c2;
        C(i, 0) = -c1 * c5 * C(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) C(j, k) = (c4 * C(j, k) - k * C(j, k - 1)) / c3;
      C(j, 0) = c4 * C(j, 0) / c3;
    }
    c1 = c2;
  }
  for (int i = 0; i < nn; ++i) w[i] = C(i, m);
}

NodeDeriv::NodeDeriv(const std::vector<double>& nodes) : n_(static_cast<int>(nodes.size())) {
  if (n_ < 4) throw std::invalid_argument("NodeDeriv: need at least 4 nodes");
  rows1_.resize(n_);
  rows2_.resize(n_);
  for (int j = 0; j < n_; ++j) {
    // first derivative: 3-point
    {
      int base = std::min(std::max(j - 1, 0), n_ - 3);
      Row r;
      r.base = base;
      r.len = 3;
      fornberg_weights(nodes[j], nodes.data() + base, 3, 1, r.w.data());
      rows1_[j] = r;
    }
    // second derivative: 3-point inside, 4-point one-sided at the ends
    {
      Row r;
      if (j == 0 || j == n_ - 1) {
        r.base = (j == 0) ? 0 : n_ - 4;
        r.len = 4;
      } else {
        r.base = j - 1;
        r.len = 3;
      }
      fornberg_weights(nodes[j], nodes.data() + r.base, r.len, 2, r.w.data());
      rows2_[j] = r;
    }
  }
}

void NodeDeriv::d1(const double* f, double* out, int nx) const {
  for (int j = 0; j < n_; ++j) {
    const Row& r = rows1_[j];
    double* o = out + static_cast<size_t>(j) * nx;
    const double* f0 = f + static_cast<size_t>(r.base) * nx;
    for (int i = 0; i < nx; ++i)
      o[i] = r.w[0] * f0[i] + r.w[1] * f0[i + nx] + r.w[2] * f0[i + 2 * static_cast<size_t>(nx)];
  }
}

void NodeDeriv::d2(const double* f, double* out, int nx) const {
  for (int j = 0; j < n_; ++j) {
    const Row& r = rows2_[j];
    double* o = out + static_cast<size_t>(j) * nx;
    const double* f0 = f + static_cast<size_t>(r.base) * nx;
    if (r.len == 3) {
      for (int i = 0; i < nx; ++i)
        o[i] = r.w[0] * f0[i] + r.w[1] * f0[i + nx] + r.w[2] * f0[i + 2 * static_cast<size_t>(nx)];
    } else {
      for (int i = 0; i < nx; ++i)
        o[i] = r.w[0] * f0[i] + r.w[1] * f0[i + nx] + r.w[2] * f0[i + 2 * static_cast<size_t>(nx)] +
               r.w[3] * f0[i + 3 * static_cast<size_t>(nx)];
    }
  }
}

namespace {

std::mutex g_stencil_mutex;
std::map<const void*, std::pair<std::shared_ptr<const void>, std::unique_ptr<NodeDeriv>>> g_stencils;

const NodeDeriv& stencil_for(const std::shared_ptr<const void>& owner, const std::vector<double>& nodes) {
  std::lock_guard<std::mutex> lock(g_stencil_mutex);
  auto it = g_stencils.find(owner.get());
  if (it == g_stencils.end()) {
    it = g_stencils
             .emplace(owner.get(), std::make_pair(owner, std::make_unique<NodeDeriv>(nodes)))
             .first;
  }
  return *it->second.second;
}

}  // namespace

const NodeDeriv& yderiv(const std::shared_ptr<const Grid2D>& g) { return stencil_for(g, g->y); }
const NodeDeriv& zderiv(const std::shared_ptr<const LayerGrid>& g) { return stencil_for(g, g->z); }

void ddx_rows(const double* f, double* out, int nrows, int nx, double Lx) {
  auto fft = get_row_fft(nx);
  const int nk = fft->nk();
  const double k0 = 2.0 * M_PI / Lx;
  thread_local std::vector<std::complex<double>> spec;
  spec.assign(nk, {0.0, 0.0});
  for (int j = 0; j < nrows; ++j) {
    fft->forward(f + static_cast<size_t>(j) * nx, spec.data());
    for (int k = 0; k < nk; ++k) spec[k] *= std::complex<double>(0.0, k0 * k);
    if (nx % 2 == 0) spec[nk - 1] = 0.0;  // Nyquist has no well-defined odd derivative
    fft->inverse(spec.data(), out + static_cast<size_t>(j) * nx);
  }
}

void d2dx2_rows(const double* f, double* out, int nrows, int nx, double Lx) {
  auto fft = get_row_fft(nx);
  const int nk = fft->nk();
  const double k0 = 2.0 * M_PI / Lx;
  thread_local std::vector<std::complex<double>> spec;
  spec.assign(nk, {0.0, 0.0});
  for (int j = 0; j < nrows; ++j) {
    fft->forward(f + static_cast<size_t>(j) * nx, spec.data());
    for (int k = 0; k < nk; ++k) spec[k] *= -(k0 * k) * (k0 * k);
    fft->inverse(spec.data(), out + static_cast<size_t>(j) * nx);
  }
}

ScalarField2D ddx(const ScalarField2D& f) {
  ScalarField2D out(f.grid, f.time);
  ddx_rows(f.v.data(), out.v.data(), f.ny(), f.nx(), f.grid->Lx);
  return out;
}

ScalarField2D d2dx2(const ScalarField2D& f) {
  ScalarField2D out(f.grid, f.time);
  d2dx2_rows(f.v.data(), out.v.data(), f.ny(), f.nx(), f.grid->Lx);
  return out;
}

LayerField2D ddx(const LayerField2D& f) {
  LayerField2D out(f.zgrid, f.Lx, f.Nx, f.time);
  ddx_rows(f.v.data(), out.v.data(), f.nz(), f.Nx, f.Lx);
  return out;
}

LayerField2D d2dx2(const LayerField2D& f) {
  LayerField2D out(f.zgrid, f.Lx, f.Nx, f.time);
  d2dx2_rows(f.v.data(), out.v.data(), f.nz(), f.Nx, f.Lx);
  return out;
}

std::vector<double> ddx_trace(const std::vector<double>& g, double Lx) {
  std::vector<double> out(g.size());
  ddx_rows(g.data(), out.data(), 1, static_cast<int>(g.size()), Lx);
  return out;
}

ScalarField2D ddy(const ScalarField2D& f) {
  ScalarField2D out(f.grid, f.time);
  yderiv(f.grid).d1(f.v.data(), out.v.data(), f.nx());
  return out;
}

ScalarField2D d2dy2(const ScalarField2D& f) {
  ScalarField2D out(f.grid, f.time);
  yderiv(f.grid).d2(f.v.data(), out.v.data(), f.nx());
  return out;
}

LayerField2D ddz(const LayerField2D& f) {
  LayerField2D out(f.zgrid, f.Lx, f.Nx, f.time);
  zderiv(f.zgrid).d1(f.v.data(), out.v.data(), f.Nx);
  return out;
}

LayerField2D d2dz2(const LayerField2D& f) {
  LayerField2D out(f.zgrid, f.Lx, f.Nx, f.time);
  zderiv(f.zgrid).d2(f.v.data(), out.v.data(), f.Nx);
  return out;
}

ScalarField2D divergence(const VectorField2D& u) {
  check_same_layout(u.u1, u.u2);
  ScalarField2D out = ddx(u.u1);
  ScalarField2D dyu2 = ddy(u.u2);
  for (size_t q = 0; q < out.v.size(); ++q) out.v[q] += dyu2.v[q];
  return out;
}

ScalarField2D vorticity(const VectorField2D& u) {
  check_same_layout(u.u1, u.u2);
  ScalarField2D out = ddy(u.u1);
  ScalarField2D dxu2 = ddx(u.u2);
  for (size_t q = 0; q < out.v.size(); ++q) out.v[q] -= dxu2.v[q];
  return out;
}

ScalarField2D laplacian(const ScalarField2D& f) {
  ScalarField2D out = d2dx2(f);
  ScalarField2D dyy = d2dy2(f);
  for (size_t q = 0; q < out.v.size(); ++q) out.v[q] += dyy.v[q];
  return out;
}

ScalarField2D advect(const VectorField2D& u, const ScalarField2D& f) {
  check_same_layout(u.u1, u.u2);
  check_same_layout(u.u1, f);
  ScalarField2D dxf = ddx(f);
  ScalarField2D dyf = ddy(f);
  ScalarField2D out(f.grid, f.time);
  for (size_t q = 0; q < out.v.size(); ++q)
    out.v[q] = u.u1.v[q] * dxf.v[q] + u.u2.v[q] * dyf.v[q];
  return out;
}

}  // namespace cns
