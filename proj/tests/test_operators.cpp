#include <cmath>
#include <functional>

#include "cns/grid.hpp"
#include "cns/operators.hpp"
#include "doctest.h"

using namespace cns;

namespace {

ScalarField2D sample(const std::shared_ptr<const Grid2D>& g,
                     const std::function<double(double, double)>& f) {
  ScalarField2D out(g);
  for (int j = 0; j < g->Ny; ++j)
    for (int i = 0; i < g->Nx; ++i) out.at(i, j) = f(g->x(i), g->y[j]);
  return out;
}

double max_err(const ScalarField2D& a, const std::function<double(double, double)>& f) {
  double m = 0.0;
  const Grid2D& g = *a.grid;
  for (int j = 0; j < g.Ny; ++j)
    for (int i = 0; i < g.Nx; ++i) m = std::max(m, std::abs(a.at(i, j) - f(g.x(i), g.y[j])));
  return m;
}

}  // namespace

TEST_CASE("spectral x derivatives are exact for resolved modes") {
  const double Lx = 2.0 * M_PI;
  auto g = make_uniform_grid(Lx, 64, 4.0, 9);
  const double k = 2.0 * M_PI * 5 / Lx;
  auto f = sample(g, [&](double x, double y) { return std::sin(k * x) * (1.0 + y); });
  CHECK(max_err(ddx(f), [&](double x, double y) { return k * std::cos(k * x) * (1.0 + y); }) <
        1e-12);
  CHECK(max_err(d2dx2(f), [&](double x, double y) {
          return -k * k * std::sin(k * x) * (1.0 + y);
        }) < 1e-10);
}

TEST_CASE("ddx_trace differentiates a periodic trace") {
  const double Lx = 4.0;
  const int nx = 32;
  std::vector<double> tr(nx);
  const double k = 2.0 * M_PI * 2 / Lx;
  for (int i = 0; i < nx; ++i) tr[i] = std::cos(k * (Lx * i / nx));
  auto d = ddx_trace(tr, Lx);
  for (int i = 0; i < nx; ++i)
    CHECK(d[i] == doctest::Approx(-k * std::sin(k * (Lx * i / nx))).epsilon(1e-11).scale(1.0));
}

TEST_CASE("y derivatives are second order on a graded mesh") {
  const double Lx = 2.0 * M_PI;
  auto run = [&](int ny) {
    auto g = make_graded_grid_ny(Lx, 8, 8.0, ny, 8.0 * 0.3 / ny);
    auto f = sample(g, [](double, double y) { return std::exp(-y); });
    const double e1 = max_err(ddy(f), [](double, double y) { return -std::exp(-y); });
    const double e2 = max_err(d2dy2(f), [](double, double y) { return std::exp(-y); });
    return std::pair<double, double>(e1, e2);
  };
  auto [e1c, e2c] = run(129);
  auto [e1f, e2f] = run(257);
  CHECK(e1f < 1e-3);
  CHECK(e2f < 5e-3);
  // halving h divides the error by ~4 (second order, mesh family is self-similar)
  CHECK(e1c / e1f > 3.0);
  CHECK(e1c / e1f < 5.2);
  CHECK(e2c / e2f > 3.0);
  CHECK(e2c / e2f < 5.2);
}

TEST_CASE("layer z derivatives are second order") {
  auto zg = make_uniform_layer_grid(20.0, 512);
  LayerField2D f(zg, 2.0 * M_PI, 8);
  for (int k = 0; k < f.nz(); ++k)
    for (int i = 0; i < f.Nx; ++i) f.at(i, k) = std::exp(-zg->z[k]);
  auto d = ddz(f);
  double m = 0.0;
  for (int k = 0; k < f.nz(); ++k)
    for (int i = 0; i < f.Nx; ++i)
      m = std::max(m, std::abs(d.at(i, k) + std::exp(-zg->z[k])));
  CHECK(m < 2e-3);
}

TEST_CASE("discrete x and y derivatives commute to rounding") {
  auto g = make_graded_grid_ny(2.0 * M_PI, 32, 4.0, 65, 0.02);
  auto phi = sample(g, [](double x, double y) {
    return std::sin(x) * y * y * std::exp(-y) + 0.3 * std::cos(2.0 * x) * y;
  });
  auto a = ddx(ddy(phi));
  auto b = ddy(ddx(phi));
  CHECK(max_abs_diff(a.v, b.v) < 1e-13);
}

TEST_CASE("vorticity of u plus divergence of rotated u vanishes identically") {
  auto g = make_uniform_grid(2.0 * M_PI, 32, 4.0, 33);
  VectorField2D u(g);
  u.u1 = sample(g, [](double x, double y) { return std::sin(x) * std::exp(-y); });
  u.u2 = sample(g, [](double x, double y) { return std::cos(2.0 * x) * y * std::exp(-y); });
  // u_perp = (u2, -u1): vorticity(u) = -divergence(u_perp) at the operator level
  VectorField2D uperp(g);
  uperp.u1 = u.u2;
  uperp.u2 = u.u1;
  for (double& v : uperp.u2.v) v = -v;
  auto w = vorticity(u);
  auto d = divergence(uperp);
  ScalarField2D sum(g);
  for (size_t q = 0; q < sum.v.size(); ++q) sum.v[q] = w.v[q] + d.v[q];
  CHECK(max_abs(sum.v) < 1e-14);
}

TEST_CASE("laplacian matches analytic value on a smooth field") {
  auto g = make_uniform_grid(2.0 * M_PI, 64, 6.0, 241);
  auto f = sample(g, [](double x, double y) { return std::cos(x) * std::exp(-y * y / 2.0); });
  const double err = max_err(laplacian(f), [](double x, double y) {
    return std::cos(x) * std::exp(-y * y / 2.0) * (-1.0 + y * y - 1.0);
  });
  CHECK(err < 5e-3);
}
