#include "cns/grid.hpp"

#include <algorithm>
#include <cmath>

namespace cns {

namespace {

void validate_spacing_ratios(const std::vector<double>& nodes, const char* what) {
  // Meshes must not coarsen toward the wall and must not grow faster than 1.2x.
  const double tol = 1e-9;
  for (size_t j = 0; j + 2 < nodes.size(); ++j) {
    double h0 = nodes[j + 1] - nodes[j];
    double h1 = nodes[j + 2] - nodes[j + 1];
    if (h0 <= 0.0 || h1 <= 0.0)
      throw std::invalid_argument(std::string(what) + ": nodes must be strictly increasing");
    double r = h1 / h0;
    if (r < 1.0 - tol || r > 1.2 + tol)
      throw std::invalid_argument(std::string(what) + ": spacing ratio " + std::to_string(r) +
                                  " outside [1, 1.2]");
  }
}

}  // namespace

Grid2D::Grid2D(double Lx_, int Nx_, double Ymax_, std::vector<double> y_nodes)
    : Lx(Lx_), Nx(Nx_), Ymax(Ymax_), Ny(static_cast<int>(y_nodes.size())), y(std::move(y_nodes)) {
  if (Lx <= 0.0) throw std::invalid_argument("Grid2D: Lx must be positive");
  if (Nx < 8 || Nx % 2 != 0) throw std::invalid_argument("Grid2D: Nx must be even and >= 8");
  if (Ny < 4) throw std::invalid_argument("Grid2D: Ny must be >= 4");
  if (y.front() != 0.0) throw std::invalid_argument("Grid2D: y_nodes[0] must be 0");
  if (std::abs(y.back() - Ymax) > 1e-12 * std::max(1.0, Ymax))
    throw std::invalid_argument("Grid2D: y_nodes must end at Ymax");
  y.back() = Ymax;
  validate_spacing_ratios(y, "Grid2D");
  dx = Lx / Nx;
}

LayerGrid::LayerGrid(double Zmax_, std::vector<double> z_nodes)
    : Zmax(Zmax_), Nz(static_cast<int>(z_nodes.size())), z(std::move(z_nodes)) {
  if (Zmax < 10.0) throw std::invalid_argument("LayerGrid: Zmax must be >= 10");
  if (Nz < 16) throw std::invalid_argument("LayerGrid: Nz must be >= 16");
  if (z.front() != 0.0) throw std::invalid_argument("LayerGrid: z_nodes[0] must be 0");
  if (std::abs(z.back() - Zmax) > 1e-12 * Zmax)
    throw std::invalid_argument("LayerGrid: z_nodes must end at Zmax");
  z.back() = Zmax;
  validate_spacing_ratios(z, "LayerGrid");
}

std::shared_ptr<const Grid2D> make_uniform_grid(double Lx, int Nx, double Ymax, int Ny) {
  std::vector<double> y(Ny);
  for (int j = 0; j < Ny; ++j) y[j] = Ymax * j / (Ny - 1);
  y[0] = 0.0;
  y[Ny - 1] = Ymax;
  return std::make_shared<const Grid2D>(Lx, Nx, Ymax, std::move(y));
}

std::shared_ptr<const Grid2D> make_graded_grid(double Lx, int Nx, double Ymax, double h0,
                                               double ratio, double hcap) {
  if (h0 <= 0.0 || h0 >= Ymax) throw std::invalid_argument("make_graded_grid: bad h0");
  if (ratio < 1.0 || ratio > 1.2) throw std::invalid_argument("make_graded_grid: ratio outside [1, 1.2]");
  if (hcap <= 0.0) hcap = Ymax / 50.0;
  std::vector<double> cells;
  double h = h0, total = 0.0;
  while (total < Ymax) {
    cells.push_back(h);
    total += h;
    h = std::min(h * ratio, hcap);
  }
  // Scale all cells so the mesh ends exactly at Ymax; ratios are preserved.
  double s = Ymax / total;
  std::vector<double> y(cells.size() + 1);
  y[0] = 0.0;
  for (size_t k = 0; k < cells.size(); ++k) y[k + 1] = y[k] + s * cells[k];
  y.back() = Ymax;
  return std::make_shared<const Grid2D>(Lx, Nx, Ymax, std::move(y));
}

std::shared_ptr<const Grid2D> make_graded_grid_ny(double Lx, int Nx, double Ymax, int Ny,
                                                  double h0) {
  if (Ny < 4) throw std::invalid_argument("make_graded_grid_ny: Ny must be >= 4");
  const int m = Ny - 1;  // cell count
  if (h0 * m >= Ymax) {
    if (std::abs(h0 * m - Ymax) < 1e-12 * Ymax) return make_uniform_grid(Lx, Nx, Ymax, Ny);
    throw std::invalid_argument("make_graded_grid_ny: h0 too large for Ny cells (use uniform)");
  }
  auto span = [&](double r) {
    // sum of h0 * r^k, k = 0..m-1
    double s = 0.0, h = h0;
    for (int k = 0; k < m; ++k) {
      s += h;
      h *= r;
    }
    return s;
  };
  double lo = 1.0, hi = 1.2;
  if (span(hi) < Ymax)
    throw std::invalid_argument("make_graded_grid_ny: Ymax unreachable at ratio <= 1.2; increase Ny or h0");
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (span(mid) < Ymax ? lo : hi) = mid;
  }
  double r = 0.5 * (lo + hi);
  std::vector<double> y(Ny);
  y[0] = 0.0;
  double h = h0;
  for (int j = 1; j < Ny; ++j) {
    y[j] = y[j - 1] + h;
    h *= r;
  }
  // land exactly on Ymax (bisection residual is ~1e-13 relative)
  double s = Ymax / y.back();
  for (int j = 1; j < Ny; ++j) y[j] *= s;
  y[Ny - 1] = Ymax;
  return std::make_shared<const Grid2D>(Lx, Nx, Ymax, std::move(y));
}

std::shared_ptr<const LayerGrid> make_uniform_layer_grid(double Zmax, int Nz) {
  std::vector<double> z(Nz);
  for (int k = 0; k < Nz; ++k) z[k] = Zmax * k / (Nz - 1);
  z[0] = 0.0;
  z[Nz - 1] = Zmax;
  return std::make_shared<const LayerGrid>(Zmax, std::move(z));
}

void check_same_layout(const ScalarField2D& a, const ScalarField2D& b) {
  if (!a.grid || !b.grid || !a.grid->same_layout(*b.grid))
    throw std::invalid_argument("fields live on different grids");
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("max_abs_diff: size mismatch");
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace cns
