// Grids and field containers for the half-plane strip (x periodic, y >= 0)
// and for the boundary-layer strip in stretched coordinates (x periodic, z >= 0).
//
// Conventions used throughout the code base:
//   * fields are stored row-major with x fastest: v[j*Nx + i], i = x index
//   * the wall is at y = 0 (z = 0); y_nodes[0] == 0, y_nodes[Ny-1] == Ymax
//   * x nodes are x_i = i * Lx / Nx (periodic, the node at Lx is not stored)

#ifndef CNS_GRID_HPP
#define CNS_GRID_HPP

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace cns {

/** Periodic-in-x strip grid with a (possibly) graded y mesh.
 *
 * Invariants enforced at construction:
 *   Nx >= 8 and even, Ny >= 4, y strictly increasing from 0 to Ymax,
 *   adjacent spacing ratio h_{j+1}/h_j within [1, 1.2] (wall-refined meshes
 *   grow away from the wall; uniform meshes have ratio 1).
 */
struct Grid2D {
  double Lx = 0.0;
  int Nx = 0;
  double Ymax = 0.0;
  int Ny = 0;
  std::vector<double> y;  ///< y_nodes, size Ny
  double dx = 0.0;

  Grid2D(double Lx_, int Nx_, double Ymax_, std::vector<double> y_nodes);

  /** Trapezoidal weight of node j (half-cell widths at the ends). */
  double yweight(int j) const {
    if (j == 0) return 0.5 * (y[1] - y[0]);
    if (j == Ny - 1) return 0.5 * (y[Ny - 1] - y[Ny - 2]);
    return 0.5 * (y[j + 1] - y[j - 1]);
  }
  double x(int i) const { return dx * i; }
  /** Smallest y spacing (always the wall cell for admissible meshes). */
  double min_dy() const { return y[1] - y[0]; }
  double max_dy() const { return y[Ny - 1] - y[Ny - 2]; }

  bool same_layout(const Grid2D& o) const {
    return Nx == o.Nx && Ny == o.Ny && Lx == o.Lx && Ymax == o.Ymax && y == o.y;
  }
};

/** Uniform y mesh. */
std::shared_ptr<const Grid2D> make_uniform_grid(double Lx, int Nx, double Ymax, int Ny);

/** Wall-refined mesh: geometric growth from first cell h0 at `ratio`, cells
 * capped at hcap, then uniform; the whole mesh is scaled to end exactly at
 * Ymax (scaling preserves spacing ratios). Ny is derived from the inputs. */
std::shared_ptr<const Grid2D> make_graded_grid(double Lx, int Nx, double Ymax, double h0,
                                               double ratio = 1.15, double hcap = 0.0);

/** Wall-refined mesh with a prescribed node count: pure geometric spacing
 * from first cell h0; the growth ratio in (1, 1.2] is solved by bisection so
 * that Ny-1 cells span exactly [0, Ymax]. Throws if no admissible ratio. */
std::shared_ptr<const Grid2D> make_graded_grid_ny(double Lx, int Nx, double Ymax, int Ny,
                                                  double h0);

/** One-dimensional mesh for the stretched boundary-layer coordinate z.
 * Invariants: Zmax >= 10, Nz >= 16, z strictly increasing from 0 to Zmax. */
struct LayerGrid {
  double Zmax = 0.0;
  int Nz = 0;
  std::vector<double> z;

  LayerGrid(double Zmax_, std::vector<double> z_nodes);

  double zweight(int k) const {
    if (k == 0) return 0.5 * (z[1] - z[0]);
    if (k == Nz - 1) return 0.5 * (z[Nz - 1] - z[Nz - 2]);
    return 0.5 * (z[k + 1] - z[k - 1]);
  }
};

std::shared_ptr<const LayerGrid> make_uniform_layer_grid(double Zmax, int Nz);

/** Scalar field sampled on a Grid2D; carries the solution time. */
struct ScalarField2D {
  std::shared_ptr<const Grid2D> grid;
  std::vector<double> v;
  double time = 0.0;

  ScalarField2D() = default;
  explicit ScalarField2D(std::shared_ptr<const Grid2D> g, double t = 0.0)
      : grid(std::move(g)), v(static_cast<size_t>(grid->Nx) * grid->Ny, 0.0), time(t) {}

  double& at(int i, int j) { return v[static_cast<size_t>(j) * grid->Nx + i]; }
  double at(int i, int j) const { return v[static_cast<size_t>(j) * grid->Nx + i]; }
  int nx() const { return grid->Nx; }
  int ny() const { return grid->Ny; }
};

struct VectorField2D {
  ScalarField2D u1, u2;

  VectorField2D() = default;
  explicit VectorField2D(std::shared_ptr<const Grid2D> g, double t = 0.0)
      : u1(g, t), u2(g, t) {}
};

/** Scalar field on the boundary-layer strip: (x_i, z_k), x fastest. */
struct LayerField2D {
  std::shared_ptr<const LayerGrid> zgrid;
  double Lx = 0.0;
  int Nx = 0;
  std::vector<double> v;
  double time = 0.0;

  LayerField2D() = default;
  LayerField2D(std::shared_ptr<const LayerGrid> zg, double Lx_, int Nx_, double t = 0.0)
      : zgrid(std::move(zg)), Lx(Lx_), Nx(Nx_),
        v(static_cast<size_t>(Nx_) * zgrid->Nz, 0.0), time(t) {}

  double& at(int i, int k) { return v[static_cast<size_t>(k) * Nx + i]; }
  double at(int i, int k) const { return v[static_cast<size_t>(k) * Nx + i]; }
  int nz() const { return zgrid->Nz; }
  double dx() const { return Lx / Nx; }
};

// Small arithmetic helpers shared by the solvers (element-wise, same layout).
void check_same_layout(const ScalarField2D& a, const ScalarField2D& b);
double max_abs(const std::vector<double>& v);
double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace cns

#endif  // CNS_GRID_HPP
