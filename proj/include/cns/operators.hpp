// Discrete differential operators on strip fields:
//   * x derivatives are spectral (periodic Fourier collocation), exact for
//     resolvable modes; the Nyquist mode of odd derivatives is zeroed
//   * y (and layer z) derivatives are second-order finite differences on the
//     nonuniform mesh, one-sided at the boundaries (Fornberg weights)
//
// The sign convention for vorticity throughout is  omega = d_y u1 - d_x u2.

#ifndef CNS_OPERATORS_HPP
#define CNS_OPERATORS_HPP

#include <array>
#include <memory>
#include <vector>

#include "cns/grid.hpp"

namespace cns {

/** Finite-difference weights on a fixed 1-D node set (built once per mesh).
 * First derivatives use 3-point stencils (centered inside, one-sided at the
 * ends); second derivatives use 3-point stencils inside and 4-point one-sided
 * stencils at the ends so both retain second-order accuracy. */
class NodeDeriv {
 public:
  explicit NodeDeriv(const std::vector<double>& nodes);

  /** Apply to a row-major field (x fastest, `nx` columns, n rows). */
  void d1(const double* f, double* out, int nx) const;
  void d2(const double* f, double* out, int nx) const;
  /** Apply to a single column (contiguous samples). */
  void d1_column(const double* f, double* out) const { d1(f, out, 1); }
  void d2_column(const double* f, double* out) const { d2(f, out, 1); }

  int n() const { return n_; }

 private:
  struct Row {
    int base = 0;
    int len = 0;
    std::array<double, 4> w{};
  };
  int n_;
  std::vector<Row> rows1_, rows2_;
};

/** Shared per-mesh stencil caches (keyed by the grid object). */
const NodeDeriv& yderiv(const std::shared_ptr<const Grid2D>& g);
const NodeDeriv& zderiv(const std::shared_ptr<const LayerGrid>& g);

/** Fornberg finite-difference weights: derivative of order m at x0 from
 * samples at nodes[0..nn-1]; fills w[0..nn-1]. */
void fornberg_weights(double x0, const double* nodes, int nn, int m, double* w);

// ---- spectral x derivatives -------------------------------------------------

/** d/dx of `nrows` periodic rows of length nx laid out contiguously. */
void ddx_rows(const double* f, double* out, int nrows, int nx, double Lx);
void d2dx2_rows(const double* f, double* out, int nrows, int nx, double Lx);

ScalarField2D ddx(const ScalarField2D& f);
ScalarField2D d2dx2(const ScalarField2D& f);
LayerField2D ddx(const LayerField2D& f);
LayerField2D d2dx2(const LayerField2D& f);
/** Spectral derivative of a single periodic trace (length = Nx). */
std::vector<double> ddx_trace(const std::vector<double>& g, double Lx);

// ---- wall-normal derivatives ------------------------------------------------

ScalarField2D ddy(const ScalarField2D& f);
ScalarField2D d2dy2(const ScalarField2D& f);
LayerField2D ddz(const LayerField2D& f);
LayerField2D d2dz2(const LayerField2D& f);

// ---- composite operators ----------------------------------------------------

ScalarField2D divergence(const VectorField2D& u);
/** omega = d_y u1 - d_x u2. */
ScalarField2D vorticity(const VectorField2D& u);
ScalarField2D laplacian(const ScalarField2D& f);
/** Pointwise transport term u . grad f. */
ScalarField2D advect(const VectorField2D& u, const ScalarField2D& f);

}  // namespace cns

#endif  // CNS_OPERATORS_HPP
