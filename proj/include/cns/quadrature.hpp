// Quadrature on the layer strip and the half-plane.
//
// Half-line integrals over [z, infinity) are computed with an end-corrected
// trapezoidal rule (per-interval correction h^2 (f'_k - f'_{k+1}) / 12, exact
// for cubics) plus a single-exponential tail beyond Zmax whose decay length is
// fitted to the last decade of samples. The correction matters: the plain
// trapezoidal rule on the default layer mesh carries an O(h^2) ~ 1e-4 error,
// two orders above what the profile closures need.

#ifndef CNS_QUADRATURE_HPP
#define CNS_QUADRATURE_HPP

#include <vector>

#include "cns/grid.hpp"

namespace cns {

struct TailIntegral {
  double value = 0.0;      ///< integral over [z_0, infinity)
  double tail = 0.0;       ///< contribution beyond Zmax
  bool tail_ok = true;     ///< false when a tail was needed but no decaying fit exists
  double decay_len = 0.0;  ///< fitted decay length (0 when the tail is negligible)
};

/** Fit the exponential decay length of |f| over the last decade of samples.
 * Sets *ok = false (and returns 0) for non-decaying or sign-changing tails. */
double fit_decay_length(const LayerGrid& g, const double* f, bool* ok);

/** Integral of one profile column over [0, infinity). */
TailIntegral integrate_z_tail(const LayerGrid& g, const double* f);

/** Per-node tail integrals of one column: out[k] = integral over [z_k, inf). */
std::vector<double> tail_integrals(const LayerGrid& g, const double* f, bool* tail_ok = nullptr);

/** tail_integrals applied to every x column of a layer field. */
LayerField2D tail_integral_field(const LayerField2D& f, bool* tail_ok = nullptr);

/** The face values that the tail-integral quadrature differentiates back to:
 * out(i,k) with k in [0, Nz-2] satisfies
 *   I(i,k) - I(i,k+1) == h_k * out(i,k)   exactly (to rounding),
 * i.e. out is the quadrature-consistent midpoint value of f. Row Nz-1 is 0. */
LayerField2D quad_face_field(const LayerField2D& f);

/** Trapezoidal integral of a field over the whole strip (dx * y-weights). */
double strip_integral(const ScalarField2D& f);

}  // namespace cns

#endif  // CNS_QUADRATURE_HPP
