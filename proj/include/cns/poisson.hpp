// Strip Poisson solves: x-spectral, per-mode tridiagonal in y.
//
// solve_streamfunction recovers an incompressible velocity from vorticity
// (omega = d_y u1 - d_x u2): it solves  Lap(Phi) = omega  with Phi = 0 on the
// wall and d_y Phi = u1_far at the top, and returns u = (d_y Phi, -d_x Phi).
// Because the spectral d_x commutes exactly with the per-column d_y stencils,
// divergence(u) vanishes to rounding, and u2(x, 0) = 0 holds exactly.

#ifndef CNS_POISSON_HPP
#define CNS_POISSON_HPP

#include <vector>

#include "cns/grid.hpp"

namespace cns {

struct StreamfunctionResult {
  ScalarField2D phi;
  VectorField2D u;
};

/** `u1_far` is the tangential velocity at y = Ymax, one value per x node.
 * Throws when a per-mode tridiagonal solve hits a zero pivot (inconsistent
 * zero-mode data on a degenerate mesh). */
StreamfunctionResult solve_streamfunction(const ScalarField2D& omega,
                                          const std::vector<double>& u1_far);

/** Diagnostic pressure solve:  Lap(p) = rhs  with Neumann data d_y p at the
 * wall and the top. The zero mode is pinned by p(0-mode, wall) = 0 and the
 * result is shifted to zero strip mean. */
ScalarField2D solve_pressure(const ScalarField2D& rhs, const std::vector<double>& dyp_bottom,
                             const std::vector<double>& dyp_top);

}  // namespace cns

#endif  // CNS_POISSON_HPP
