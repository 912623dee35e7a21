// Inviscid limit system on the half-plane strip:
//   dt n + u.grad n - Lap n = -div(n grad c)
//   dt c + u.grad c         = -c n
//   dt u + u.grad u + grad p = n e2,  div u = 0
// with wall conditions  d_y n - n d_y c = 0  (combined zero flux) and u2 = 0.
// The velocity is evolved in vorticity form (omega = d_y u1 - d_x u2):
//   dt omega + u.grad omega = -d_x n
// and recovered through the wall streamfunction solve, so u2(x,0) = 0 holds
// exactly and the divergence vanishes to rounding. Pressure is a diagnostic.

#ifndef CNS_OUTER_HPP
#define CNS_OUTER_HPP

#include <memory>
#include <vector>

#include "cns/grid.hpp"

namespace cns {

struct OuterState {
  ScalarField2D n, c;
  VectorField2D u;
  ScalarField2D omega;
  /** Tangential velocity at y = Ymax, frozen at t = 0 (truncation far field). */
  std::vector<double> u1_far;
  /** dy n at y = Ymax, frozen at t = 0; enters the top density flux as
   *  -dyn_far.  Evaluating the derivative from the evolving field instead
   *  couples the top node to itself with the wrong sign (one-sided weights),
   *  a neutrally unstable boundary mode. */
  std::vector<double> dyn_far;
  double time = 0.0;
};

/** Builds a consistent state: u is recovered from omega and u1_far. */
OuterState make_outer_state(ScalarField2D n, ScalarField2D c, ScalarField2D omega,
                            std::vector<double> u1_far);

/** One first-order IMEX step (implicit wall-normal diffusion of n; everything
 * else explicit; reaction by exact integrating factor). Throws on CFL
 * violation and on negative density/oxygen excursions beyond 1e-8. */
OuterState step_outer(const OuterState& s, double dt);

/** Diagnostic pressure reconstruction (Neumann problem, zero strip mean). */
ScalarField2D outer_pressure(const OuterState& s);

/** Wall data of the outer solution: traces and normal-derivative traces.
 * dyn = nbar*dyc and dyu2 = -d_x u1bar hold by construction; dyyu2 comes from
 * the divergence identity d_y^2 u2 = -d_x d_y u1. */
struct BoundaryTraces {
  double time = 0.0;
  double Lx = 0.0;
  std::vector<double> nbar, cbar, u1bar, dyn, dyc, dyu1, dyu2, dyyu2;
};

BoundaryTraces extract_traces(const OuterState& s);

/** Taylor data of the outer fields at the wall, as layer-strip fields in the
 * stretched coordinate z. Order-1 outer profiles vanish identically, so all
 * extensions are built from zeroth-order traces; order-2 outer fields are 0. */
struct TraceExtensionSet {
  BoundaryTraces tr;

  LayerField2D nE0(const std::shared_ptr<const LayerGrid>& zg) const;   ///< nbar
  LayerField2D cE0(const std::shared_ptr<const LayerGrid>& zg) const;   ///< cbar
  LayerField2D u1E0(const std::shared_ptr<const LayerGrid>& zg) const;  ///< u1bar
  LayerField2D nE1(const std::shared_ptr<const LayerGrid>& zg) const;   ///< z*dyn
  LayerField2D cE1(const std::shared_ptr<const LayerGrid>& zg) const;   ///< z*dyc
  LayerField2D u1E1(const std::shared_ptr<const LayerGrid>& zg) const;  ///< z*dyu1
  LayerField2D u2E1(const std::shared_ptr<const LayerGrid>& zg) const;  ///< z*dyu2
  LayerField2D u2E2(const std::shared_ptr<const LayerGrid>& zg) const;  ///< z^2/2*dyyu2
};

TraceExtensionSet build_extensions(const BoundaryTraces& tr);

/** Residuals of the wall compatibility relations of the initial data.
 * Order 0: combined flux, wall penetration, divergence. Order 1: the
 * time-differentiated flux relation with d/dt slots filled from the spatial
 * right-hand sides. Orders above 1 are clamped to 1 and flagged. */
struct CompatibilityReport {
  double flux0 = 0.0;    ///< max_x |d_y n - n d_y c| at y=0
  double u2wall = 0.0;   ///< max_x |u2(x,0)|
  double divu = 0.0;     ///< max |div u| over the strip
  double flux1 = 0.0;    ///< max_x |d/dt (d_y n - n d_y c)| at y=0 (order >= 1)
  int order_checked = 0;
  bool clamped = false;
};

CompatibilityReport check_compatibility(const OuterState& s, int order);

}  // namespace cns

#endif  // CNS_OUTER_HPP
