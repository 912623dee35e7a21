// Composite matched-asymptotics solution on the physical strip, and the
// remainder forcings it leaves in the governing equations.
//
// With z = y/eps the assembled fields are
//   n^a  = n^o  + eps n^{b,1}(x,z)  + eps^2 n^{b,2}(x,z)
//   c^a  = c^o  + eps c^{b,1}(x,z)  + eps^2 c^{b,2}(x,z)
//   u1^a = u1^o + eps u1^{b,1}(x,z)
//   u2^a = u2^o + eps^2 u2^{b,2}(x,z)
//   p^a  = p^o  + eps^2 p^{b,2}(x,z)
// where the ^o fields are the inviscid-limit (outer) solution, p^o its
// diagnostic pressure, and the ^{b,*} profiles the boundary-layer correctors.
// Layer profiles are transferred to physical height by monotone cubic
// interpolation in z, exact at nodes and extended by zero beyond the layer
// mesh.  The second-order tangential profile u1^{b,2} is deliberately NOT part
// of u1^a: the velocity ansatz stops one order lower, and u1^{b,2} enters only
// the oxygen remainder K.  At the wall the assembly inherits
//   dy n^a = dy c^a = dy u1^a = 0   and   u2^a = eps^2 f(t,x)
// to stencil accuracy (f is the slip trace of the layer hierarchy).
//
// Plugging the assembled fields into the viscous system leaves explicit
// remainder forcings:
//   dt n^a + u^a.grad n^a - div(grad n^a - n^a grad c^a)        = -N
//   dt c^a + u^a.grad c^a + c^a n^a - eps^2 Lap c^a             = -K
//   dt u^a + u^a.grad u^a + grad p^a - eps^2 Lap u^a - n^a e2   = -(U1,U2)
// compute_remainders evaluates N, K, U1, U2 term by term from their closed
// formulas: every term is a product of Taylor-difference coefficients of the
// outer solution (e.g. u1^o - u1^o(y=0), or y dy n^o|_wall + n^o|_wall - n^o),
// wall-trace extension fields evaluated at z = y/eps, and layer profiles with
// their x/z/t derivatives.  Time derivatives of layer profiles come from
// uniformly spaced snapshot histories (second order with >= 3 snapshots).

#ifndef CNS_COMPOSER_HPP
#define CNS_COMPOSER_HPP

#include <memory>

#include "cns/conormal.hpp"
#include "cns/grid.hpp"
#include "cns/layer.hpp"
#include "cns/outer.hpp"

namespace cns {

struct ApproxSolution {
  ScalarField2D na, ca, u1a, u2a, pa;
  double epsilon = 0.0;
  double time = 0.0;
};

struct RemainderFields {
  ScalarField2D N, K, U1, U2;
  double epsilon = 0.0;
  double time = 0.0;
};

/** Aligned snapshot rings of the three time-differentiated layer profiles. */
struct LayerHistories {
  explicit LayerHistories(int depth)
      : nb1(depth), nb2(depth), u2b2(depth) {}

  /** Snapshots all three profiles of `st` (timestamped with st.time). */
  void push(const LayerState& st);

  LayerHistory nb1, nb2, u2b2;
};

/**
 * Assembles the composite solution on `target` (shared x layout and Ymax
 * required; outer fields are re-meshed in y by monotone cubic interpolation
 * when the y nodes differ).  Throws std::invalid_argument on mismatched
 * times, mismatched layouts, or when eps*Zmax > Ymax (the scaled layer strip
 * would overflow the physical domain, so the composite ansatz is meaningless).
 */
ApproxSolution assemble(const OuterState& outer, const LayerState& layers, double eps,
                        const std::shared_ptr<const Grid2D>& target);

/**
 * Evaluates the remainder fields at history snapshot `at` (-1 = latest).
 * `outer` and `layers` must be the states at that snapshot's time.  Throws on
 * the same layout/time errors as assemble, and when the histories are too
 * shallow (< 2 snapshots) or not aligned with `layers`.
 */
RemainderFields compute_remainders(const OuterState& outer, const LayerState& layers,
                                   double eps, const std::shared_ptr<const Grid2D>& target,
                                   const LayerHistories& hist, int at = -1);

}  // namespace cns

#endif  // CNS_COMPOSER_HPP
