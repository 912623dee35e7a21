// Fully viscous chemotaxis--fluid solver on the truncated half-plane strip,
// for a given momentum/oxygen diffusivity eps^2:
//
//   dt n + div(u n) - Lap n + div(n grad c) = 0
//   dt c + u.grad c - eps^2 Lap c + c n    = 0
//   dt w + u.grad w - eps^2 Lap w + dx n   = 0,   w = dy u1 - dx u2
//   u = (dy Phi, -dx Phi),  Lap Phi = w
//
// with the slip wall conditions at y = 0: dy n = dy c = dy u1 = 0, u2 = 0,
// hence w(x,0) = 0, which is imposed exactly (Dirichlet row).  Unlike the
// inviscid-limit solver, the wall flux of n vanishes term by term here.
//
// Discretization mirrors the inviscid solver so the two can be compared field
// by field: spectral x-derivatives, conservative y-face fluxes, backward-Euler
// treatment of all stiff diffusion (the full Laplacian of n and the eps^2
// Laplacians of c and w, solved per x-mode), exact integrating factor for the
// oxygen reaction, streamfunction velocity recovery.  The top row of w is
// advanced by transport only, so the artificial top boundary does not shed a
// spurious viscous layer.
//
// Optional closed-form source terms can be attached for verification runs
// (method of manufactured solutions); with no sources attached the step is
// bitwise identical to the plain system.

#ifndef CNS_VISCOUS_HPP
#define CNS_VISCOUS_HPP

#include <functional>
#include <memory>
#include <vector>

#include "cns/grid.hpp"
#include "cns/operators.hpp"

namespace cns {

/** Closed-form source evaluators (x, y, t), one per evolved field. */
struct ViscousSources {
  std::function<double(double, double, double)> n;
  std::function<double(double, double, double)> c;
  std::function<double(double, double, double)> omega;
};

struct ViscousState {
  ScalarField2D n;
  ScalarField2D c;
  VectorField2D u;
  ScalarField2D omega;
  std::vector<double> u1_far;  ///< frozen far-field tangential velocity trace
  /** dy n at y = Ymax, frozen at t = 0; enters the top density flux as
   *  -dyn_far.  Evaluating the derivative from the evolving field instead
   *  couples the top node to itself with the wrong sign (one-sided weights),
   *  a neutrally unstable boundary mode. */
  std::vector<double> dyn_far;
  double epsilon = 0.0;
  double time = 0.0;
  double c_max0 = 0.0;  ///< initial oxygen maximum, for the max-principle guard
  std::shared_ptr<const ViscousSources> sources;  ///< null for the plain system
};

/**
 * Validates data, enforces the layer-resolution guard (the wall spacing
 * y[1]-y[0] must not exceed epsilon/4), and recovers the initial velocity
 * from the vorticity.  Throws std::invalid_argument on bad data and
 * std::runtime_error if the grid does not resolve the viscous layer.
 */
ViscousState make_viscous_state(ScalarField2D n, ScalarField2D c, ScalarField2D omega,
                                std::vector<double> u1_far, double epsilon);

/** Attaches verification sources; the solver adds them on every step. */
void enable_manufactured_sources(ViscousState& s, ViscousSources src);

/**
 * One IMEX step of the full system.  Throws on CFL violation (advective and
 * chemotactic speeds), on loss of positivity of n or c beyond -1e-8, and on a
 * violation of the oxygen maximum principle (max c may not exceed its initial
 * value, slack 1e-10; skipped when sources are attached, which break it).
 */
ViscousState step_viscous(const ViscousState& s, double dt);

}  // namespace cns

#endif  // CNS_VISCOUS_HPP
