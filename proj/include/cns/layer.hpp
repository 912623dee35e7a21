// Boundary-layer corrector hierarchy on the stretched (x, z) strip.
//
// All correctors start from zero data and are driven by the wall traces of the
// outer solution through Neumann data and forcing terms. The hierarchy is, in
// dependency order per global step:
//
//   u1b1 : dt v + u1E0 dx v + u2E1 dz v + v dx u1E0 - dzz v = 0,
//          dz v(0) = -dyu1, v -> 0 at Zmax
//   u2b2(z) = int_z^inf dx u1b1 dzeta;  f = u2b2(.,0);  F = int_0^inf u1b1 dz
//   cb1  : dt c + u1b1 dx cE0 + u1E0 dx c + u2E1 dz c - dzz c
//          = -nE0 (1 + cE0) c,    dz c(0) = -dyc;   nb1 := nE0 cb1
//   pb2(z) = -int_z^inf nb1 dzeta
//   u1b2 : dt w + u1E0 dx w + u2E1 dz w + w dx u1E0 - dzz w
//          = -[ u1E1 dx u1b1 + u2E2 dz u1b1 + u1b1 dx u1E1 + u2b2 dyu1
//               + u1b1 dx u1b1 + u2b2 dz u1b1 + dx pb2 ],   dz w(0) = 0
//   cb2  : dt c + u1E0 dx c + u2E1 dz c + nE0 c - dzz c
//          = -[ u1b2 dx cE0 + u1E1 dx cb1 + u2E2 dz cb1 + u1b1 dx cE1
//               + u2b2 dyc + u1b1 dx cb1 + u2b2 dz cb1
//               + cE1 nb1 + cb1 nE1 + cb1 nb1 + cE0 nb2 ],  dz c(0) = 0
//   nb2(z) = -int_z^inf [ nE1 dz cb1 + nb1 dyc + nb1 dz cb1 + nE0 dz cb2 ]
//
// The linearly growing transport coefficients u2E1 = z*dyu2 and u2E2 =
// z^2/2*dyyu2 are multiplied by a smooth cutoff (1 on [0, Zmax/2], 0 at Zmax)
// to keep the truncated problem well-posed; the profiles are exponentially
// small where the cutoff acts.

#ifndef CNS_LAYER_HPP
#define CNS_LAYER_HPP

#include <memory>
#include <vector>

#include "cns/grid.hpp"
#include "cns/outer.hpp"

namespace cns {

struct LayerState {
  LayerField2D u1b1, cb1, nb1, u2b2, pb2, u1b2, cb2, nb2;
  std::vector<double> f, F;  ///< slip trace and its streamfunction potential
  double time = 0.0;
};

LayerState make_layer_state(const std::shared_ptr<const LayerGrid>& zg, double Lx, int Nx);

/** Wall-trace extension fields frozen on the (x,z) grid for one step, with the
 * cutoff applied to the growing transport coefficients and the Neumann data
 * attached. Refresh from the outer solution every coupled step; freezing them
 * over many steps is the intended mode for oracle tests. */
struct LayerCoefficients {
  double time = 0.0;
  LayerField2D u1E0, nE0, cE0;         ///< zeroth-order trace extensions
  LayerField2D u2E1, u2E2;             ///< growing extensions, cutoff applied
  LayerField2D nE1, cE1, u1E1;         ///< first-order Taylor extensions (no cutoff)
  LayerField2D dx_u1E0, dx_cE0;        ///< spectral x-derivatives
  LayerField2D dx_u1E1, dx_cE1;
  LayerField2D dyu1_f, dyc_f;          ///< z-replicated traces (= dz u1E1, dz cE1)
  LayerField2D react_cb1;              ///< nE0 (1 + cE0)
  std::vector<double> neumann_u1b1;    ///< -dyu1
  std::vector<double> neumann_cb1;     ///< -dyc
};

LayerCoefficients make_layer_coefficients(const TraceExtensionSet& ext,
                                          const std::shared_ptr<const LayerGrid>& zg);

/** Smooth transport-coefficient cutoff: 1 on [0, Zmax/2], C^1 to 0 at Zmax. */
double layer_cutoff(double z, double Zmax);

/** Core IMEX step of  dt v + a1 dx v + a2 dz v + r v - dzz v + forcing = 0
 * with dz v(x,0) = neumann(x) and v(x,Zmax) = 0. The dzz term and the
 * reaction r v are implicit; transport and forcing are explicit. Null
 * pointers mean the term is absent. Throws on CFL violation. */
void layer_heat_step(LayerField2D& v, const LayerField2D* a1, const LayerField2D* a2,
                     const LayerField2D* r, const LayerField2D* forcing,
                     const std::vector<double>* neumann, double dt);

void step_u1b1(LayerState& st, const LayerCoefficients& co, double dt);
/** Rebuilds u2b2, f, F from the current u1b1 (tail quadrature). Returns the
 * quadrature decay flag (false if some column tail fit was rejected). */
bool compute_u2b2_and_f(LayerState& st);
void step_cb1_nb1(LayerState& st, const LayerCoefficients& co, double dt);
bool compute_pb2(LayerState& st);
void step_u1b2(LayerState& st, const LayerCoefficients& co, double dt);
/** One IMEX step for cb2 plus one fixed-point sweep of the (cb2, nb2)
 * coupling; returns the relative L-inf change of cb2 across the sweep. */
double step_cb2_nb2(LayerState& st, const LayerCoefficients& co, double dt);

struct LayerStepReport {
  bool quad_decay_ok = true;   ///< all tail quadrature fits accepted
  double sweep_change = 0.0;   ///< relative cb2 change of the fixed-point sweep
  double tail_ratio = 0.0;     ///< max over profiles of |profile| near Zmax / peak
  double max_decay_len = 0.0;  ///< largest fitted profile decay length
};

/** Full hierarchy advance in dependency order; state.time += dt. The sweep is
 * flagged (report) if it changed cb2 by more than 10% in L-inf. */
LayerStepReport step_layers(LayerState& st, const LayerCoefficients& co, double dt);

// ---- discrete-identity residuals (used by monitors and acceptance checks) ----

/** max over faces of |(u2b2(k+1)-u2b2(k))/h + face-average of dx u1b1|. */
double layer_divergence_residual(const LayerState& st);
/** max_x |f - dx F|. */
double slip_identity_residual(const LayerState& st);
/** max over faces of |(pb2(k+1)-pb2(k))/h - face-average of nb1|. */
double pressure_gradient_residual(const LayerState& st);
/** max over faces of |(nb2(k+1)-nb2(k))/h - face-average of the closure RHS|. */
double density_closure_residual(const LayerState& st, const LayerCoefficients& co);
/** max |nb1 - nE0 cb1|. */
double density_identity_residual(const LayerState& st, const LayerCoefficients& co);

/** Zeroth-order corrector closure n = nE0 (e^{c} - 1); identically zero for
 * c = 0, which is why zeroth-order correctors are never stored. */
double zero_order_density_closure(double nE0, double cb0);

}  // namespace cns

#endif  // CNS_LAYER_HPP
