// Anisotropic (conormal) Sobolev diagnostics on the half-plane strip.
//
// The wall-degenerate weight
//   psi(y) = delta*y           on [0, 1/2]
//   psi(y) = delta*y/(1+y)     on [1, inf)
//   C^1 cubic Hermite joining the two branches on (1/2, 1)
// tames y-derivatives near the wall. Conormal derivatives apply the weight
// OUTSIDE the derivative:
//   D^alpha u          = d_t^{a1} d_x^{a2} psi(y)^{a3} d_y^{a3} u     (strip)
//   inner D^alpha u    = d_t^{a1} d_x^{a2} (delta*z)^{a3} d_z^{a3} u  (layer)
//
// Norms (all reported as square roots of the summed squares):
//   Y  : sum over {a1 <= l, |alpha| <= m} of squared L2 norms
//   Yinf: same index set, squared sup norms
//   Yt : time-only, {a1 <= l, a2 = a3 = 0}, squared L2 norms
//   Z  : layer fields, weight (1+z)^{2s}, index set as Y, corrected half-line
//        quadrature in z (the plain trapezoid would dominate the tolerance)

#ifndef CNS_CONORMAL_HPP
#define CNS_CONORMAL_HPP

#include <vector>

#include "cns/grid.hpp"

namespace cns {

struct MultiIndex {
  int a1 = 0;  ///< time order
  int a2 = 0;  ///< x order
  int a3 = 0;  ///< conormal wall-normal order
  int total() const { return a1 + a2 + a3; }
};

class ConormalWeight {
 public:
  explicit ConormalWeight(double delta = 0.1);
  double operator()(double y) const;
  double delta() const { return delta_; }

 private:
  double delta_;
};

inline double psi_weight(double y, const ConormalWeight& w) { return w(y); }

struct NormSpec {
  enum class Kind { Y, Yinf, Yt, Z };
  Kind kind = Kind::Y;
  int l = 0;       ///< max time order
  int m = 0;       ///< max total order (ignored for Yt, where it equals l)
  double s = 0.0;  ///< z-weight exponent (Z only)
};

/** Ring of uniformly spaced time snapshots; evaluation point defaults to the
 * middle snapshot so time differences are centered whenever possible. */
template <class Field>
class HistoryRing {
 public:
  explicit HistoryRing(int depth) : depth_(depth) {
    if (depth < 1) throw std::invalid_argument("history depth must be >= 1");
  }
  static HistoryRing single(const Field& f) {
    HistoryRing h(1);
    h.push(f);
    return h;
  }

  void push(const Field& f);
  int size() const { return static_cast<int>(snaps_.size()); }
  int depth() const { return depth_; }
  int center() const { return (size() - 1) / 2; }
  const Field& snapshot(int i) const { return snaps_.at(i); }
  const Field& latest() const { return snaps_.back(); }
  double dt() const { return dt_; }

  /** q-th time derivative at snapshot `at` (2nd order: centered inside,
   * one-sided stencils of q+2 points at the ends). */
  Field time_derivative(int q, int at) const;

 private:
  int depth_;
  double dt_ = 0.0;
  std::vector<Field> snaps_;
};

using FieldHistory = HistoryRing<ScalarField2D>;
using LayerHistory = HistoryRing<LayerField2D>;

/** D^alpha on strip fields; at = -1 evaluates at the center snapshot. */
ScalarField2D conormal_derivative(const FieldHistory& h, const MultiIndex& alpha,
                                  const ConormalWeight& w, int at = -1);
/** Inner D^alpha on layer fields. */
LayerField2D inner_conormal_derivative(const LayerHistory& h, const MultiIndex& alpha,
                                       double delta, int at = -1);

double y_norm(const FieldHistory& h, const NormSpec& spec, const ConormalWeight& w, int at = -1);
double y_inf_norm(const FieldHistory& h, const NormSpec& spec, const ConormalWeight& w,
                  int at = -1);
/** Corrected half-line quadrature in z; *decay_ok reports tail-fit health. */
double z_norm(const LayerHistory& h, const NormSpec& spec, double delta, int at = -1,
              bool* decay_ok = nullptr);

/** All (a1,a2,a3) with a1 <= l and |alpha| <= m, ordered deterministically. */
std::vector<MultiIndex> norm_index_set(const NormSpec& spec);

}  // namespace cns

#endif  // CNS_CONORMAL_HPP
