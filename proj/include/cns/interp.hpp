// Shape-preserving (monotone) cubic Hermite interpolation on a fixed node set,
// Fritsch-Carlson slope limiting. Used to transfer layer profiles from the
// z mesh to physical y points and outer fields between y meshes; it never
// overshoots, so interpolated densities stay nonnegative.

#ifndef CNS_INTERP_HPP
#define CNS_INTERP_HPP

#include <vector>

namespace cns {

class MonotoneCubic {
 public:
  /** Nodes must be strictly increasing; values are sampled at the nodes.
   * `beyond` is returned for query points above the last node (profiles that
   * decayed to the mesh edge are extended by zero). Queries below the first
   * node clamp to the first value. */
  MonotoneCubic(const std::vector<double>& nodes, const std::vector<double>& values,
                double beyond = 0.0);

  double operator()(double x) const;

 private:
  std::vector<double> x_, y_, d_;  // nodes, values, limited slopes
  double beyond_;
};

}  // namespace cns

#endif  // CNS_INTERP_HPP
