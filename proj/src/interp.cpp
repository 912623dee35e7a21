#include "cns/interp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cns {

MonotoneCubic::MonotoneCubic(const std::vector<double>& nodes, const std::vector<double>& values,
                             double beyond)
    : x_(nodes), y_(values), beyond_(beyond) {
  const size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw std::invalid_argument("MonotoneCubic: bad input sizes");
  d_.assign(n, 0.0);
  std::vector<double> h(n - 1), del(n - 1);
  for (size_t k = 0; k + 1 < n; ++k) {
    h[k] = x_[k + 1] - x_[k];
    if (h[k] <= 0.0) throw std::invalid_argument("MonotoneCubic: nodes must increase");
    del[k] = (y_[k + 1] - y_[k]) / h[k];
  }
  if (n == 2) {
    d_[0] = d_[1] = del[0];
  } else {
    for (size_t k = 1; k + 1 < n; ++k) {
      if (del[k - 1] * del[k] <= 0.0) {
        d_[k] = 0.0;
      } else {
        double w1 = 2.0 * h[k] + h[k - 1];
        double w2 = h[k] + 2.0 * h[k - 1];
        d_[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
      }
    }
    // one-sided end slopes with the standard monotonicity clamp
    auto end_slope = [](double h0, double h1, double del0, double del1) {
      double d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
      if (d * del0 <= 0.0) return 0.0;
      if (del0 * del1 <= 0.0 && std::abs(d) > 3.0 * std::abs(del0)) return 3.0 * del0;
      return d;
    };
    d_[0] = end_slope(h[0], h[1], del[0], del[1]);
    d_[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
  }
}

double MonotoneCubic::operator()(double x) const {
  if (x > x_.back()) return beyond_;
  if (x <= x_.front()) return y_.front();
  size_t k = static_cast<size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin()) - 1;
  if (k >= x_.size() - 1) k = x_.size() - 2;
  double h = x_[k + 1] - x_[k];
  double t = (x - x_[k]) / h;
  double t2 = t * t, t3 = t2 * t;
  double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  return h00 * y_[k] + h * h10 * d_[k] + h01 * y_[k + 1] + h * h11 * d_[k + 1];
}

}  // namespace cns
