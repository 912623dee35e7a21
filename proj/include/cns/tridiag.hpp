// Tridiagonal solver (Thomas algorithm) plus a helper for boundary rows that
// carry a second off-diagonal entry (one-sided second-order derivative rows),
// which are pre-eliminated against the neighbouring interior row.

#ifndef CNS_TRIDIAG_HPP
#define CNS_TRIDIAG_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

namespace cns {

/** Rows: a[i]*x[i-1] + b[i]*x[i] + c[i]*x[i+1] = r[i]; a[0] and c[n-1] unused. */
struct Tridiag {
  std::vector<double> a, b, c;

  explicit Tridiag(int n) : a(n, 0.0), b(n, 0.0), c(n, 0.0) {}
  int size() const { return static_cast<int>(b.size()); }

  /** Solve in place; `r` must have the same length as the matrix. */
  void solve(double* r) const {
    const int n = size();
    thread_local std::vector<double> cp, dp;
    cp.assign(n, 0.0);
    dp.assign(n, 0.0);
    double beta = b[0];
    if (beta == 0.0) throw std::runtime_error("Tridiag: zero pivot at row 0");
    cp[0] = c[0] / beta;
    dp[0] = r[0] / beta;
    for (int i = 1; i < n; ++i) {
      beta = b[i] - a[i] * cp[i - 1];
      if (beta == 0.0) throw std::runtime_error("Tridiag: zero pivot");
      cp[i] = c[i] / beta;
      dp[i] = (r[i] - a[i] * dp[i - 1]) / beta;
    }
    r[n - 1] = dp[n - 1];
    for (int i = n - 2; i >= 0; --i) r[i] = dp[i] - cp[i] * r[i + 1];
  }
};

/** A boundary row with three entries counted from the boundary node:
 * at the bottom: d*x0 + e*x1 + f*x2 = r; at the top: f*x[n-3] + e*x[n-2] + d*x[n-1] = r. */
struct BoundaryRow3 {
  double d = 1.0, e = 0.0, f = 0.0;
};

/** Fold a 3-entry bottom row into tridiagonal form using interior row 1.
 * Row 1 must couple to x2 (c[1] != 0). Returns the extra multiple of r[1]
 * that must be subtracted from the boundary right-hand side. */
inline double fold_bottom_row(Tridiag& T, const BoundaryRow3& row) {
  if (T.c[1] == 0.0) throw std::runtime_error("fold_bottom_row: interior row does not reach x2");
  double m = row.f / T.c[1];
  T.b[0] = row.d - m * T.a[1];
  T.c[0] = row.e - m * T.b[1];
  return m;
}

inline double fold_top_row(Tridiag& T, const BoundaryRow3& row) {
  const int n = T.size();
  if (T.a[n - 2] == 0.0) throw std::runtime_error("fold_top_row: interior row does not reach x[n-3]");
  double m = row.f / T.a[n - 2];
  T.a[n - 1] = row.e - m * T.b[n - 2];
  T.b[n - 1] = row.d - m * T.c[n - 2];
  return m;
}

}  // namespace cns

#endif  // CNS_TRIDIAG_HPP
