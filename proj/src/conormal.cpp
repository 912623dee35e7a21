#include "cns/conormal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cns/operators.hpp"
#include "cns/quadrature.hpp"

namespace cns {

ConormalWeight::ConormalWeight(double delta) : delta_(delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("conormal delta must be positive");
}

double ConormalWeight::operator()(double y) const {
  if (y < 0.0) throw std::invalid_argument("psi: y must be nonnegative");
  if (y <= 0.5) return delta_ * y;
  if (y >= 1.0) return delta_ * y / (1.0 + y);
  // C^1 cubic Hermite on (1/2, 1): values (d/2, d/2), slopes (d, d/4)
  const double h = 0.5;
  const double t = (y - 0.5) / h;
  const double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
  const double h10 = t * (1.0 - t) * (1.0 - t);
  const double h01 = t * t * (3.0 - 2.0 * t);
  const double h11 = t * t * (t - 1.0);
  const double f0 = 0.5 * delta_, f1 = 0.5 * delta_;
  const double m0 = delta_, m1 = 0.25 * delta_;
  return f0 * h00 + h * m0 * h10 + f1 * h01 + h * m1 * h11;
}

namespace {

void check_layout_eq(const ScalarField2D& a, const ScalarField2D& b) { check_same_layout(a, b); }

void check_layout_eq(const LayerField2D& a, const LayerField2D& b) {
  if (a.Nx != b.Nx || a.Lx != b.Lx || a.zgrid->Nz != b.zgrid->Nz || a.zgrid->z != b.zgrid->z)
    throw std::invalid_argument("layer fields have mismatched layouts");
}

}  // namespace

template <class Field>
void HistoryRing<Field>::push(const Field& f) {
  if (!snaps_.empty()) {
    check_layout_eq(snaps_.back(), f);
    const double step = f.time - snaps_.back().time;
    if (!(step > 0.0)) throw std::invalid_argument("history snapshots must advance in time");
    if (size() >= 2 && std::abs(step - dt_) > 1e-9 * std::max(1.0, std::abs(dt_)))
      throw std::invalid_argument("history snapshots must be uniformly spaced");
    dt_ = step;
  }
  snaps_.push_back(f);
  if (size() > depth_) snaps_.erase(snaps_.begin());
}

template <class Field>
Field HistoryRing<Field>::time_derivative(int q, int at) const {
  if (at < 0 || at >= size()) throw std::out_of_range("history evaluation index");
  Field out = snaps_[at];
  if (q == 0) return out;
  if (size() < q + 1) throw std::invalid_argument("history too shallow for requested d/dt order");

  int len = std::min(size(), q + 2);
  int base;
  if (at - 1 >= 0 && at + 1 < size() && q <= 2) {
    base = at - 1;  // centered 3-point stencil, second order
    len = 3;
  } else {
    base = std::min(std::max(at - 1, 0), size() - len);
  }
  std::vector<double> times(len), w(len);
  for (int i = 0; i < len; ++i) times[i] = dt_ * (base + i - at);
  fornberg_weights(0.0, times.data(), len, q, w.data());

  std::fill(out.v.begin(), out.v.end(), 0.0);
  for (int i = 0; i < len; ++i) {
    const auto& s = snaps_[base + i].v;
    for (size_t p = 0; p < out.v.size(); ++p) out.v[p] += w[i] * s[p];
  }
  return out;
}

template class HistoryRing<ScalarField2D>;
template class HistoryRing<LayerField2D>;

std::vector<MultiIndex> norm_index_set(const NormSpec& spec) {
  std::vector<MultiIndex> out;
  if (spec.kind == NormSpec::Kind::Yt) {
    for (int a1 = 0; a1 <= spec.l; ++a1) out.push_back({a1, 0, 0});
    return out;
  }
  if (spec.l > spec.m) throw std::invalid_argument("norm spec requires l <= m");
  if (spec.s < 0.0) throw std::invalid_argument("norm spec requires s >= 0");
  for (int a1 = 0; a1 <= spec.l; ++a1)
    for (int a2 = 0; a2 + a1 <= spec.m; ++a2)
      for (int a3 = 0; a1 + a2 + a3 <= spec.m; ++a3) out.push_back({a1, a2, a3});
  return out;
}

ScalarField2D conormal_derivative(const FieldHistory& h, const MultiIndex& alpha,
                                  const ConormalWeight& w, int at) {
  if (at < 0) at = h.center();
  ScalarField2D d = h.time_derivative(alpha.a1, at);
  for (int q = 0; q < alpha.a2; ++q) d = ddx(d);
  if (alpha.a3 > 0) {
    for (int q = 2; q < alpha.a3; ++q) d = ddy(d);  // orders above 2: compose
    d = (alpha.a3 >= 2) ? d2dy2(d) : ddy(d);
    const Grid2D& g = *d.grid;
    for (int j = 0; j < g.Ny; ++j) {
      const double wy = std::pow(w(g.y[j]), alpha.a3);
      double* row = d.v.data() + static_cast<size_t>(j) * g.Nx;
      for (int i = 0; i < g.Nx; ++i) row[i] *= wy;
    }
  }
  return d;
}

LayerField2D inner_conormal_derivative(const LayerHistory& h, const MultiIndex& alpha,
                                       double delta, int at) {
  if (at < 0) at = h.center();
  LayerField2D d = h.time_derivative(alpha.a1, at);
  for (int q = 0; q < alpha.a2; ++q) d = ddx(d);
  if (alpha.a3 > 0) {
    for (int q = 2; q < alpha.a3; ++q) d = ddz(d);
    d = (alpha.a3 >= 2) ? d2dz2(d) : ddz(d);
    const auto& z = d.zgrid->z;
    for (int k = 0; k < d.nz(); ++k) {
      const double wz = std::pow(delta * z[k], alpha.a3);
      double* row = d.v.data() + static_cast<size_t>(k) * d.Nx;
      for (int i = 0; i < d.Nx; ++i) row[i] *= wz;
    }
  }
  return d;
}

namespace {

double l2_sq(const ScalarField2D& f) {
  const Grid2D& g = *f.grid;
  double total = 0.0;
  for (int j = 0; j < g.Ny; ++j) {
    double rowsum = 0.0;
    const double* row = f.v.data() + static_cast<size_t>(j) * g.Nx;
    for (int i = 0; i < g.Nx; ++i) rowsum += row[i] * row[i];
    total += rowsum * g.yweight(j);
  }
  return total * g.dx;
}

void require_kind(const NormSpec& spec, NormSpec::Kind kind, const char* fn) {
  if (spec.kind != kind && !(kind == NormSpec::Kind::Y && spec.kind == NormSpec::Kind::Yt))
    throw std::invalid_argument(std::string(fn) + ": norm spec kind mismatch");
}

}  // namespace

double y_norm(const FieldHistory& h, const NormSpec& spec, const ConormalWeight& w, int at) {
  require_kind(spec, NormSpec::Kind::Y, "y_norm");
  double total = 0.0;
  for (const MultiIndex& a : norm_index_set(spec))
    total += l2_sq(conormal_derivative(h, a, w, at));
  return std::sqrt(total);
}

double y_inf_norm(const FieldHistory& h, const NormSpec& spec, const ConormalWeight& w, int at) {
  if (spec.kind != NormSpec::Kind::Yinf)
    throw std::invalid_argument("y_inf_norm: norm spec kind mismatch");
  NormSpec as_y = spec;
  as_y.kind = NormSpec::Kind::Y;
  double total = 0.0;
  for (const MultiIndex& a : norm_index_set(as_y)) {
    const double sup = max_abs(conormal_derivative(h, a, w, at).v);
    total += sup * sup;
  }
  return std::sqrt(total);
}

double z_norm(const LayerHistory& h, const NormSpec& spec, double delta, int at, bool* decay_ok) {
  if (spec.kind != NormSpec::Kind::Z)
    throw std::invalid_argument("z_norm: norm spec kind mismatch");
  NormSpec as_y = spec;
  as_y.kind = NormSpec::Kind::Y;
  bool all_ok = true;
  double total = 0.0;
  const auto zg = h.latest().zgrid;
  std::vector<double> col(zg->Nz);
  for (const MultiIndex& a : norm_index_set(as_y)) {
    LayerField2D d = inner_conormal_derivative(h, a, delta, at);
    for (int i = 0; i < d.Nx; ++i) {
      for (int k = 0; k < d.nz(); ++k) {
        const double wz = std::pow(1.0 + zg->z[k], spec.s);
        const double val = wz * d.at(i, k);
        col[k] = val * val;
      }
      const TailIntegral r = integrate_z_tail(*zg, col.data());
      total += d.dx() * r.value;
      all_ok = all_ok && r.tail_ok;
    }
  }
  if (decay_ok) *decay_ok = all_ok;
  return std::sqrt(std::max(0.0, total));
}

}  // namespace cns
