#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gpsm/slice.hpp"

namespace gpsm {

// Pointwise-evaluable field with optional analytic partial derivatives
// (axis i -> d f / d x_i).  Operators in this header always differentiate by
// central finite differences; the analytic channel is consumed by the
// integral transforms when present.
struct FieldFunction {
  std::function<Multivector(const Point&)> eval;
  std::function<Multivector(const Point&, int)> partial;  // optional
  std::optional<SliceDomain> domain;                      // optional stem domain

  FieldFunction() = default;
  FieldFunction(std::function<Multivector(const Point&)> f) : eval(std::move(f)) {}

  Multivector operator()(const Point& x) const { return eval(x); }
};

// Central difference scheme of order 2 or 4.  step = 0 selects the roundoff
// balanced default: eps^{1/3} for order 2, eps^{1/5} for order 4, scaled by
// max(1, |x|).
struct FDScheme {
  int order = 2;
  double step = 0.0;

  double step_for(const Point& x) const {
    if (step > 0.0) return step;
    const double eps = std::numeric_limits<double>::epsilon();
    const double scale = std::max(1.0, euclidean_norm(x.c));
    return (order == 4 ? std::pow(eps, 0.2) : std::cbrt(eps)) * scale;
  }
};

namespace detail {

inline void check_stencil(const FieldFunction& f, const Point& x, int axis,
                          double h, int reach, const Signature& sig) {
  if (!f.domain) return;
  Point t = x;
  t[axis] = x[axis] + reach * h;
  const bool hi = completion_contains(*f.domain, t, sig);
  t[axis] = x[axis] - reach * h;
  const bool lo = completion_contains(*f.domain, t, sig);
  if (!hi || !lo)
    throw std::domain_error("finite-difference stencil exits the field domain");
}

}  // namespace detail

inline Multivector partial_derivative(const FieldFunction& f, const Point& x,
                                      int axis, const Signature& sig,
                                      const FDScheme& s = {}) {
  const double h = s.step_for(x);
  if (s.order != 2 && s.order != 4)
    throw std::invalid_argument("FDScheme: order must be 2 or 4");
  detail::check_stencil(f, x, axis, h, s.order == 4 ? 2 : 1, sig);
  Point t = x;
  if (s.order == 2) {
    t[axis] = x[axis] + h;
    Multivector d = f(t);
    t[axis] = x[axis] - h;
    d -= f(t);
    return d / (2.0 * h);
  }
  t[axis] = x[axis] + 2.0 * h;
  Multivector d = -f(t);
  t[axis] = x[axis] + h;
  d += 8.0 * f(t);
  t[axis] = x[axis] - h;
  d -= 8.0 * f(t);
  t[axis] = x[axis] - 2.0 * h;
  d += f(t);
  return d / (12.0 * h);
}

// D_{x_p} f = sum_{i=0}^{p} e_i d_i f  (e_0 = 1).
inline Multivector apply_D_xp(const FieldFunction& f, const Point& x,
                              const Signature& sig, const FDScheme& s = {}) {
  check_point(x, sig);
  Multivector out = partial_derivative(f, x, 0, sig, s);
  for (int i = 1; i <= sig.p; ++i)
    out += Multivector::generator(sig, i) * partial_derivative(f, x, i, sig, s);
  return out;
}

// D_{x_q} f = sum_{i=p+1}^{p+q} e_i d_i f.
inline Multivector apply_D_xq(const FieldFunction& f, const Point& x,
                              const Signature& sig, const FDScheme& s = {}) {
  check_point(x, sig);
  Multivector out(sig);
  for (int i = sig.p + 1; i <= sig.n(); ++i)
    out += Multivector::generator(sig, i) * partial_derivative(f, x, i, sig, s);
  return out;
}

// Generalized Cauchy-Riemann operator; splits exactly as D_{x_p} + D_{x_q}
// (same stencil evaluations).
inline Multivector apply_D(const FieldFunction& f, const Point& x,
                           const Signature& sig, const FDScheme& s = {}) {
  return apply_D_xp(f, x, sig, s) + apply_D_xq(f, x, sig, s);
}

// Euler operator of the R^q block: sum_{i=p+1}^{p+q} x_i d_i f.
inline Multivector apply_euler_q(const FieldFunction& f, const Point& x,
                                 const Signature& sig, const FDScheme& s = {}) {
  check_point(x, sig);
  Multivector out(sig);
  for (int i = sig.p + 1; i <= sig.n(); ++i) {
    if (x[i] == 0.0) continue;
    out += x[i] * partial_derivative(f, x, i, sig, s);
  }
  return out;
}

// vartheta-bar f = D_{x_p} f + (x_q / |x_q|^2) E_{x_q} f, defined away from
// the singular set R^{p+1}.
inline Multivector apply_vartheta_bar(const FieldFunction& f, const Point& x,
                                      const Signature& sig, const FDScheme& s = {}) {
  check_point(x, sig);
  double r2 = 0.0;
  for (int i = sig.p + 1; i <= sig.n(); ++i) r2 += x[i] * x[i];
  if (r2 == 0.0)
    throw std::domain_error("apply_vartheta_bar: point lies on the singular set R^{p+1}");
  Multivector xq(sig);
  for (int i = sig.p + 1; i <= sig.n(); ++i)
    xq[BladeMask{1} << (i - 1)] = x[i] / r2;
  return apply_D_xp(f, x, sig, s) + xq * apply_euler_q(f, x, sig, s);
}

// Analytic version when the field carries partial derivatives.
inline Multivector apply_vartheta_bar_analytic(const FieldFunction& f, const Point& x,
                                               const Signature& sig) {
  if (!f.partial)
    throw std::invalid_argument("apply_vartheta_bar_analytic: no partials attached");
  check_point(x, sig);
  double r2 = 0.0;
  for (int i = sig.p + 1; i <= sig.n(); ++i) r2 += x[i] * x[i];
  if (r2 == 0.0)
    throw std::domain_error("apply_vartheta_bar_analytic: singular set");
  Multivector out = f.partial(x, 0);
  for (int i = 1; i <= sig.p; ++i)
    out += Multivector::generator(sig, i) * f.partial(x, i);
  Multivector euler(sig);
  for (int i = sig.p + 1; i <= sig.n(); ++i) {
    if (x[i] == 0.0) continue;
    euler += x[i] * f.partial(x, i);
  }
  Multivector xq(sig);
  for (int i = sig.p + 1; i <= sig.n(); ++i)
    xq[BladeMask{1} << (i - 1)] = x[i] / r2;
  return out + xq * euler;
}

// ---------------------------------------------------------------------------
// Stem Cauchy-Riemann system.
//
// The first equation is D_{x_p} F1 - d_r F2 = 0.  The second carries a sign
// ambiguity: the "printed" variant reads conj(D_{x_p}) F2 - d_r F1, the
// "holomorphic" variant conj(D_{x_p}) F2 + d_r F1.  Only the latter reduces
// to the Cauchy-Riemann equations at p = 0, q = 1 (the z^2 stem is the
// deciding oracle), so it is the default.
// ---------------------------------------------------------------------------

enum class CrVariant { printed, holomorphic };

namespace detail {

inline Multivector stem_partial(const StemComponent& F, const StemPoint& sp,
                                int axis, double h, int order) {
  StemPoint t = sp;
  auto coord = [&](double val) -> StemPoint& {
    if (axis < static_cast<int>(sp.xp.size()))
      t.xp[axis] = val;
    else
      t.v = val;
    return t;
  };
  const double base = axis < static_cast<int>(sp.xp.size()) ? sp.xp[axis] : sp.v;
  if (order == 2) {
    Multivector d = F(coord(base + h));
    d -= F(coord(base - h));
    return d / (2.0 * h);
  }
  Multivector d = -F(coord(base + 2.0 * h));
  d += 8.0 * F(coord(base + h));
  d -= 8.0 * F(coord(base - h));
  d += F(coord(base - 2.0 * h));
  return d / (12.0 * h);
}

}  // namespace detail

inline std::pair<Multivector, Multivector> stem_cr_residual(
    const StemFunction& F, const StemPoint& sp, const Signature& sig,
    const FDScheme& s = {}, CrVariant variant = CrVariant::holomorphic) {
  Point anchor;
  anchor.c = sp.xp;
  anchor.c.push_back(sp.v);
  const double h = s.step_for(anchor);

  // D_{x_p} F1 and conj(D_{x_p}) F2 = (d_0 - sum_{i=1}^p e_i d_i) F2
  Multivector res1 = detail::stem_partial(F.f1, sp, 0, h, s.order);
  Multivector conjD_f2 = detail::stem_partial(F.f2, sp, 0, h, s.order);
  for (int i = 1; i <= sig.p; ++i) {
    const Multivector ei = Multivector::generator(sig, i);
    res1 += ei * detail::stem_partial(F.f1, sp, i, h, s.order);
    conjD_f2 -= ei * detail::stem_partial(F.f2, sp, i, h, s.order);
  }
  const int vaxis = sig.p + 1;
  res1 -= detail::stem_partial(F.f2, sp, vaxis, h, s.order);
  Multivector dr_f1 = detail::stem_partial(F.f1, sp, vaxis, h, s.order);
  Multivector res2 =
      variant == CrVariant::printed ? conjD_f2 - dr_f1 : conjD_f2 + dr_f1;
  return {res1, res2};
}

// Max norm of vartheta-bar f over a point list; the points must avoid R^{p+1}.
inline double gpsm_residual(const FieldFunction& f, const std::vector<Point>& pts,
                            const Signature& sig, const FDScheme& s = {}) {
  double worst = 0.0;
  for (const Point& x : pts)
    worst = std::max(worst, norm(apply_vartheta_bar(f, x, sig, s)));
  return worst;
}

// Convergence order from two errors at refinement ratio `ratio`.
inline double observed_order(double err_coarse, double err_fine, double ratio = 2.0) {
  if (err_fine <= 0.0 || err_coarse <= 0.0) return 0.0;
  return std::log(err_coarse / err_fine) / std::log(ratio);
}

}  // namespace gpsm
