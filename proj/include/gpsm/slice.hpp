#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gpsm/multivector.hpp"

namespace gpsm {

// Point of R^{p+q+1}, coordinates (x_0, ..., x_{p+q}).
struct Point {
  std::vector<double> c;

  Point() = default;
  explicit Point(std::vector<double> coords) : c(std::move(coords)) {}
  Point(std::initializer_list<double> coords) : c(coords) {}

  std::size_t dim() const { return c.size(); }
  double operator[](std::size_t i) const { return c[i]; }
  double& operator[](std::size_t i) { return c[i]; }
};

inline double euclidean_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Stem coordinates (x_p, v) in R^{p+2}; v is the signed coordinate along the
// chosen slice direction.  The split of a point always produces v = r >= 0;
// signed values appear in slice rules covering both half-slices.
struct StemPoint {
  std::vector<double> xp;  // (x_0, ..., x_p)
  double v = 0.0;
};

inline double stem_distance(const StemPoint& a, const StemPoint& b) {
  double s = (a.v - b.v) * (a.v - b.v);
  for (std::size_t i = 0; i < a.xp.size(); ++i)
    s += (a.xp[i] - b.xp[i]) * (a.xp[i] - b.xp[i]);
  return std::sqrt(s);
}

// Decomposition x = x_p + r*omega with omega a unit vector of R^q; omega is
// absent when the R^q component vanishes.
struct SplitPoint {
  std::vector<double> xp;               // (x_0, ..., x_p)
  double r = 0.0;                       // |x_q part|
  std::optional<std::vector<double>> omega;  // unit vector in R^q

  StemPoint stem() const { return {xp, r}; }
};

inline void check_point(const Point& x, const Signature& sig) {
  if (static_cast<int>(x.dim()) != sig.point_dim())
    throw std::invalid_argument("point has wrong dimension for signature");
}

inline SplitPoint split(const Point& x, const Signature& sig) {
  check_point(x, sig);
  SplitPoint s;
  s.xp.assign(x.c.begin(), x.c.begin() + sig.p + 1);
  std::vector<double> xq(x.c.begin() + sig.p + 1, x.c.end());
  s.r = euclidean_norm(xq);
  if (s.r > 0.0) {
    for (double& v : xq) v /= s.r;
    s.omega = std::move(xq);
  }
  return s;
}

inline Point reassemble(const SplitPoint& s, const Signature& sig) {
  Point x;
  x.c = s.xp;
  x.c.resize(sig.point_dim(), 0.0);
  if (s.omega) {
    for (int i = 0; i < sig.q; ++i) x.c[sig.p + 1 + i] = s.r * (*s.omega)[i];
  }
  return x;
}

// Embed a stem point on the eta-slice: x = x_p + v*eta.
inline Point embed_stem(const StemPoint& sp, const std::vector<double>& eta,
                        const Signature& sig) {
  Point x;
  x.c = sp.xp;
  x.c.resize(sig.point_dim(), 0.0);
  for (int i = 0; i < sig.q; ++i) x.c[sig.p + 1 + i] = sp.v * eta[i];
  return x;
}

// A unit vector of R^q as the grade-1 element sum_i u_i e_{p+i}.
inline Multivector embed_sphere_vector(const std::vector<double>& u,
                                       const Signature& sig) {
  if (static_cast<int>(u.size()) != sig.q)
    throw std::invalid_argument("embed_sphere_vector: wrong length");
  Multivector m(sig);
  for (int i = 0; i < sig.q; ++i) m[BladeMask{1} << (sig.p + i)] = u[i];
  return m;
}

// y in [x] = x_p + r*S: same x_p and same r.
inline bool orbit_membership(const Point& x, const Point& y, const Signature& sig,
                             double tol = 1e-12) {
  const SplitPoint sx = split(x, sig);
  const SplitPoint sy = split(y, sig);
  if (std::abs(sx.r - sy.r) > tol) return false;
  for (std::size_t i = 0; i < sx.xp.size(); ++i)
    if (std::abs(sx.xp[i] - sy.xp[i]) > tol) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Reflection-symmetric stem domains.  A primitive is placed at a center with
// v-coordinate c_v >= 0 and the domain is the primitive together with its
// mirror image under v -> -v (they coincide when c_v = 0).  Membership is
// therefore invariant under the reflection by construction.
// ---------------------------------------------------------------------------

enum class DomainKind { box, ball, annulus };

class SliceDomain {
 public:
  static SliceDomain box(std::vector<double> center, std::vector<double> halfwidth) {
    SliceDomain d;
    d.kind_ = DomainKind::box;
    d.center_ = std::move(center);
    d.halfwidth_ = std::move(halfwidth);
    if (d.center_.size() != d.halfwidth_.size() || d.center_.size() < 2)
      throw std::invalid_argument("SliceDomain::box: bad center/halfwidth");
    for (double h : d.halfwidth_)
      if (h <= 0.0) throw std::invalid_argument("SliceDomain::box: halfwidth <= 0");
    const double cv = d.center_.back(), hv = d.halfwidth_.back();
    if (cv < 0.0) throw std::invalid_argument("SliceDomain: center v must be >= 0");
    if (cv != 0.0 && cv - hv < 0.0)
      throw std::invalid_argument("SliceDomain::box: mirrored components overlap");
    return d;
  }

  static SliceDomain ball(std::vector<double> center, double radius) {
    SliceDomain d;
    d.kind_ = DomainKind::ball;
    d.center_ = std::move(center);
    d.radius_ = radius;
    if (radius <= 0.0 || d.center_.size() < 2)
      throw std::invalid_argument("SliceDomain::ball: bad parameters");
    const double cv = d.center_.back();
    if (cv < 0.0) throw std::invalid_argument("SliceDomain: center v must be >= 0");
    if (cv != 0.0 && cv < radius)
      throw std::invalid_argument("SliceDomain::ball: mirrored components overlap");
    return d;
  }

  // Concentric difference of balls.
  static SliceDomain annulus(std::vector<double> center, double inner, double outer) {
    SliceDomain d = ball(std::move(center), outer);
    d.kind_ = DomainKind::annulus;
    if (inner <= 0.0 || inner >= outer)
      throw std::invalid_argument("SliceDomain::annulus: need 0 < inner < outer");
    d.inner_radius_ = inner;
    return d;
  }

  DomainKind kind() const { return kind_; }
  const std::vector<double>& center() const { return center_; }
  const std::vector<double>& halfwidth() const { return halfwidth_; }
  double radius() const { return radius_; }
  double inner_radius() const { return inner_radius_; }
  int stem_dim() const { return static_cast<int>(center_.size()); }
  bool mirrored() const { return center_.back() > 0.0; }

  bool contains(const StemPoint& sp) const {
    return contains_primitive(sp, +1) || (mirrored() && contains_primitive(sp, -1));
  }

  // Guaranteed distance of the completion from R^{p+1} (0 if none).
  double clearance() const {
    switch (kind_) {
      case DomainKind::box:
        return mirrored() ? center_.back() - halfwidth_.back() : 0.0;
      case DomainKind::ball:
        return mirrored() ? center_.back() - radius_ : 0.0;
      case DomainKind::annulus:
        return mirrored() ? center_.back() - radius_ : 0.0;
    }
    return 0.0;
  }

  // Euclidean distance from a stem point to the domain (0 if inside).
  double exterior_distance(const StemPoint& sp) const {
    double d = primitive_exterior_distance(sp, +1);
    if (mirrored()) d = std::min(d, primitive_exterior_distance(sp, -1));
    return d;
  }

  // Box bounding the primitive component (the one with v >= 0).
  void bounding_box(std::vector<double>& lo, std::vector<double>& hi) const {
    lo = center_;
    hi = center_;
    for (std::size_t i = 0; i < center_.size(); ++i) {
      const double h = (kind_ == DomainKind::box) ? halfwidth_[i] : radius_;
      lo[i] -= h;
      hi[i] += h;
    }
  }

 private:
  bool contains_primitive(const StemPoint& sp, int mirror) const {
    if (static_cast<int>(sp.xp.size()) + 1 != stem_dim()) return false;
    const double v = mirror * sp.v;
    switch (kind_) {
      case DomainKind::box: {
        for (std::size_t i = 0; i < sp.xp.size(); ++i)
          if (std::abs(sp.xp[i] - center_[i]) > halfwidth_[i]) return false;
        return std::abs(v - center_.back()) <= halfwidth_.back();
      }
      case DomainKind::ball:
      case DomainKind::annulus: {
        double s = (v - center_.back()) * (v - center_.back());
        for (std::size_t i = 0; i < sp.xp.size(); ++i)
          s += (sp.xp[i] - center_[i]) * (sp.xp[i] - center_[i]);
        const double d = std::sqrt(s);
        if (kind_ == DomainKind::annulus && d < inner_radius_) return false;
        return d <= radius_;
      }
    }
    return false;
  }

  double primitive_exterior_distance(const StemPoint& sp, int mirror) const {
    const double v = mirror * sp.v;
    switch (kind_) {
      case DomainKind::box: {
        double s = 0.0;
        for (std::size_t i = 0; i < sp.xp.size(); ++i) {
          const double excess = std::abs(sp.xp[i] - center_[i]) - halfwidth_[i];
          if (excess > 0.0) s += excess * excess;
        }
        const double ev = std::abs(v - center_.back()) - halfwidth_.back();
        if (ev > 0.0) s += ev * ev;
        return std::sqrt(s);
      }
      case DomainKind::ball:
      case DomainKind::annulus: {
        double s = (v - center_.back()) * (v - center_.back());
        for (std::size_t i = 0; i < sp.xp.size(); ++i)
          s += (sp.xp[i] - center_[i]) * (sp.xp[i] - center_[i]);
        const double d = std::sqrt(s);
        double out = std::max(0.0, d - radius_);
        if (kind_ == DomainKind::annulus)
          out = std::max(out, std::max(0.0, inner_radius_ - d));
        return out;
      }
    }
    return 0.0;
  }

  DomainKind kind_ = DomainKind::ball;
  std::vector<double> center_;
  std::vector<double> halfwidth_;
  double radius_ = 0.0;
  double inner_radius_ = 0.0;
};

// x lies in the p-symmetric completion Omega_D iff its stem pair lies in D.
inline bool completion_contains(const SliceDomain& D, const Point& x,
                                const Signature& sig) {
  return D.contains(split(x, sig).stem());
}

// ---------------------------------------------------------------------------
// Stem functions and induced slice functions.
// ---------------------------------------------------------------------------

using StemComponent = std::function<Multivector(const StemPoint&)>;

// Pair (F1, F2) on a reflection-symmetric domain with F1 even and F2 odd in
// the last variable; induces f(x) = F1(x') + omega F2(x').
struct StemFunction {
  StemComponent f1;
  StemComponent f2;
  SliceDomain domain;
};

inline Multivector induce(const StemFunction& F, const Point& x, const Signature& sig) {
  const SplitPoint s = split(x, sig);
  if (!F.domain.contains(s.stem()))
    throw std::domain_error("induce: point outside stem domain");
  Multivector out = F.f1(s.stem());
  if (s.omega) {
    // at r = 0 the odd component vanishes and omega is not needed
    out += embed_sphere_vector(*s.omega, sig) * F.f2(s.stem());
  }
  return out;
}

// Max over samples of |F1(x,-r) - F1(x,r)| + |F2(x,-r) + F2(x,r)|.
inline double check_stem_parity(const StemFunction& F,
                                const std::vector<StemPoint>& samples) {
  double worst = 0.0;
  for (const StemPoint& sp : samples) {
    StemPoint refl = sp;
    refl.v = -refl.v;
    const double e1 = norm(F.f1(refl) - F.f1(sp));
    const double e2 = norm(F.f2(refl) + F.f2(sp));
    worst = std::max(worst, e1 + e2);
  }
  return worst;
}

// f(x) = (w - w2)(w1 - w2)^{-1} f(x_p + r w1) - (w - w1)(w1 - w2)^{-1} f(x_p + r w2)
// for slice functions; the difference w1 - w2 is inverted as a nonzero
// 1-vector, v^{-1} = -v/|v|^2.
inline Multivector representation_formula(const Multivector& f_at_w1,
                                          const Multivector& f_at_w2,
                                          const std::vector<double>& w1,
                                          const std::vector<double>& w2,
                                          const std::vector<double>& w,
                                          const Signature& sig) {
  std::vector<double> d(w1.size());
  double n2 = 0.0;
  for (std::size_t i = 0; i < w1.size(); ++i) {
    d[i] = w1[i] - w2[i];
    n2 += d[i] * d[i];
  }
  if (std::sqrt(n2) < 1e-8)
    throw std::domain_error("representation_formula: degenerate directions w1 ~ w2");
  Multivector inv(sig);
  for (int i = 0; i < sig.q; ++i)
    inv[BladeMask{1} << (sig.p + i)] = -d[i] / n2;

  const Multivector wm = embed_sphere_vector(w, sig);
  const Multivector w1m = embed_sphere_vector(w1, sig);
  const Multivector w2m = embed_sphere_vector(w2, sig);
  return (wm - w2m) * inv * f_at_w1 - (wm - w1m) * inv * f_at_w2;
}

}  // namespace gpsm
