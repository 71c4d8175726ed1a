#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gpsm/kernels.hpp"
#include "gpsm/operators.hpp"

namespace gpsm {

// Test corpus: fields with known membership in ker(vartheta-bar), ker(D) and
// the induced-slice class.  Tags are machine-checked at corpus build time.
enum class Tag {
  gpsm,              // vartheta-bar f = 0
  d_monogenic,       // D f = 0
  slice_induced,     // f = F1 + omega F2 for a stem (F1, F2)
  compact_support,
  holomorphic_reduction,
  negative_control,  // deliberately fails the slice structure
};

struct TaggedFunction {
  std::string name;
  FieldFunction field;
  std::set<Tag> tags;

  bool has(Tag t) const { return tags.count(t) != 0; }
};

// Fueter variable z_i = x_i - x_0 e_i; annihilated by D, and by vartheta-bar
// exactly when i <= p (no dependence on the sphere block).
inline TaggedFunction fueter_variable(int i, const Signature& sig) {
  if (i < 1 || i > sig.n())
    throw std::invalid_argument("fueter_variable: generator index out of range");
  TaggedFunction tf;
  tf.name = "fueter_z" + std::to_string(i);
  tf.field.eval = [sig, i](const Point& x) {
    Multivector m = Multivector::scalar(sig, x[i]);
    m[BladeMask{1} << (i - 1)] = -x[0];
    return m;
  };
  tf.field.partial = [sig, i](const Point&, int axis) {
    Multivector d(sig);
    if (axis == 0) d[BladeMask{1} << (i - 1)] = -1.0;
    if (axis == i) d[0] = 1.0;
    return d;
  };
  tf.tags = {Tag::d_monogenic};
  if (i <= sig.p) {
    tf.tags.insert(Tag::gpsm);
    tf.tags.insert(Tag::slice_induced);
  }
  return tf;
}

// f(x) = calE_c(x), monogenic away from the orbit [c].
inline TaggedFunction shifted_kernel(const Point& c, const Signature& sig,
                                     KernelOrientation orientation =
                                         KernelOrientation::source_minus_target) {
  const SplitPoint sc = split(c, sig);
  std::vector<double> eta =
      sc.omega ? *sc.omega : SliceEmbedding::axis(sig).eta;
  KernelParams params(sig, SliceEmbedding(eta));
  params.orientation = orientation;
  const StemPoint y = sc.stem();

  TaggedFunction tf;
  tf.name = "shifted_kernel";
  tf.field.eval = [y, params, sig](const Point& x) {
    return slice_cauchy_kernel(y, split(x, sig), params);
  };
  tf.tags = {Tag::gpsm, Tag::slice_induced};
  return tf;
}

// The orbit [c] reduces to the stem pair (c_p, +-r); domain membership is
// reflection-symmetric, so one exterior-distance query covers both.
inline void require_orbit_clear(const Point& c, const SliceDomain& D,
                                const Signature& sig, double margin = 0.0) {
  if (D.exterior_distance(split(c, sig).stem()) <= margin)
    throw std::invalid_argument("shifted_kernel: orbit [c] meets the target domain");
}

// Extension of a slice-monogenic function g on the eta-slice to the
// completion via the two-point representation combination.  g must be
// annihilated by the slice operator D_{x_p} + eta d_v (checked by finite
// differences at the supplied stem samples).
inline TaggedFunction representation_extension(const FieldFunction& g,
                                               const SliceEmbedding& eta,
                                               const Signature& sig,
                                               const std::vector<StemPoint>& precheck,
                                               double tol = 1e-6) {
  const Multivector eta_mv = embed_sphere_vector(eta.eta, sig);
  auto on_slice = [g, eta, sig](const StemPoint& sp) {
    return g.eval(embed_stem(sp, eta.eta, sig));
  };
  for (const StemPoint& sp : precheck) {
    Point anchor;
    anchor.c = sp.xp;
    anchor.c.push_back(sp.v);
    const double h = FDScheme{}.step_for(anchor);
    Multivector res = detail::stem_partial(on_slice, sp, 0, h, 2);
    for (int i = 1; i <= sig.p; ++i)
      res += Multivector::generator(sig, i) * detail::stem_partial(on_slice, sp, i, h, 2);
    res += eta_mv * detail::stem_partial(on_slice, sp, sig.p + 1, h, 2);
    if (norm(res) > tol)
      throw std::invalid_argument(
          "representation_extension: restriction fails the slice-monogenicity precheck");
  }

  TaggedFunction tf;
  tf.name = "representation_extension";
  tf.field.eval = [g, eta, eta_mv, sig](const Point& x) {
    const SplitPoint s = split(x, sig);
    const Multivector gplus = g.eval(embed_stem({s.xp, s.r}, eta.eta, sig));
    const Multivector gminus = g.eval(embed_stem({s.xp, -s.r}, eta.eta, sig));
    if (!s.omega) return gplus;
    const Multivector we = embed_sphere_vector(*s.omega, sig) * eta_mv;
    const Multivector one = Multivector::scalar(sig, 1.0);
    return 0.5 * ((one - we) * gplus) + 0.5 * ((one + we) * gminus);
  };
  tf.tags = {Tag::gpsm, Tag::slice_induced};
  return tf;
}

namespace detail {

// C-infinity profile exp(1 - 1/(1 - s)) of s = (d/R)^2, together with the
// derivative factor dphi/ds.
inline double bump_profile(double s) {
  if (s >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s));
}
inline double bump_profile_ds(double s) {
  if (s >= 1.0) return 0.0;
  const double t = 1.0 - s;
  return -bump_profile(s) / (t * t);
}

}  // namespace detail

// Smooth compactly supported slice function built from a radial stem profile:
// F1(x') = coeff * [phi(|x' - c|/R) + phi(|x' - c~|/R)] with c~ the mirror of
// the stem center, F2 = 0.  Carries analytic partial derivatives.
inline TaggedFunction bump(const StemPoint& center, double radius,
                           const Multivector& coeff, const Signature& sig,
                           const SliceDomain* domain = nullptr) {
  if (center.v < 0.0) throw std::invalid_argument("bump: center v must be >= 0");
  if (center.v != 0.0 && center.v < radius)
    throw std::invalid_argument("bump: support must clear R^{p+1}");
  if (domain != nullptr) {
    // support ball (and its mirror) must fit inside the domain
    for (int mirror : {1, -1}) {
      StemPoint probe = center;
      probe.v *= mirror;
      for (std::size_t i = 0; i <= probe.xp.size(); ++i) {
        StemPoint corner = probe;
        if (i < probe.xp.size())
          corner.xp[i] += radius;
        else
          corner.v += radius;
        if (!domain->contains(corner))
          throw std::invalid_argument("bump: support not contained in the domain");
      }
    }
  }

  auto stem_value = [center, radius](const StemPoint& sp, double& splus, double& sminus) {
    double d2p = (sp.v - center.v) * (sp.v - center.v);
    double d2m = (sp.v + center.v) * (sp.v + center.v);
    for (std::size_t i = 0; i < sp.xp.size(); ++i) {
      const double dx = sp.xp[i] - center.xp[i];
      d2p += dx * dx;
      d2m += dx * dx;
    }
    splus = d2p / (radius * radius);
    sminus = d2m / (radius * radius);
    return detail::bump_profile(splus) + detail::bump_profile(sminus);
  };

  TaggedFunction tf;
  tf.name = "bump";
  tf.field.eval = [stem_value, coeff, sig](const Point& x) {
    const StemPoint sp = split(x, sig).stem();
    double sp1, sp2;
    return coeff * stem_value(sp, sp1, sp2);
  };
  tf.field.partial = [stem_value, center, radius, coeff, sig](const Point& x, int axis) {
    const SplitPoint s = split(x, sig);
    const StemPoint sp = s.stem();
    double splus, sminus;
    stem_value(sp, splus, sminus);
    const double fp = detail::bump_profile_ds(splus);
    const double fm = detail::bump_profile_ds(sminus);
    const double R2 = radius * radius;
    auto dstem = [&](int j) {  // d F1 / d x'_j, stem axis j (j = p+1 is v)
      double gp, gm;
      if (j <= sig.p) {
        gp = gm = 2.0 * (sp.xp[j] - center.xp[j]) / R2;
      } else {
        gp = 2.0 * (sp.v - center.v) / R2;
        gm = 2.0 * (sp.v + center.v) / R2;
      }
      return fp * gp + fm * gm;
    };
    if (axis <= sig.p) return coeff * dstem(axis);
    // chain rule through r = |x_q|
    if (s.r == 0.0) return Multivector(sig);
    return coeff * (dstem(sig.p + 1) * x[axis] / s.r);
  };
  tf.field.domain = std::nullopt;
  tf.tags = {Tag::slice_induced, Tag::compact_support};
  return tf;
}

// Gaussian stem profile (smooth, not compactly supported); used for random
// ensembles.
inline TaggedFunction gaussian_bump(const StemPoint& center, double width,
                                    const Multivector& coeff, const Signature& sig) {
  if (center.v < 0.0) throw std::invalid_argument("gaussian_bump: center v must be >= 0");
  auto stem_value = [center, width](const StemPoint& sp, double& gp, double& gm) {
    double d2p = (sp.v - center.v) * (sp.v - center.v);
    double d2m = (sp.v + center.v) * (sp.v + center.v);
    for (std::size_t i = 0; i < sp.xp.size(); ++i) {
      const double dx = sp.xp[i] - center.xp[i];
      d2p += dx * dx;
      d2m += dx * dx;
    }
    gp = std::exp(-d2p / (width * width));
    gm = std::exp(-d2m / (width * width));
    return gp + gm;
  };
  TaggedFunction tf;
  tf.name = "gaussian_bump";
  tf.field.eval = [stem_value, coeff, sig](const Point& x) {
    double a, b;
    return coeff * stem_value(split(x, sig).stem(), a, b);
  };
  tf.field.partial = [stem_value, center, width, coeff, sig](const Point& x, int axis) {
    const SplitPoint s = split(x, sig);
    const StemPoint sp = s.stem();
    double gp, gm;
    stem_value(sp, gp, gm);
    const double w2 = width * width;
    auto dstem = [&](int j) {
      if (j <= sig.p)
        return (gp + gm) * (-2.0 * (sp.xp[j] - center.xp[j]) / w2);
      return gp * (-2.0 * (sp.v - center.v) / w2) + gm * (-2.0 * (sp.v + center.v) / w2);
    };
    if (axis <= sig.p) return coeff * dstem(axis);
    if (s.r == 0.0) return Multivector(sig);
    return coeff * (dstem(sig.p + 1) * x[axis] / s.r);
  };
  tf.tags = {Tag::slice_induced};
  return tf;
}

// Classical holomorphic functions lifted to the e_1 plane (p = 0, q = 1).
enum class HoloKind { power, reciprocal, exponential };

inline TaggedFunction holomorphic_reduction(HoloKind kind, const Signature& sig,
                                            int power_k = 2,
                                            std::complex<double> c = {0.0, 0.0}) {
  if (sig.p != 0 || sig.q != 1)
    throw std::invalid_argument("holomorphic_reduction: requires (p, q) = (0, 1)");
  auto w = [kind, power_k, c](std::complex<double> z) {
    switch (kind) {
      case HoloKind::power: return std::pow(z, power_k);
      case HoloKind::reciprocal: return 1.0 / (z - c);
      case HoloKind::exponential: return std::exp(z);
    }
    return std::complex<double>{};
  };
  auto dw = [kind, power_k, c](std::complex<double> z) {
    switch (kind) {
      case HoloKind::power:
        return power_k == 0 ? std::complex<double>{0.0}
                            : double(power_k) * std::pow(z, power_k - 1);
      case HoloKind::reciprocal: {
        const std::complex<double> d = z - c;
        return -1.0 / (d * d);
      }
      case HoloKind::exponential: return std::exp(z);
    }
    return std::complex<double>{};
  };
  auto lift = [sig](std::complex<double> v) {
    Multivector m = Multivector::scalar(sig, v.real());
    m[0b1] = v.imag();
    return m;
  };
  TaggedFunction tf;
  tf.name = "holomorphic";
  tf.field.eval = [w, lift](const Point& x) {
    return lift(w(std::complex<double>(x[0], x[1])));
  };
  tf.field.partial = [dw, lift](const Point& x, int axis) {
    const std::complex<double> d = dw(std::complex<double>(x[0], x[1]));
    return axis == 0 ? lift(d) : lift(d * std::complex<double>(0.0, 1.0));
  };
  tf.tags = {Tag::gpsm, Tag::slice_induced, Tag::holomorphic_reduction};
  return tf;
}

// Deliberately omega-asymmetric field: f(x) = x_{p+1} = r * omega_1.  Not a
// slice function, and not in ker(vartheta-bar).
inline TaggedFunction omega_asymmetric_control(const Signature& sig) {
  TaggedFunction tf;
  tf.name = "omega_asymmetric_control";
  tf.field.eval = [sig](const Point& x) {
    return Multivector::scalar(sig, x[sig.p + 1]);
  };
  tf.tags = {Tag::negative_control};
  return tf;
}

// ---------------------------------------------------------------------------
// Tag verification.  Each tag has a machine check; building a corpus runs all
// of them and refuses on failure.
// ---------------------------------------------------------------------------

inline double orbit_structure_violation(const FieldFunction& g, const Signature& sig,
                                        const StemPoint& base,
                                        const std::vector<double>& w,
                                        const std::vector<double>& wprime) {
  std::vector<double> wneg(w);
  for (double& v : wneg) v = -v;
  auto at = [&](const std::vector<double>& dir) {
    SplitPoint s;
    s.xp = base.xp;
    s.r = base.v;
    s.omega = dir;
    return g.eval(reassemble(s, sig));
  };
  const Multivector gplus = at(w);
  const Multivector gminus = at(wneg);
  const Multivector wmv = embed_sphere_vector(w, sig);
  const Multivector h1 = 0.5 * (gplus + gminus);
  const Multivector h2 = -0.5 * (wmv * (gplus - gminus));
  const Multivector probe = at(wprime);
  return norm(probe - h1 - embed_sphere_vector(wprime, sig) * h2);
}

struct TagCheckConfig {
  SliceDomain domain;
  std::uint64_t seed = 2024;
  int samples = 12;
  double residual_tol = 2e-5;
  double control_floor = 1e-2;
};

inline std::vector<Point> sample_completion_points(const SliceDomain& D,
                                                   const Signature& sig,
                                                   std::mt19937_64& gen, int count,
                                                   double min_r = 1e-3) {
  std::vector<double> lo, hi;
  D.bounding_box(lo, hi);
  std::vector<Point> pts;
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (static_cast<int>(pts.size()) < count) {
    StemPoint sp;
    sp.xp.resize(lo.size() - 1);
    for (std::size_t i = 0; i + 1 < lo.size(); ++i) {
      std::uniform_real_distribution<double> u(lo[i], hi[i]);
      sp.xp[i] = u(gen);
    }
    std::uniform_real_distribution<double> uv(lo.back(), hi.back());
    sp.v = std::abs(uv(gen));
    if (!D.contains(sp) || sp.v < min_r) continue;
    // random direction on S
    std::vector<double> dir(sig.q);
    double n = 0.0;
    for (double& d : dir) {
      d = gauss(gen);
      n += d * d;
    }
    n = std::sqrt(n);
    if (n < 1e-9) continue;
    for (double& d : dir) d /= n;
    SplitPoint s;
    s.xp = sp.xp;
    s.r = sp.v;
    s.omega = dir;
    pts.push_back(reassemble(s, sig));
  }
  return pts;
}

inline void verify_tags(const TaggedFunction& tf, const Signature& sig,
                        const TagCheckConfig& cfg) {
  auto gen = std::mt19937_64(cfg.seed);
  const std::vector<Point> pts =
      sample_completion_points(cfg.domain, sig, gen, cfg.samples, 0.05);
  auto fail = [&](const std::string& why) {
    throw std::runtime_error("tag check failed for '" + tf.name + "': " + why);
  };

  if (tf.has(Tag::gpsm)) {
    if (gpsm_residual(tf.field, pts, sig) > cfg.residual_tol)
      fail("gpsm residual too large");
  }
  if (tf.has(Tag::d_monogenic)) {
    for (const Point& x : pts)
      if (norm(apply_D(tf.field, x, sig)) > cfg.residual_tol) fail("D residual too large");
  }
  if (tf.has(Tag::slice_induced)) {
    for (int t = 0; t < cfg.samples; ++t) {
      const SplitPoint s = split(pts[t % pts.size()], sig);
      std::vector<double> w(sig.q), wp(sig.q);
      std::normal_distribution<double> gauss(0.0, 1.0);
      auto draw = [&](std::vector<double>& v) {
        double n = 0.0;
        for (double& d : v) {
          d = gauss(gen);
          n += d * d;
        }
        n = std::sqrt(std::max(n, 1e-12));
        for (double& d : v) d /= n;
      };
      draw(w);
      draw(wp);
      const double viol = orbit_structure_violation(tf.field, sig, s.stem(), w, wp);
      if (viol > cfg.residual_tol * 10.0) fail("slice structure violated");
    }
  }
  if (tf.has(Tag::compact_support)) {
    std::vector<double> lo, hi;
    cfg.domain.bounding_box(lo, hi);
    for (int t = 0; t < cfg.samples; ++t) {
      StemPoint sp;
      sp.xp.resize(lo.size() - 1);
      for (std::size_t i = 0; i + 1 < lo.size(); ++i) sp.xp[i] = hi[i] + 2.0 + t;
      sp.v = hi.back() + 2.0;
      if (norm(tf.field.eval(embed_stem(sp, SliceEmbedding::axis(sig).eta, sig))) != 0.0)
        fail("support leaks outside the domain");
    }
  }
  if (tf.has(Tag::negative_control)) {
    double worst = 0.0;
    for (int t = 0; t < cfg.samples; ++t) {
      const SplitPoint s = split(pts[t % pts.size()], sig);
      std::vector<double> w(sig.q), wp(sig.q);
      std::normal_distribution<double> gauss(0.0, 1.0);
      auto draw = [&](std::vector<double>& v) {
        double n = 0.0;
        for (double& d : v) {
          d = gauss(gen);
          n += d * d;
        }
        n = std::sqrt(std::max(n, 1e-12));
        for (double& d : v) d /= n;
      };
      draw(w);
      draw(wp);
      worst = std::max(worst,
                       orbit_structure_violation(tf.field, sig, s.stem(), w, wp));
    }
    if (worst < cfg.control_floor) fail("negative control unexpectedly passes");
  }
}

inline std::vector<TaggedFunction> build_corpus(const std::vector<TaggedFunction>& fns,
                                                const Signature& sig,
                                                const TagCheckConfig& cfg) {
  for (const TaggedFunction& tf : fns) verify_tags(tf, sig, cfg);
  return fns;
}

}  // namespace gpsm
