#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gpsm/operators.hpp"

namespace gpsm {

// Surface area of the unit sphere S^{m-1} in R^m: 2 pi^{m/2} / Gamma(m/2).
// Note the argument convention: sphere_area(p+2) is the sigma_{p+1} of the
// monogenic Cauchy kernel, sphere_area(q) the sigma_{q-1} of the weighted
// kernel.  sphere_area(1) = 2 counts the two-point sphere S^0.
inline double sphere_area(int m) {
  if (m < 1) throw std::invalid_argument("sphere_area: dimension must be >= 1");
  return 2.0 * std::pow(M_PI, 0.5 * m) / std::tgamma(0.5 * m);
}

// Direction eta in S subset R^q selecting the slice R^{p+1} + eta R.
struct SliceEmbedding {
  std::vector<double> eta;

  SliceEmbedding() = default;
  explicit SliceEmbedding(std::vector<double> e) : eta(std::move(e)) {
    const double n = euclidean_norm(eta);
    if (std::abs(n - 1.0) > 1e-12)
      throw std::invalid_argument("SliceEmbedding: eta must be a unit vector");
  }

  // e_{p+1} axis direction
  static SliceEmbedding axis(const Signature& sig) {
    std::vector<double> e(sig.q, 0.0);
    e[0] = 1.0;
    return SliceEmbedding(std::move(e));
  }
};

// E_y(x) is read as E(y - x) by default; the complex reduction of the Cauchy
// integral formula (which must reproduce f, not -f) pins this choice.
enum class KernelOrientation { source_minus_target, target_minus_source };

struct KernelParams {
  Signature sig;
  SliceEmbedding eta;
  KernelOrientation orientation = KernelOrientation::source_minus_target;

  KernelParams(Signature s, SliceEmbedding e) : sig(s), eta(std::move(e)) {}
};

// Monogenic Cauchy kernel on the slice, E(z) = conj(z) / (sigma_{p+1} |z|^{p+2})
// for the slice paravector z = z_0 + z_1 e_1 + ... + z_p e_p + v eta, computed
// inside R_{p+q} (eta is a 1-vector, so conjugation negates it).
inline Multivector cauchy_kernel(const StemPoint& z, const KernelParams& params) {
  const Signature& sig = params.sig;
  double n2 = z.v * z.v;
  for (double u : z.xp) n2 += u * u;
  if (n2 == 0.0) throw std::domain_error("cauchy_kernel: evaluated at the singularity");
  const double mag = std::sqrt(n2);
  const double scale = 1.0 / (sphere_area(sig.p + 2) * std::pow(mag, sig.p + 2));
  Multivector out = Multivector::scalar(sig, z.xp[0] * scale);
  for (int i = 1; i <= sig.p; ++i) out[BladeMask{1} << (i - 1)] = -z.xp[i] * scale;
  for (int i = 0; i < sig.q; ++i) {
    const double c = -z.v * params.eta.eta[i] * scale;
    if (c != 0.0) out[BladeMask{1} << (sig.p + i)] += c;
  }
  return out;
}

namespace detail {

inline StemPoint kernel_argument(const StemPoint& y, const StemPoint& z,
                                 KernelOrientation orientation) {
  StemPoint d;
  d.xp.resize(y.xp.size());
  if (orientation == KernelOrientation::source_minus_target) {
    for (std::size_t i = 0; i < y.xp.size(); ++i) d.xp[i] = y.xp[i] - z.xp[i];
    d.v = y.v - z.v;
  } else {
    for (std::size_t i = 0; i < y.xp.size(); ++i) d.xp[i] = z.xp[i] - y.xp[i];
    d.v = z.v - y.v;
  }
  return d;
}

}  // namespace detail

// Partial-slice Cauchy kernel
//   calE_y(x) = 1/2 (1 - omega eta) E_y(x_p + r eta) + 1/2 (1 + omega eta) E_y(x_p - r eta)
// with (x_p, r, omega) the split of x and y given in slice coordinates
// (y_p, v) on the eta-slice (v may be signed).  Singular exactly on the
// orbit [y].
inline Multivector slice_cauchy_kernel(const StemPoint& y, const SplitPoint& x,
                                       const KernelParams& params) {
  const Signature& sig = params.sig;
  const StemPoint xplus{x.xp, x.r};
  if (!x.omega || x.r == 0.0) {
    // both arguments coincide and the coefficients sum to 1
    return cauchy_kernel(detail::kernel_argument(y, xplus, params.orientation), params);
  }
  const StemPoint xminus{x.xp, -x.r};
  const Multivector eplus =
      cauchy_kernel(detail::kernel_argument(y, xplus, params.orientation), params);
  const Multivector eminus =
      cauchy_kernel(detail::kernel_argument(y, xminus, params.orientation), params);
  const Multivector we = embed_sphere_vector(*x.omega, sig) *
                         embed_sphere_vector(params.eta.eta, sig);
  const Multivector one = Multivector::scalar(sig, 1.0);
  return 0.5 * ((one - we) * eplus) + 0.5 * ((one + we) * eminus);
}

inline Multivector slice_cauchy_kernel(const StemPoint& y, const Point& x,
                                       const KernelParams& params) {
  return slice_cauchy_kernel(y, split(x, params.sig), params);
}

// Weighted kernel K_y(x) = calE_y(x) / (sigma_{q-1} |y_q|^{q-1}) for a source
// point y of R^{p+q+1}; the slice direction is the one of y itself.
inline Multivector weighted_cauchy_kernel(const StemPoint& y_stem,
                                          const std::vector<double>& y_eta,
                                          const SplitPoint& x,
                                          const Signature& sig,
                                          KernelOrientation orientation =
                                              KernelOrientation::source_minus_target) {
  const double rq = std::abs(y_stem.v);
  if (sig.q > 1 && rq == 0.0)
    throw std::domain_error("weighted_cauchy_kernel: source on R^{p+1} weight singularity");
  KernelParams params(sig, SliceEmbedding(y_eta));
  params.orientation = orientation;
  const double w = sphere_area(sig.q) * std::pow(rq, sig.q - 1);
  return slice_cauchy_kernel(y_stem, x, params) / w;
}

inline Multivector weighted_cauchy_kernel(const Point& y, const Point& x,
                                          const Signature& sig,
                                          KernelOrientation orientation =
                                              KernelOrientation::source_minus_target) {
  const SplitPoint sy = split(y, sig);
  if (!sy.omega)
    throw std::domain_error("weighted_cauchy_kernel: source on R^{p+1} weight singularity");
  return weighted_cauchy_kernel(sy.stem(), *sy.omega, split(x, sig), sig, orientation);
}

}  // namespace gpsm
