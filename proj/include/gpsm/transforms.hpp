#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpsm/functions.hpp"
#include "gpsm/quadrature.hpp"

namespace gpsm {

// ---------------------------------------------------------------------------
// Boundary integrals on a slice.
//
// All slice-local formulas (Cauchy integral, Cauchy-Pompeiu, exterior
// theorem, Plemelj limits) integrate the unweighted partial-slice kernel
// against the slice surface/volume measures.  The completion-weighted kernel
// K belongs to the fibered (full-volume) operators below, where the fiber
// jacobian |y_q|^{q-1} cancels its weight.
// ---------------------------------------------------------------------------

struct BoundaryData {
  FieldFunction f;    // evaluable at the embedded boundary points
  QuadRule rule;      // stem-coordinate boundary rule with outward normals
  KernelParams params;
};

inline BoundaryData make_boundary_data(const FieldFunction& f, const SliceDomain& D,
                                       const KernelParams& params, int n) {
  return BoundaryData{f, boundary_rule(D, n), params};
}

// Quadrature realization of int calE_y(x) n(y) f(y) dS_eta(y).
inline Multivector cauchy_boundary_integral(const BoundaryData& bd, const Point& x) {
  const Signature& sig = bd.params.sig;
  const SplitPoint xs = split(x, sig);
  const StemPoint orbit_plus{xs.xp, xs.r};
  const StemPoint orbit_minus{xs.xp, -xs.r};

  std::vector<Multivector> contrib;
  contrib.reserve(bd.rule.size());
  for (std::size_t i = 0; i < bd.rule.size(); ++i) {
    StemPoint y;
    y.xp.assign(bd.rule.nodes[i].begin(), bd.rule.nodes[i].end() - 1);
    y.v = bd.rule.nodes[i].back();
    const double dist = std::min(stem_distance(y, orbit_plus),
                                 stem_distance(y, orbit_minus));
    if (dist < 1e-12) {
      std::ostringstream msg;
      msg << "cauchy_boundary_integral: node " << i
          << " coincides with a singular configuration of x";
      throw std::domain_error(msg.str());
    }
    Multivector nrm(sig);
    nrm[0] = bd.rule.normals[i][0];
    for (int k = 1; k <= sig.p; ++k)
      nrm[BladeMask{1} << (k - 1)] = bd.rule.normals[i][k];
    const double nv = bd.rule.normals[i].back();
    for (int k = 0; k < sig.q; ++k) {
      const double c = nv * bd.params.eta.eta[k];
      if (c != 0.0) nrm[BladeMask{1} << (sig.p + k)] += c;
    }
    const Multivector kernel = slice_cauchy_kernel(y, xs, bd.params);
    const Multivector fval = bd.f.eval(embed_stem(y, bd.params.eta.eta, sig));
    contrib.push_back(kernel * nrm * fval * bd.rule.weights[i]);
  }
  return pairwise_sum(contrib, sig);
}

// Exterior-domain Cauchy integral: same quadrature, stated for a surface
// whose normal points into the exterior component.  For f monogenic in the
// exterior with limit f(inf), the value is -f(x) + f(inf) outside and f(inf)
// inside.
inline Multivector exterior_cauchy(const BoundaryData& bd, const Point& x) {
  return cauchy_boundary_integral(bd, x);
}

// Experimental completion reading of the Cauchy integral formula: the
// boundary of Omega_D carries the fibered surface measure
// |y_q|^{q-1} dS_eta dS(eta), against the weighted kernel K.  This is the
// half-sphere average of the slice boundary integrals, so it reproduces f(x)
// for f in ker vartheta-bar; provided as a flagged variant, not the default.
inline Multivector fibered_cauchy_integral(const FieldFunction& f, const SliceDomain& D,
                                           const Signature& sig, const Point& x,
                                           int n_eta, int n_boundary,
                                           KernelOrientation orientation =
                                               KernelOrientation::source_minus_target) {
  const QuadRule half = hemisphere_rule(sig.q, n_eta);
  const QuadRule bnd = boundary_rule(D, n_boundary);
  const SplitPoint xs = split(x, sig);
  std::vector<Multivector> contrib;
  contrib.reserve(half.size() * bnd.size());
  for (std::size_t e = 0; e < half.size(); ++e) {
    for (std::size_t i = 0; i < bnd.size(); ++i) {
      StemPoint y;
      y.xp.assign(bnd.nodes[i].begin(), bnd.nodes[i].end() - 1);
      y.v = bnd.nodes[i].back();
      const Multivector K =
          weighted_cauchy_kernel(y, half.nodes[e], xs, sig, orientation);
      Multivector nrm(sig);
      nrm[0] = bnd.normals[i][0];
      for (int k = 1; k <= sig.p; ++k)
        nrm[BladeMask{1} << (k - 1)] = bnd.normals[i][k];
      for (int k = 0; k < sig.q; ++k) {
        const double c = bnd.normals[i].back() * half.nodes[e][k];
        if (c != 0.0) nrm[BladeMask{1} << (sig.p + k)] += c;
      }
      const double jac = std::pow(std::abs(y.v), sig.q - 1);
      const Multivector fv = f.eval(embed_stem(y, half.nodes[e], sig));
      contrib.push_back(K * nrm * fv * (half.weights[e] * bnd.weights[i] * jac));
    }
  }
  return 2.0 * pairwise_sum(contrib, sig);
}

// ---------------------------------------------------------------------------
// Cauchy-Pompeiu reconstruction on a slice domain.
// ---------------------------------------------------------------------------

struct CauchyPompeiuResult {
  Multivector reconstruction;
  Multivector boundary_term;
  Multivector volume_term;
  SingularIntegral volume_detail;
};

struct CauchyPompeiuOptions {
  int n_boundary = 64;
  int n_volume = 48;
  int angular_factor = 4;  // volume rule must out-resolve the exclusion radii
  std::vector<double> delta_schedule{0.16, 0.1, 0.06};
  FDScheme scheme{};
  bool use_analytic_derivatives = true;
};

// f(x) = int_{dU_eta} calE_y(x) n(y) f(y) dS(y)
//        - int_{U_eta} calE_y(x) (vartheta-bar f)(y) dsigma(y)
// for continuously differentiable slice functions f and x in the completion
// of U.  vartheta-bar f is evaluated analytically when the field carries
// partial derivatives, by central differences otherwise.
inline CauchyPompeiuResult cauchy_pompeiu(const FieldFunction& f, const SliceDomain& D,
                                          const KernelParams& params, const Point& x,
                                          const CauchyPompeiuOptions& opt = {}) {
  const Signature& sig = params.sig;
  if (!completion_contains(D, x, sig))
    throw std::domain_error("cauchy_pompeiu: x must lie inside the domain completion");

  const BoundaryData bd{f, boundary_rule(D, opt.n_boundary), params};
  const Multivector boundary = cauchy_boundary_integral(bd, x);

  const QuadRule vol = slice_volume_rule(D, opt.n_volume, opt.angular_factor);
  std::vector<StemPoint> stem(vol.size());
  for (std::size_t i = 0; i < vol.size(); ++i) {
    stem[i].xp.assign(vol.nodes[i].begin(), vol.nodes[i].end() - 1);
    stem[i].v = vol.nodes[i].back();
  }
  const SplitPoint xs = split(x, sig);
  const std::vector<StemPoint> singular{{xs.xp, xs.r}, {xs.xp, -xs.r}};
  const bool analytic = opt.use_analytic_derivatives && f.partial != nullptr;

  auto integrand = [&](std::size_t i) {
    const Point y = embed_stem(stem[i], params.eta.eta, sig);
    const Multivector df = analytic ? apply_vartheta_bar_analytic(f, y, sig)
                                    : apply_vartheta_bar(f, y, sig, opt.scheme);
    return slice_cauchy_kernel(stem[i], xs, params) * df;
  };
  CauchyPompeiuResult out{Multivector(sig), boundary, Multivector(sig),
                          SingularIntegral{Multivector(sig), Multivector(sig), {}, {}}};
  // the kernel is odd around its singularity, so the excluded-tube integral
  // scales like delta^2
  out.volume_detail = singular_volume_integral_nodes(stem, vol.weights, integrand,
                                                     singular, opt.delta_schedule, sig,
                                                     2.0);
  out.volume_term = out.volume_detail.extrapolated;
  out.reconstruction = boundary - out.volume_term;
  return out;
}

// ---------------------------------------------------------------------------
// Plemelj-Sokhotski boundary limits.
// ---------------------------------------------------------------------------

struct ApproachPath {
  Point boundary_point;           // must coincide with a boundary rule node
  std::vector<double> distances;  // decreasing normal offsets

  static ApproachPath geometric(Point boundary_point, double d0 = 0.4,
                                double ratio = 0.5, int count = 6) {
    ApproachPath p;
    p.boundary_point = std::move(boundary_point);
    double d = d0;
    for (int i = 0; i < count; ++i, d *= ratio) p.distances.push_back(d);
    return p;
  }
};

struct PlemeljResult {
  Multivector inner;      // limit from U_eta^+
  Multivector outer;      // limit from U_eta^-
  Multivector principal;  // singular-node-excluded boundary integral
  std::vector<Multivector> inner_seq, outer_seq;
};

namespace detail {

inline void check_path_convergence(const std::vector<Multivector>& seq,
                                   const char* side) {
  if (seq.size() < 3) return;
  // the raw sequence must be settling: the final gap must not dominate the
  // earlier ones, unless everything sits at the quadrature noise floor
  double scale = 1.0;
  for (const Multivector& v : seq) scale = std::max(scale, norm(v));
  double prev = 0.0;
  for (std::size_t i = 1; i + 1 < seq.size(); ++i)
    prev = std::max(prev, norm(seq[i] - seq[i - 1]));
  const double last = norm(seq[seq.size() - 1] - seq[seq.size() - 2]);
  if (last > 1.5 * prev && last > 1e-4 * scale) {
    std::ostringstream msg;
    msg << "plemelj_limits: non-tangential limit from " << side
        << " fails the ratio test; gaps:";
    for (std::size_t i = 1; i < seq.size(); ++i)
      msg << " " << norm(seq[i] - seq[i - 1]);
    throw std::runtime_error(msg.str());
  }
}

}  // namespace detail

// Principal value by symmetric node exclusion: drop the nodes nearest to the
// boundary point and extrapolate the excluded boundary measure to zero (the
// leading error of the excluded smooth part is linear in it).
inline Multivector principal_value_boundary(const BoundaryData& bd,
                                            std::size_t node_index, int levels = 3) {
  const Signature& sig = bd.params.sig;
  const std::size_t n = bd.rule.size();
  StemPoint x0;
  x0.xp.assign(bd.rule.nodes[node_index].begin(), bd.rule.nodes[node_index].end() - 1);
  x0.v = bd.rule.nodes[node_index].back();
  const SplitPoint xs = split(embed_stem(x0, bd.params.eta.eta, sig), sig);

  // distances from every node to the singular node
  std::vector<double> dist(n);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    StemPoint y;
    y.xp.assign(bd.rule.nodes[i].begin(), bd.rule.nodes[i].end() - 1);
    y.v = bd.rule.nodes[i].back();
    dist[i] = stem_distance(y, x0);
    order[i] = i;
  }
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });

  // contributions of all nodes except the singular one
  std::vector<Multivector> contrib(n, Multivector(sig));
  for (std::size_t i = 0; i < n; ++i) {
    if (i == node_index) continue;
    StemPoint y;
    y.xp.assign(bd.rule.nodes[i].begin(), bd.rule.nodes[i].end() - 1);
    y.v = bd.rule.nodes[i].back();
    Multivector nrm(sig);
    nrm[0] = bd.rule.normals[i][0];
    for (int k = 1; k <= sig.p; ++k)
      nrm[BladeMask{1} << (k - 1)] = bd.rule.normals[i][k];
    for (int k = 0; k < sig.q; ++k) {
      const double c = bd.rule.normals[i].back() * bd.params.eta.eta[k];
      if (c != 0.0) nrm[BladeMask{1} << (sig.p + k)] += c;
    }
    const Multivector kernel = slice_cauchy_kernel(y, xs, bd.params);
    const Multivector fv = bd.f.eval(embed_stem(y, bd.params.eta.eta, sig));
    contrib[i] = kernel * nrm * fv * bd.rule.weights[i];
  }

  // level k excludes the 2k+1 nearest nodes (symmetric about x0 on uniform
  // rules); abscissa = excluded boundary measure
  std::vector<double> ts;
  std::vector<Multivector> vs;
  for (int k = 0; k < levels; ++k) {
    const std::size_t excluded = std::min<std::size_t>(2 * k + 1, n);
    double t = 0.0;
    std::vector<bool> drop(n, false);
    for (std::size_t j = 0; j < excluded; ++j) {
      drop[order[j]] = true;
      t += bd.rule.weights[order[j]];
    }
    std::vector<Multivector> kept;
    kept.reserve(n - excluded);
    for (std::size_t i = 0; i < n; ++i)
      if (!drop[i]) kept.push_back(contrib[i]);
    ts.push_back(t);
    vs.push_back(pairwise_sum(kept, sig));
  }
  return neville_extrapolate(ts, vs);
}

// Non-tangential limits of the Cauchy-type integral from the two sides of
// dU_eta, plus the principal-value boundary integral; the Plemelj identities
// are inner = f/2 + PV and outer = -f/2 + PV.
inline PlemeljResult plemelj_limits(const BoundaryData& bd, const ApproachPath& path) {
  const Signature& sig = bd.params.sig;
  // locate the boundary node the path is anchored at
  const SplitPoint ps = split(path.boundary_point, sig);
  std::size_t idx = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < bd.rule.size(); ++i) {
    StemPoint y;
    y.xp.assign(bd.rule.nodes[i].begin(), bd.rule.nodes[i].end() - 1);
    y.v = bd.rule.nodes[i].back();
    // the anchored stem point has v of the same sign as the node
    StemPoint target{ps.xp, y.v >= 0.0 ? ps.r : -ps.r};
    const double d = stem_distance(y, target);
    if (d < best) {
      best = d;
      idx = i;
    }
  }
  if (best > 1e-8)
    throw std::invalid_argument(
        "plemelj_limits: the boundary point must coincide with a rule node");

  StemPoint x0;
  x0.xp.assign(bd.rule.nodes[idx].begin(), bd.rule.nodes[idx].end() - 1);
  x0.v = bd.rule.nodes[idx].back();
  const std::vector<double>& nrm = bd.rule.normals[idx];

  // The boundary rule cannot resolve the kernel at offsets below its own
  // node spacing; trim the path there instead of extrapolating noise.
  double spacing = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < bd.rule.size(); ++i) {
    if (i == idx) continue;
    StemPoint y;
    y.xp.assign(bd.rule.nodes[i].begin(), bd.rule.nodes[i].end() - 1);
    y.v = bd.rule.nodes[i].back();
    spacing = std::min(spacing, stem_distance(y, x0));
  }
  std::vector<double> distances;
  for (double d : path.distances)
    if (d >= 1.5 * spacing) distances.push_back(d);
  if (distances.size() < 3)
    throw std::invalid_argument(
        "plemelj_limits: approach path finer than the boundary rule; "
        "increase the rule resolution or start farther out");

  PlemeljResult out{Multivector(sig), Multivector(sig), Multivector(sig), {}, {}};
  for (double d : distances) {
    StemPoint tin = x0, tout = x0;
    for (std::size_t k = 0; k + 1 < nrm.size(); ++k) {
      tin.xp[k] -= d * nrm[k];
      tout.xp[k] += d * nrm[k];
    }
    tin.v -= d * nrm.back();
    tout.v += d * nrm.back();
    out.inner_seq.push_back(
        cauchy_boundary_integral(bd, embed_stem(tin, bd.params.eta.eta, sig)));
    out.outer_seq.push_back(
        cauchy_boundary_integral(bd, embed_stem(tout, bd.params.eta.eta, sig)));
  }
  detail::check_path_convergence(out.inner_seq, "inside");
  detail::check_path_convergence(out.outer_seq, "outside");
  out.inner = neville_extrapolate(distances, out.inner_seq);
  out.outer = neville_extrapolate(distances, out.outer_seq);
  out.principal = principal_value_boundary(bd, idx);
  return out;
}

// ---------------------------------------------------------------------------
// Teodorescu transform.
//
// Fibered (full-volume) form over the completion:
//   T f(x) = -2 int_{Omega_D} K_y(x) f(y) dV(y)
// where the fibered measure dV = |y_q|^{q-1} dsigma_eta dS(eta) over the half
// sphere cancels the weight of K, so T is the half-sphere average of the
// slice-volume transforms  T_eta f(x) = -int_{Omega_eta} calE_y(x) f dsigma.
// The factor 2 (one over the normalized half-sphere measure) is fixed by the
// q = 1 planar case, where T must reduce to the classical Teodorescu
// transform for the left-inverse property T(vartheta-bar f) = f to hold.
// ---------------------------------------------------------------------------

struct TeodorescuResult {
  Multivector value;
  SingularIntegral detail;
};

inline TeodorescuResult teodorescu_with_detail(
    const FieldFunction& f, const FiberedRule& rule, const Point& x,
    const std::vector<double>& delta_schedule,
    KernelOrientation orientation = KernelOrientation::source_minus_target) {
  const Signature& sig = rule.sig;
  const SplitPoint xs = split(x, sig);
  if (!xs.omega)
    throw std::domain_error("teodorescu: x lies on the singular set R^{p+1}");
  const std::vector<StemPoint> singular{{xs.xp, xs.r}, {xs.xp, -xs.r}};

  auto integrand = [&](std::size_t i) {
    const Multivector K = weighted_cauchy_kernel(
        rule.stem[i], rule.etas[rule.eta_of[i]], xs, sig, orientation);
    return K * f.eval(rule.points[i]);
  };
  TeodorescuResult out{Multivector(sig),
                       SingularIntegral{Multivector(sig), Multivector(sig), {}, {}}};
  // odd kernel: the excluded-tube integral scales like delta^2
  out.detail = singular_volume_integral_nodes(rule.stem, rule.weights, integrand,
                                              singular, delta_schedule, sig, 2.0);
  out.detail.value *= -2.0;
  out.detail.extrapolated *= -2.0;
  for (Multivector& m : out.detail.per_delta) m *= -2.0;
  out.value = out.detail.extrapolated;
  return out;
}

inline Multivector teodorescu(const FieldFunction& f, const FiberedRule& rule,
                              const Point& x, const std::vector<double>& delta_schedule,
                              KernelOrientation orientation =
                                  KernelOrientation::source_minus_target) {
  return teodorescu_with_detail(f, rule, x, delta_schedule, orientation).value;
}

// Slice-volume Teodorescu transform on a fixed slice,
//   T_eta f(x) = -int_{Omega_eta} calE_y(x) f(y) dsigma_eta(y);
// coincides with the fibered transform at q = 1 and for slice functions.
inline Multivector slice_teodorescu(const FieldFunction& f, const SliceDomain& D,
                                    const KernelParams& params, const Point& x,
                                    int n_volume,
                                    const std::vector<double>& delta_schedule,
                                    int angular_factor = 4) {
  const Signature& sig = params.sig;
  const QuadRule vol = slice_volume_rule(D, n_volume, angular_factor);
  std::vector<StemPoint> stem(vol.size());
  for (std::size_t i = 0; i < vol.size(); ++i) {
    stem[i].xp.assign(vol.nodes[i].begin(), vol.nodes[i].end() - 1);
    stem[i].v = vol.nodes[i].back();
  }
  const SplitPoint xs = split(x, sig);
  const std::vector<StemPoint> singular{{xs.xp, xs.r}, {xs.xp, -xs.r}};
  auto integrand = [&](std::size_t i) {
    return slice_cauchy_kernel(stem[i], xs, params) *
           f.eval(embed_stem(stem[i], params.eta.eta, sig));
  };
  const auto res = singular_volume_integral_nodes(stem, vol.weights, integrand,
                                                  singular, delta_schedule, sig, 2.0);
  return -res.extrapolated;
}

// Max gpsm residual of x -> T f(x) over points strictly outside the closure
// of Omega_D (where no exclusion mask changes under the stencil).
inline double teodorescu_monogenicity_check(const FieldFunction& f,
                                            const FiberedRule& rule,
                                            const SliceDomain& D,
                                            const std::vector<Point>& points,
                                            const FDScheme& scheme,
                                            const std::vector<double>& delta_schedule) {
  const Signature& sig = rule.sig;
  for (const Point& x : points) {
    const StemPoint sp = split(x, sig).stem();
    if (D.exterior_distance(sp) <= 0.0)
      throw std::invalid_argument(
          "teodorescu_monogenicity_check: point not outside the closure");
  }
  FieldFunction tf([&](const Point& x) {
    return teodorescu(f, rule, x, delta_schedule);
  });
  return gpsm_residual(tf, points, sig, scheme);
}

// ---------------------------------------------------------------------------
// L^t norm-estimate experiment.
// ---------------------------------------------------------------------------

struct LtParams {
  double t;

  explicit LtParams(double t_) : t(t_) {
    if (t <= 1.0) throw std::invalid_argument("LtParams: t must exceed 1");
  }
  double conjugate() const { return t / (t - 1.0); }
  bool existence_valid(const Signature& sig) const { return t > sig.q; }
  bool estimate_valid(const Signature& sig) const {
    return sig.q > 1 && t > std::max(2.0 * sig.p - 1.0, 2.0 * sig.q - 1.0);
  }
};

struct NormEstimateResult {
  std::vector<double> ratios;      // ||T f||_t / ||f||_t per ensemble member
  double max_ratio = 0.0;
  std::vector<std::size_t> skipped;  // members with vanishing norm
};

// Computes ||T f||_{L^t(Omega_D)} / ||f||_{L^t(Omega_D)} for every ensemble
// member with one shared kernel evaluation per (outer node, inner node) pair.
// Both norms use the same fibered outer rule.
inline NormEstimateResult norm_estimate_experiment(
    const std::vector<FieldFunction>& ensemble, const FiberedRule& outer,
    const FiberedRule& inner, const LtParams& lt,
    const std::vector<double>& delta_schedule,
    const std::function<void(std::size_t, std::size_t)>& progress = {}) {
  const Signature& sig = outer.sig;
  if (!lt.existence_valid(sig))
    throw std::invalid_argument("norm_estimate_experiment: requires t > q");
  if (!lt.estimate_valid(sig))
    throw std::invalid_argument(
        "norm_estimate_experiment: requires q > 1 and t > max(2p-1, 2q-1)");
  for (std::size_t k = 1; k < delta_schedule.size(); ++k)
    if (!(delta_schedule[k] < delta_schedule[k - 1]))
      throw std::invalid_argument("norm_estimate_experiment: bad delta schedule");

  const std::size_t M = ensemble.size();
  const std::size_t K = delta_schedule.size();

  // member values at the inner nodes
  std::vector<std::vector<Multivector>> fvals(M);
  for (std::size_t m = 0; m < M; ++m) {
    fvals[m].reserve(inner.size());
    for (std::size_t j = 0; j < inner.size(); ++j)
      fvals[m].push_back(ensemble[m].eval(inner.points[j]));
  }

  // |T f_m|^t and |f_m|^t per outer node
  std::vector<std::vector<double>> tpow(M, std::vector<double>(outer.size(), 0.0));
  std::vector<std::vector<double>> fpow(M, std::vector<double>(outer.size(), 0.0));

  for (std::size_t i = 0; i < outer.size(); ++i) {
    const SplitPoint xs = split(outer.points[i], sig);
    const StemPoint oplus{xs.xp, xs.r};
    const StemPoint ominus{xs.xp, -xs.r};

    std::vector<std::vector<Multivector>> acc(
        M, std::vector<Multivector>(K, Multivector(sig)));
    std::vector<double> excluded(K, 0.0);
    for (std::size_t j = 0; j < inner.size(); ++j) {
      const double dist = std::min(stem_distance(inner.stem[j], oplus),
                                   stem_distance(inner.stem[j], ominus));
      for (std::size_t k = 0; k < K; ++k)
        if (dist <= delta_schedule[k]) excluded[k] += inner.weights[j];
      if (dist <= delta_schedule.back()) continue;
      const Multivector K_ij =
          weighted_cauchy_kernel(inner.stem[j], inner.etas[inner.eta_of[j]], xs, sig) *
          inner.weights[j];
      for (std::size_t m = 0; m < M; ++m) {
        const Multivector term = K_ij * fvals[m][j];
        for (std::size_t k = 0; k < K; ++k)
          if (dist > delta_schedule[k]) acc[m][k] += term;
      }
    }
    // abscissa calibrated from the excluded measure, as in
    // singular_volume_integral_nodes (stem dimension p + 2, odd kernel
    // exponent 2)
    const double stem_dim = sig.p + 2.0;
    const double t1 = K >= 2 ? std::pow(excluded[K - 2], 2.0 / stem_dim) : 0.0;
    const double t2 = std::pow(excluded[K - 1], 2.0 / stem_dim);
    for (std::size_t m = 0; m < M; ++m) {
      Multivector tf(sig);
      if (K >= 2 && t1 - t2 > 1e-300) {
        tf = acc[m][K - 1] + (t2 / (t1 - t2)) * (acc[m][K - 1] - acc[m][K - 2]);
      } else {
        tf = acc[m][K - 1];
      }
      tf *= -2.0;
      tpow[m][i] = std::pow(norm(tf), lt.t) * outer.weights[i];
      fpow[m][i] = std::pow(norm(ensemble[m].eval(outer.points[i])), lt.t) *
                   outer.weights[i];
    }
    if (progress) progress(i + 1, outer.size());
  }

  NormEstimateResult out;
  for (std::size_t m = 0; m < M; ++m) {
    const double fn = std::pow(pairwise_sum(fpow[m]), 1.0 / lt.t);
    if (fn < 1e-14) {
      out.skipped.push_back(m);
      continue;
    }
    const double tn = std::pow(pairwise_sum(tpow[m]), 1.0 / lt.t);
    out.ratios.push_back(tn / fn);
    out.max_ratio = std::max(out.max_ratio, tn / fn);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Slice-structure (orbit) consistency of a field.
// ---------------------------------------------------------------------------

struct OrbitTriple {
  StemPoint base;                // (x_p, r)
  std::vector<double> w;         // direction used for the stem reconstruction
  std::vector<double> w_check;   // third direction tested against it
};

// Max over triples of |g(x_{w''}) - H1 - w'' H2| with H1, H2 reconstructed
// from g at +-w; normalized by the largest sampled |g|.
inline double slice_preservation_check(const FieldFunction& g, const Signature& sig,
                                       const std::vector<OrbitTriple>& triples) {
  double worst = 0.0;
  double scale = 0.0;
  for (const OrbitTriple& tr : triples) {
    std::vector<double> wneg(tr.w);
    for (double& v : wneg) v = -v;
    auto at = [&](const std::vector<double>& dir) {
      SplitPoint s;
      s.xp = tr.base.xp;
      s.r = tr.base.v;
      s.omega = dir;
      return g.eval(reassemble(s, sig));
    };
    const Multivector gplus = at(tr.w);
    const Multivector gminus = at(wneg);
    const Multivector probe = at(tr.w_check);
    const Multivector h1 = 0.5 * (gplus + gminus);
    const Multivector h2 =
        -0.5 * (embed_sphere_vector(tr.w, sig) * (gplus - gminus));
    const Multivector predicted = h1 + embed_sphere_vector(tr.w_check, sig) * h2;
    worst = std::max(worst, norm(probe - predicted));
    scale = std::max({scale, norm(gplus), norm(gminus), norm(probe)});
  }
  if (scale == 0.0) return 0.0;
  return worst / scale;
}

inline double slice_preservation_check(const FieldFunction& f, const FiberedRule& rule,
                                       const std::vector<double>& delta_schedule,
                                       const std::vector<OrbitTriple>& triples) {
  FieldFunction tf([&](const Point& x) {
    return teodorescu(f, rule, x, delta_schedule);
  });
  return slice_preservation_check(tf, rule.sig, triples);
}

}  // namespace gpsm
