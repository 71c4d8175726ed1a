#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "gpsm/kernels.hpp"

namespace gpsm {

// ---------------------------------------------------------------------------
// Deterministic summation.  All integration loops reduce with a fixed
// pairwise tree, so results do not depend on how work is split over threads.
// ---------------------------------------------------------------------------

namespace detail {

template <typename T, typename Add>
T pairwise_sum_impl(const std::vector<T>& v, std::size_t lo, std::size_t hi, Add add) {
  if (hi - lo <= 8) {
    T s = v[lo];
    for (std::size_t i = lo + 1; i < hi; ++i) add(s, v[i]);
    return s;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  T s = pairwise_sum_impl(v, lo, mid, add);
  T t = pairwise_sum_impl(v, mid, hi, add);
  add(s, t);
  return s;
}

}  // namespace detail

inline double pairwise_sum(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return detail::pairwise_sum_impl(v, 0, v.size(), [](double& a, double b) { a += b; });
}

inline Multivector pairwise_sum(const std::vector<Multivector>& v, const Signature& sig) {
  if (v.empty()) return Multivector(sig);
  return detail::pairwise_sum_impl(
      v, 0, v.size(), [](Multivector& a, const Multivector& b) { a += b; });
}

// ---------------------------------------------------------------------------
// Rules.  Nodes are generic coordinate tuples; boundary rules also carry
// outward unit normals in the same coordinates.
// ---------------------------------------------------------------------------

struct QuadRule {
  std::vector<std::vector<double>> nodes;
  std::vector<double> weights;
  std::vector<std::vector<double>> normals;  // empty unless a boundary rule

  std::size_t size() const { return nodes.size(); }
  double total_weight() const { return pairwise_sum(weights); }
};

// n-point Gauss-Legendre rule on [a, b], exact for polynomials of degree
// <= 2n-1.  Nodes by Newton iteration on P_n.
inline QuadRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  if (!(a < b)) throw std::invalid_argument("gauss_legendre: need a < b");
  QuadRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // recurrence for P_n(x) and P'_n(x)
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = {x};
    rule.weights[i] = w;
    rule.nodes[n - 1 - i] = {-x};
    rule.weights[n - 1 - i] = w;
  }
  // affine map to [a, b]
  const double mid = 0.5 * (a + b), hl = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i][0] = mid + hl * rule.nodes[i][0];
    rule.weights[i] *= hl;
  }
  return rule;
}

// Rule on the unit sphere S^{m-1} in R^m.  m = 1 is the two-point sphere S^0;
// m = 2 the (shifted) trapezoid rule on the circle, spectrally accurate;
// m >= 3 product Gauss-Legendre (polar) x trapezoid (azimuthal).  Angular
// node counts are rounded up to even so no node sits on the equator and
// hemisphere restriction is exact.
inline QuadRule sphere_rule(int m, int n) {
  if (n < 1) throw std::invalid_argument("sphere_rule: n must be >= 1");
  QuadRule rule;
  switch (m) {
    case 1:
      rule.nodes = {{1.0}, {-1.0}};
      rule.weights = {1.0, 1.0};
      return rule;
    case 2: {
      const int nn = n + (n & 1);
      for (int j = 0; j < nn; ++j) {
        const double th = 2.0 * M_PI * (j + 0.5) / nn;
        rule.nodes.push_back({std::cos(th), std::sin(th)});
        rule.weights.push_back(2.0 * M_PI / nn);
      }
      return rule;
    }
    case 3: {
      const int np = n + (n & 1);
      const QuadRule polar = gauss_legendre(np, -1.0, 1.0);
      const int na = 2 * np;
      for (int i = 0; i < np; ++i) {
        const double u = polar.nodes[i][0];
        const double s = std::sqrt(std::max(0.0, 1.0 - u * u));
        for (int j = 0; j < na; ++j) {
          const double th = 2.0 * M_PI * (j + 0.5) / na;
          rule.nodes.push_back({s * std::cos(th), s * std::sin(th), u});
          rule.weights.push_back(polar.weights[i] * 2.0 * M_PI / na);
        }
      }
      return rule;
    }
    case 4: {
      // x = (sin(chi) s, cos(chi)), s in S^2; dS = sin^2(chi) dchi dS^2
      const int nc = std::max(n + (n & 1), 16);
      const QuadRule chi = gauss_legendre(nc, 0.0, M_PI);
      const QuadRule s2 = sphere_rule(3, n);
      for (int i = 0; i < nc; ++i) {
        const double c = chi.nodes[i][0];
        const double sc = std::sin(c), cc = std::cos(c);
        for (std::size_t j = 0; j < s2.size(); ++j) {
          rule.nodes.push_back({sc * s2.nodes[j][0], sc * s2.nodes[j][1],
                                sc * s2.nodes[j][2], cc});
          rule.weights.push_back(chi.weights[i] * sc * sc * s2.weights[j]);
        }
      }
      return rule;
    }
    default:
      throw std::invalid_argument("sphere_rule: unsupported dimension");
  }
}

// Nodes of sphere_rule with positive last coordinate, weights unchanged
// (total = half the sphere measure; exactly one point remains of S^0).
inline QuadRule hemisphere_rule(int m, int n) {
  const QuadRule full = sphere_rule(m, n);
  QuadRule half;
  for (std::size_t i = 0; i < full.size(); ++i) {
    if (full.nodes[i].back() > 0.0) {
      half.nodes.push_back(full.nodes[i]);
      half.weights.push_back(full.weights[i]);
    }
  }
  return half;
}

namespace detail {

// Duplicate a stem-coordinate rule with the mirror image v -> -v; boundary
// normals flip their v component.
inline void append_mirror(QuadRule& rule, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) {
    auto node = rule.nodes[i];
    node.back() = -node.back();
    rule.nodes.push_back(node);
    rule.weights.push_back(rule.weights[i]);
    if (!rule.normals.empty()) {
      auto nrm = rule.normals[i];
      nrm.back() = -nrm.back();
      rule.normals.push_back(nrm);
    }
  }
}

inline QuadRule box_face_rule(const std::vector<double>& lo, const std::vector<double>& hi,
                              int n) {
  // tensor Gauss-Legendre over all faces of the box [lo, hi]
  const int m = static_cast<int>(lo.size());
  QuadRule rule;
  std::vector<QuadRule> axis(m);
  for (int k = 0; k < m; ++k) axis[k] = gauss_legendre(n, lo[k], hi[k]);
  for (int k = 0; k < m; ++k) {
    for (int side = 0; side < 2; ++side) {
      // iterate the tensor product over the other axes
      std::vector<int> idx(m, 0);
      while (true) {
        std::vector<double> node(m);
        double w = 1.0;
        for (int a = 0; a < m; ++a) {
          if (a == k) {
            node[a] = side == 0 ? lo[a] : hi[a];
          } else {
            node[a] = axis[a].nodes[idx[a]][0];
            w *= axis[a].weights[idx[a]];
          }
        }
        std::vector<double> nrm(m, 0.0);
        nrm[k] = side == 0 ? -1.0 : 1.0;
        rule.nodes.push_back(std::move(node));
        rule.normals.push_back(std::move(nrm));
        rule.weights.push_back(w);
        int a = 0;
        for (; a < m; ++a) {
          if (a == k) continue;
          if (++idx[a] < n) break;
          idx[a] = 0;
        }
        if (a == m) break;
      }
    }
  }
  return rule;
}

}  // namespace detail

// Nodes with outward unit normals on the stem boundary of D (all mirrored
// components included).  Normals are stem vectors (n_0, ..., n_p, n_v); the
// embedding n = sum n_i e_i + n_v eta happens at integration time.
inline QuadRule boundary_rule(const SliceDomain& D, int n) {
  const int m = D.stem_dim();
  if (m < 2 || m > 4)
    throw std::invalid_argument("boundary_rule: unsupported stem dimension");
  QuadRule rule;
  switch (D.kind()) {
    case DomainKind::box: {
      std::vector<double> lo(m), hi(m);
      for (int k = 0; k < m; ++k) {
        lo[k] = D.center()[k] - D.halfwidth()[k];
        hi[k] = D.center()[k] + D.halfwidth()[k];
      }
      rule = detail::box_face_rule(lo, hi, n);
      break;
    }
    case DomainKind::ball:
    case DomainKind::annulus: {
      const QuadRule sph = sphere_rule(m, n);
      auto add_sphere = [&](double radius, double orient) {
        const double jac = std::pow(radius, m - 1);
        for (std::size_t i = 0; i < sph.size(); ++i) {
          std::vector<double> node(m), nrm(m);
          for (int k = 0; k < m; ++k) {
            node[k] = D.center()[k] + radius * sph.nodes[i][k];
            nrm[k] = orient * sph.nodes[i][k];
          }
          rule.nodes.push_back(std::move(node));
          rule.normals.push_back(std::move(nrm));
          rule.weights.push_back(jac * sph.weights[i]);
        }
      };
      add_sphere(D.radius(), +1.0);
      if (D.kind() == DomainKind::annulus) add_sphere(D.inner_radius(), -1.0);
      break;
    }
  }
  if (D.mirrored()) detail::append_mirror(rule, rule.size());
  return rule;
}

// Volume rule over the stem region of D (mirrored components included):
// tensor Gauss-Legendre on boxes, polar product on balls and annuli.  The
// angular factor widens the sphere part of polar rules; integrands with
// near-singular exclusion zones need the angular spacing to stay below the
// smallest exclusion radius.
inline QuadRule slice_volume_rule(const SliceDomain& D, int n, int angular_factor = 2) {
  const int m = D.stem_dim();
  if (m < 2 || m > 4)
    throw std::invalid_argument("slice_volume_rule: unsupported stem dimension");
  QuadRule rule;
  switch (D.kind()) {
    case DomainKind::box: {
      std::vector<QuadRule> axis(m);
      for (int k = 0; k < m; ++k)
        axis[k] = gauss_legendre(n, D.center()[k] - D.halfwidth()[k],
                                 D.center()[k] + D.halfwidth()[k]);
      std::vector<int> idx(m, 0);
      while (true) {
        std::vector<double> node(m);
        double w = 1.0;
        for (int a = 0; a < m; ++a) {
          node[a] = axis[a].nodes[idx[a]][0];
          w *= axis[a].weights[idx[a]];
        }
        rule.nodes.push_back(std::move(node));
        rule.weights.push_back(w);
        int a = 0;
        for (; a < m; ++a) {
          if (++idx[a] < n) break;
          idx[a] = 0;
        }
        if (a == m) break;
      }
      break;
    }
    case DomainKind::ball:
    case DomainKind::annulus: {
      const double r0 = D.kind() == DomainKind::annulus ? D.inner_radius() : 0.0;
      const QuadRule radial = gauss_legendre(n, r0, D.radius());
      const QuadRule sph =
          sphere_rule(m, m == 2 ? angular_factor * n : angular_factor * n / 2);
      for (int i = 0; i < n; ++i) {
        const double rr = radial.nodes[i][0];
        const double jac = std::pow(rr, m - 1);
        for (std::size_t j = 0; j < sph.size(); ++j) {
          std::vector<double> node(m);
          for (int k = 0; k < m; ++k) node[k] = D.center()[k] + rr * sph.nodes[j][k];
          rule.nodes.push_back(std::move(node));
          rule.weights.push_back(radial.weights[i] * jac * sph.weights[j]);
        }
      }
      break;
    }
  }
  if (D.mirrored()) detail::append_mirror(rule, rule.size());
  return rule;
}

// ---------------------------------------------------------------------------
// Fibered rule over the completion Omega_D, realizing
//   int_{Omega_D} g dV = int_{S^+} int_{Omega_eta} g(y) |y_q|^{q-1} dsigma_eta(y) dS(eta)
// with hemisphere nodes carrying their true surface weights (sum = |S|/2) and
// the slice rule covering both signed-v components.  Every point of Omega_D
// is hit exactly once, so constants integrate to vol(Omega_D).  For q = 1 the
// hemisphere of S^0 is the single direction +e_{p+1} with weight 1 and the
// rule degenerates to the plain slice rule.
// ---------------------------------------------------------------------------

struct FiberedRule {
  Signature sig;
  std::vector<std::vector<double>> etas;
  std::vector<double> eta_weights;
  std::vector<StemPoint> stem;    // flattened: one entry per (eta, slice node)
  std::vector<Point> points;      // embedded in R^{p+q+1}
  std::vector<double> weights;    // w_eta * w_slice * |v|^{q-1}
  std::vector<int> eta_of;

  FiberedRule(Signature s) : sig(s) {}
  std::size_t size() const { return stem.size(); }
  double volume() const { return pairwise_sum(weights); }
};

inline FiberedRule fibered_volume_rule(const SliceDomain& D, const Signature& sig,
                                       int n_eta, int n_slice, int angular_factor = 2) {
  if (sig.q > 1 && D.clearance() <= 0.0)
    throw std::invalid_argument(
        "fibered_volume_rule: domain must clear R^{p+1} when q > 1");
  FiberedRule rule(sig);
  const QuadRule half = hemisphere_rule(sig.q, n_eta);
  const QuadRule slice = slice_volume_rule(D, n_slice, angular_factor);
  rule.etas = half.nodes;
  rule.eta_weights = half.weights;
  rule.stem.reserve(half.size() * slice.size());
  for (std::size_t e = 0; e < half.size(); ++e) {
    for (std::size_t j = 0; j < slice.size(); ++j) {
      StemPoint sp;
      sp.xp.assign(slice.nodes[j].begin(), slice.nodes[j].end() - 1);
      sp.v = slice.nodes[j].back();
      const double jac = std::pow(std::abs(sp.v), sig.q - 1);
      rule.points.push_back(embed_stem(sp, half.nodes[e], sig));
      rule.stem.push_back(std::move(sp));
      rule.weights.push_back(half.weights[e] * slice.weights[j] * jac);
      rule.eta_of.push_back(static_cast<int>(e));
    }
  }
  return rule;
}

// ---------------------------------------------------------------------------
// Singular volume integration: integrate over the rule minus tubular
// neighborhoods of radius delta around the singular stem points, for each
// delta of a decreasing schedule, then extrapolate delta -> 0 with the known
// leading exponent (the excluded mass of |y - c|^{-(p+1)} in R^{p+2} scales
// like delta).
// ---------------------------------------------------------------------------

struct SingularIntegral {
  Multivector value;         // finest delta
  Multivector extrapolated;  // limit estimate
  std::vector<double> deltas;
  std::vector<Multivector> per_delta;
};

template <typename Integrand>  // Multivector(std::size_t node_index)
SingularIntegral singular_volume_integral_nodes(
    const std::vector<StemPoint>& stem, const std::vector<double>& weights,
    Integrand g, const std::vector<StemPoint>& singular_points,
    const std::vector<double>& schedule, const Signature& sig,
    double exponent = 1.0) {
  for (std::size_t k = 1; k < schedule.size(); ++k)
    if (!(schedule[k] < schedule[k - 1]) || schedule[k] <= 0.0)
      throw std::invalid_argument(
          "singular_volume_integral: schedule must be positive and decreasing");

  const double coarsest = schedule.empty() ? 0.0 : schedule.front();
  const double finest = schedule.empty() ? 0.0 : schedule.back();
  std::vector<double> dist(stem.size(), std::numeric_limits<double>::infinity());
  if (!singular_points.empty()) {
    for (std::size_t i = 0; i < stem.size(); ++i)
      for (const StemPoint& c : singular_points)
        dist[i] = std::min(dist[i], stem_distance(stem[i], c));
  }

  std::vector<Multivector> contrib;
  std::vector<double> cdist;
  contrib.reserve(stem.size());
  for (std::size_t i = 0; i < stem.size(); ++i) {
    if (dist[i] <= finest) continue;
    contrib.push_back(g(i) * weights[i]);
    cdist.push_back(dist[i]);
  }

  SingularIntegral out{Multivector(sig), Multivector(sig), {}, {}};
  if (schedule.empty()) {
    out.value = pairwise_sum(contrib, sig);
    out.extrapolated = out.value;
    return out;
  }

  // On a fixed rule the effective exclusion radius is quantized to node
  // positions, so the extrapolation abscissa is calibrated from the measured
  // excluded measure: mass ~ V delta^m in the stem dimension m, hence
  // t = (excluded mass)^{alpha/m} makes I(t) linear for kernels whose
  // excluded integral scales like delta^alpha (constants cancel in the fit).
  const double stem_dim = stem.empty() ? 2.0 : stem[0].xp.size() + 1.0;
  std::vector<Multivector> kept;
  std::vector<double> abscissa;
  kept.reserve(contrib.size());
  for (double delta : schedule) {
    kept.clear();
    double excluded = 0.0;
    for (std::size_t i = 0; i < stem.size(); ++i)
      if (dist[i] <= delta) excluded += weights[i];
    for (std::size_t i = 0; i < contrib.size(); ++i)
      if (cdist[i] > delta) kept.push_back(contrib[i]);
    if (kept.empty() && delta == coarsest)
      throw std::domain_error("singular_volume_integral: exclusion swallows the domain");
    out.deltas.push_back(delta);
    abscissa.push_back(std::pow(std::max(excluded, 0.0), exponent / stem_dim));
    out.per_delta.push_back(pairwise_sum(kept, sig));
  }
  out.value = out.per_delta.back();
  const std::size_t K = out.per_delta.size() - 1;
  if (out.per_delta.size() >= 2 && abscissa[K - 1] - abscissa[K] > 1e-300) {
    const double t1 = abscissa[K - 1], t2 = abscissa[K];
    // linear extrapolation through the last two values
    out.extrapolated =
        out.per_delta[K] + (t2 / (t1 - t2)) * (out.per_delta[K] - out.per_delta[K - 1]);
  } else {
    out.extrapolated = out.value;
  }
  return out;
}

// Domain-level form: integrates g over the stem region of D minus tubular
// neighborhoods of the singular stem points, then extrapolates.
inline SingularIntegral singular_volume_integral(
    const std::function<Multivector(const StemPoint&)>& g, const SliceDomain& D,
    const Signature& sig, const std::vector<StemPoint>& singular_points,
    const std::vector<double>& schedule, int n_volume, double exponent = 1.0,
    int angular_factor = 2) {
  const QuadRule vol = slice_volume_rule(D, n_volume, angular_factor);
  std::vector<StemPoint> stem(vol.size());
  for (std::size_t i = 0; i < vol.size(); ++i) {
    stem[i].xp.assign(vol.nodes[i].begin(), vol.nodes[i].end() - 1);
    stem[i].v = vol.nodes[i].back();
  }
  return singular_volume_integral_nodes(
      stem, vol.weights, [&](std::size_t i) { return g(stem[i]); }, singular_points,
      schedule, sig, exponent);
}

// Polynomial (Neville) extrapolation of values v(t_k) to t = 0.
inline Multivector neville_extrapolate(const std::vector<double>& ts,
                                       std::vector<Multivector> vs) {
  if (ts.size() != vs.size() || vs.empty())
    throw std::invalid_argument("neville_extrapolate: bad input");
  const std::size_t n = vs.size();
  for (std::size_t level = 1; level < n; ++level)
    for (std::size_t i = 0; i + level < n; ++i) {
      const double ti = ts[i], tj = ts[i + level];
      vs[i] = (tj * vs[i] - ti * vs[i + 1]) / (tj - ti);
    }
  return vs[0];
}

}  // namespace gpsm
