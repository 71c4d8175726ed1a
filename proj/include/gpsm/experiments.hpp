#pragma once

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gpsm/parallel.hpp"
#include "gpsm/report.hpp"
#include "gpsm/transforms.hpp"

namespace gpsm {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct DomainSpec {
  std::string kind = "auto";  // auto | ball | box | annulus
  std::vector<double> center;
  std::vector<double> halfwidth;
  double radius = 0.0;
  double inner_radius = 0.0;

  // "auto": a centered unit disc for q = 1 (the classical-plane experiments
  // live across the axis), a mirrored stem ball with clearance for q > 1.
  SliceDomain build(const Signature& sig) const {
    if (kind == "auto") {
      std::vector<double> c(sig.p + 2, 0.0);
      if (sig.q == 1) return SliceDomain::ball(c, 1.0);
      c.back() = 1.0;
      return SliceDomain::ball(c, 0.45);
    }
    if (kind == "ball") return SliceDomain::ball(center, radius);
    if (kind == "box") return SliceDomain::box(center, halfwidth);
    if (kind == "annulus") return SliceDomain::annulus(center, inner_radius, radius);
    throw std::invalid_argument("DomainSpec: unknown kind '" + kind + "'");
  }

  // "kind;center=a,b;radius=r" / "kind;center=..;halfwidth=..;" /
  // "kind;center=..;inner=..;outer=.."
  static DomainSpec parse(const std::string& text) {
    DomainSpec spec;
    std::stringstream ss(text);
    std::string item;
    bool first = true;
    auto parse_list = [](const std::string& s) {
      std::vector<double> out;
      std::stringstream ls(s);
      std::string tok;
      while (std::getline(ls, tok, ',')) out.push_back(std::stod(tok));
      return out;
    };
    while (std::getline(ss, item, ';')) {
      if (first) {
        spec.kind = item;
        first = false;
        continue;
      }
      const auto eq = item.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("DomainSpec: expected key=value in '" + item + "'");
      const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
      if (key == "center")
        spec.center = parse_list(val);
      else if (key == "halfwidth")
        spec.halfwidth = parse_list(val);
      else if (key == "radius" || key == "outer")
        spec.radius = std::stod(val);
      else if (key == "inner")
        spec.inner_radius = std::stod(val);
      else
        throw std::invalid_argument("DomainSpec: unknown key '" + key + "'");
    }
    return spec;
  }

  nlohmann::json to_json() const {
    return {{"kind", kind},     {"center", center},         {"halfwidth", halfwidth},
            {"radius", radius}, {"inner", inner_radius}};
  }
  static DomainSpec from_json(const nlohmann::json& j) {
    DomainSpec d;
    d.kind = j.value("kind", "auto");
    d.center = j.value("center", std::vector<double>{});
    d.halfwidth = j.value("halfwidth", std::vector<double>{});
    d.radius = j.value("radius", 0.0);
    d.inner_radius = j.value("inner", 0.0);
    return d;
  }
};

struct ExperimentConfig {
  int p = 0;
  int q = 1;
  DomainSpec domain;
  int res_boundary = 64;
  int res_slice = 32;
  int res_eta = 12;
  int fd_order = 2;
  double fd_step = 0.0;   // 0 = auto
  double tol_scale = 1.0;
  std::uint64_t seed = 20240801;
  std::vector<double> delta_schedule;  // empty = derived from the domain scale

  Signature signature() const { return Signature(p, q); }
  SliceDomain stem_domain() const { return domain.build(signature()); }
  FDScheme scheme() const { return FDScheme{fd_order, fd_step}; }

  double domain_scale() const {
    const SliceDomain D = stem_domain();
    if (D.kind() == DomainKind::box) {
      double h = D.halfwidth()[0];
      for (double v : D.halfwidth()) h = std::min(h, v);
      return h;
    }
    return D.radius();
  }

  std::vector<double> schedule() const {
    if (!delta_schedule.empty()) return delta_schedule;
    const double R = domain_scale();
    return {R / 3.0, R * 0.4 / 3.0, R * 0.16 / 3.0};
  }

  nlohmann::json to_json() const {
    return {{"p", p},
            {"q", q},
            {"domain", domain.to_json()},
            {"res_boundary", res_boundary},
            {"res_slice", res_slice},
            {"res_eta", res_eta},
            {"fd_order", fd_order},
            {"fd_step", fd_step},
            {"tol_scale", tol_scale},
            {"seed", seed},
            {"delta_schedule", delta_schedule}};
  }
  static ExperimentConfig from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.p = j.value("p", 0);
    c.q = j.value("q", 1);
    if (j.contains("domain")) c.domain = DomainSpec::from_json(j["domain"]);
    c.res_boundary = j.value("res_boundary", 64);
    c.res_slice = j.value("res_slice", 32);
    c.res_eta = j.value("res_eta", 12);
    c.fd_order = j.value("fd_order", 2);
    c.fd_step = j.value("fd_step", 0.0);
    c.tol_scale = j.value("tol_scale", 1.0);
    c.seed = j.value("seed", std::uint64_t{20240801});
    c.delta_schedule = j.value("delta_schedule", std::vector<double>{});
    return c;
  }
  std::string hash() const { return fnv1a_hex(to_json().dump()); }
};

// ---------------------------------------------------------------------------
// Small shared helpers
// ---------------------------------------------------------------------------

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                     start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline void add_record(Report& rep, const std::string& suite, const std::string& name,
                       nlohmann::json values, double tol, bool pass, double ms) {
  rep.records.push_back(Record{suite, name, std::move(values), tol, pass, ms});
}

inline std::vector<double> random_direction(int dim, std::mt19937_64& gen) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(dim);
  double n = 0.0;
  do {
    n = 0.0;
    for (double& x : v) {
      x = g(gen);
      n += x * x;
    }
  } while (n < 1e-12);
  n = std::sqrt(n);
  for (double& x : v) x /= n;
  return v;
}

inline Multivector random_mv(const Signature& sig, std::mt19937_64& gen, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Multivector m(sig);
  for (BladeMask b = 0; b < m.size(); ++b) m[b] = u(gen);
  return m;
}

// Spearman rank correlation against the index order.
inline double spearman_against_index(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[order[r]] = static_cast<double>(r);
  double d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) d2 += (rank[i] - i) * (rank[i] - i);
  return 1.0 - 6.0 * d2 / (static_cast<double>(n) * (n * n - 1.0));
}

// Random polynomial stem with the required parity.
inline StemFunction random_polynomial_stem(const Signature& sig, const SliceDomain& D,
                                           std::mt19937_64& gen) {
  struct Term {
    Multivector coeff;
    std::vector<int> xp_pow;
    int v_pow;
  };
  auto make_terms = [&](bool odd) {
    std::uniform_int_distribution<int> e(0, 2);
    std::vector<Term> terms;
    for (int k = 0; k < 3; ++k) {
      Term t{random_mv(sig, gen, 1.0), std::vector<int>(sig.p + 1), 0};
      for (int& pw : t.xp_pow) pw = e(gen);
      t.v_pow = 2 * e(gen) + (odd ? 1 : 0);
      terms.push_back(std::move(t));
    }
    return terms;
  };
  auto component = [sig](std::vector<Term> terms) {
    return StemComponent([terms = std::move(terms), sig](const StemPoint& sp) {
      Multivector out(sig);
      for (const Term& t : terms) {
        double c = std::pow(sp.v, t.v_pow);
        for (std::size_t j = 0; j < t.xp_pow.size(); ++j)
          c *= std::pow(sp.xp[j], t.xp_pow[j]);
        out += t.coeff * c;
      }
      return out;
    });
  };
  return StemFunction{component(make_terms(false)), component(make_terms(true)), D};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

inline void algebra_selftest(const ExperimentConfig& cfg, Report& rep) {
  const detail::Stopwatch clock;
  const Signature sig = cfg.signature();
  auto gen = std::mt19937_64(cfg.seed);
  const double tol = 1e-12 * cfg.tol_scale;

  // anticommutation is exact on the blade level
  double anti = 0.0;
  for (int i = 1; i <= sig.n(); ++i) {
    const Multivector ei = Multivector::generator(sig, i);
    anti = std::max(anti,
                    max_abs_diff(ei * ei, Multivector::scalar(sig, -1.0)));
    for (int j = i + 1; j <= sig.n(); ++j) {
      const Multivector ej = Multivector::generator(sig, j);
      anti = std::max(anti, max_abs_diff(ei * ej + ej * ei, Multivector(sig)));
    }
  }

  double assoc = 0.0, antiauto = 0.0, inverse = 0.0, norm_id = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Multivector a = detail::random_mv(sig, gen, 1.0);
    const Multivector b = detail::random_mv(sig, gen, 1.0);
    const Multivector c = detail::random_mv(sig, gen, 1.0);
    const double scale = std::max(1.0, norm(a) * norm(b) * norm(c));
    assoc = std::max(assoc, max_abs_diff((a * b) * c, a * (b * c)) / scale);
    const double pscale = std::max(1.0, norm(a) * norm(b));
    antiauto = std::max(
        antiauto, max_abs_diff(conjugate(a * b), conjugate(b) * conjugate(a)) / pscale);
    antiauto = std::max(
        antiauto, max_abs_diff(reverse(a * b), reverse(b) * reverse(a)) / pscale);

    Paravector x;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    x.x0 = u(gen);
    x.vec.resize(sig.n());
    for (double& v : x.vec) v = u(gen);
    if (norm(x) < 1e-3) continue;
    const Multivector xm = x.to_multivector(sig);
    norm_id = std::max(norm_id,
                       std::abs(scalar_part(xm * conjugate(xm)) - norm(x) * norm(x)));
    inverse = std::max(
        inverse, max_abs_diff(xm * paravector_inverse(x).to_multivector(sig),
                              Multivector::scalar(sig, 1.0)));
  }

  const bool pass = anti == 0.0 && assoc <= tol && antiauto <= tol &&
                    inverse <= tol && norm_id <= tol;
  detail::add_record(rep, "algebra-selftest",
                     "p" + std::to_string(sig.p) + "q" + std::to_string(sig.q),
                     {{"anticommutation", anti},
                      {"associativity", assoc},
                      {"anti_automorphism", antiauto},
                      {"inverse", inverse},
                      {"norm_identity", norm_id}},
                     tol, pass, clock.ms());
}

inline void representation_suite(const ExperimentConfig& cfg, Report& rep) {
  const detail::Stopwatch clock;
  const Signature sig = cfg.signature();
  const SliceDomain D = SliceDomain::box(std::vector<double>(sig.p + 2, 0.0),
                                         std::vector<double>(sig.p + 2, 3.0));
  auto gen = std::mt19937_64(cfg.seed + 1);
  const double tol = 1e-12 * cfg.tol_scale;

  double worst = 0.0;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> ur(0.2, 1.5);
  for (int t = 0; t < 100; ++t) {
    const StemFunction F = detail::random_polynomial_stem(sig, D, gen);
    StemPoint sp;
    sp.xp.resize(sig.p + 1);
    for (double& v : sp.xp) v = u(gen);
    sp.v = ur(gen);

    const auto w = detail::random_direction(sig.q, gen);
    auto w1 = detail::random_direction(sig.q, gen);
    auto w2 = detail::random_direction(sig.q, gen);
    double sep = 0.0;
    for (int i = 0; i < sig.q; ++i) sep += (w1[i] - w2[i]) * (w1[i] - w2[i]);
    if (std::sqrt(sep) < 1e-3) continue;

    auto at = [&](const std::vector<double>& dir) {
      SplitPoint s;
      s.xp = sp.xp;
      s.r = sp.v;
      s.omega = dir;
      return induce(F, reassemble(s, sig), sig);
    };
    const Multivector expect = at(w);
    const Multivector got = representation_formula(at(w1), at(w2), w1, w2, w, sig);
    worst = std::max(worst,
                     max_abs_diff(got, expect) / std::max(1.0, norm(expect)));
  }
  detail::add_record(rep, "representation",
                     "p" + std::to_string(sig.p) + "q" + std::to_string(sig.q),
                     {{"max_error", worst}, {"cases", 100}}, tol, worst <= tol,
                     clock.ms());
}

inline void kernel_residual_suite(const ExperimentConfig& cfg, Report& rep) {
  const detail::Stopwatch clock;
  const Signature sig = cfg.signature();
  auto gen = std::mt19937_64(cfg.seed + 2);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::uniform_real_distribution<double> uv(0.8, 1.3);

  // random source on a random slice
  StemPoint y;
  y.xp.resize(sig.p + 1);
  for (double& v : y.xp) v = u(gen);
  y.v = uv(gen);
  KernelParams params(sig, SliceEmbedding(detail::random_direction(sig.q, gen)));
  FieldFunction kernel_field([y, params, sig](const Point& x) {
    return slice_cauchy_kernel(y, split(x, sig), params);
  });

  // 50 points clear of the orbit and of R^{p+1}
  std::vector<Point> pts;
  const StemPoint orbit{y.xp, std::abs(y.v)};
  while (pts.size() < 50) {
    Point x;
    x.c.resize(sig.point_dim());
    for (double& v : x.c) v = u(gen);
    const SplitPoint s = split(x, sig);
    if (s.r < 0.35) continue;
    if (stem_distance(s.stem(), orbit) < 0.6) continue;
    pts.push_back(x);
  }

  const double base_step = cfg.fd_step > 0.0 ? cfg.fd_step : 5e-4;
  const std::vector<double> steps{4.0 * base_step, 2.0 * base_step, base_step};
  std::vector<double> residual(steps.size(), 0.0);
  std::vector<std::vector<double>> per_point(steps.size(),
                                             std::vector<double>(pts.size()));
  parallel_for(pts.size(), [&](std::size_t i) {
    for (std::size_t k = 0; k < steps.size(); ++k)
      per_point[k][i] =
          norm(apply_vartheta_bar(kernel_field, pts[i], sig,
                                  FDScheme{cfg.fd_order, steps[k]}));
  });
  for (std::size_t k = 0; k < steps.size(); ++k)
    residual[k] = *std::max_element(per_point[k].begin(), per_point[k].end());

  const double order1 = observed_order(residual[0], residual[1]);
  const double order2 = observed_order(residual[1], residual[2]);
  const double tol = 1e-6 * cfg.tol_scale;
  const bool pass = residual.back() <= tol && std::abs(order1 - 2.0) <= 0.3 &&
                    std::abs(order2 - 2.0) <= 0.3;
  detail::add_record(rep, "kernel-residual",
                     "p" + std::to_string(sig.p) + "q" + std::to_string(sig.q),
                     {{"residual_finest", residual.back()},
                      {"residuals", residual},
                      {"order_coarse", order1},
                      {"order_fine", order2}},
                     tol, pass, clock.ms());
}

inline void require_signature(const ExperimentConfig& cfg, int p, int q,
                              const char* suite) {
  if (cfg.p != p || cfg.q != q)
    throw std::invalid_argument(std::string(suite) + " requires --p " +
                                std::to_string(p) + " --q " + std::to_string(q));
}

inline void cauchy_suite(const ExperimentConfig& cfg, Report& rep) {
  require_signature(cfg, 0, 1, "cauchy-verify");
  const detail::Stopwatch clock;
  const Signature sig = cfg.signature();
  const SliceDomain D = cfg.stem_domain();
  const KernelParams params(sig, SliceEmbedding::axis(sig));
  auto gen = std::mt19937_64(cfg.seed + 3);

  const std::complex<double> pole(1.7, 0.4);
  const std::vector<TaggedFunction> cases{
      holomorphic_reduction(HoloKind::power, sig, 2),
      holomorphic_reduction(HoloKind::reciprocal, sig, 0, pole)};

  double worst = 0.0;
  std::uniform_real_distribution<double> u(-0.72, 0.72);
  for (const TaggedFunction& tf : cases) {
    const BoundaryData bd = make_boundary_data(tf.field, D, params, cfg.res_boundary);
    int accepted = 0;
    while (accepted < 20) {
      const Point x{u(gen), u(gen)};
      if (euclidean_norm(x.c) > 0.75) continue;
      ++accepted;
      const Multivector got = cauchy_boundary_integral(bd, x);
      worst = std::max(worst, max_abs_diff(got, tf.field.eval(x)));
    }
  }
  const double tol = 1e-8 * cfg.tol_scale;
  detail::add_record(rep, "cauchy-verify", "complex-reduction",
                     {{"max_error", worst}, {"nodes", cfg.res_boundary}}, tol,
                     worst <= tol, clock.ms());
}

inline void exterior_suite(const ExperimentConfig& cfg, Report& rep) {
  require_signature(cfg, 0, 1, "exterior-verify");
  const detail::Stopwatch clock;
  const Signature sig = cfg.signature();
  const SliceDomain D = cfg.stem_domain();  // unit circle
  const KernelParams params(sig, SliceEmbedding::axis(sig));
  auto gen = std::mt19937_64(cfg.seed + 4);

  double worst = 0.0;

  // constant f: 0 outside, c inside
  const Multivector c = detail::random_mv(sig, gen, 1.0);
  FieldFunction constf([c](const Point&) { return c; });
  const BoundaryData bdc = make_boundary_data(constf, D, params, cfg.res_boundary);
  const Point x_out{1.7, 0.6};
  const Point x_in{0.2, -0.1};
  worst = std::max(worst, norm(exterior_cauchy(bdc, x_out)));
  worst = std::max(worst, max_abs_diff(exterior_cauchy(bdc, x_in), c));

  // f = 1/(z - c) with the pole inside: f(inf) = 0, exterior value -f(x)
  const std::complex<double> pole(0.3, -0.2);
  const TaggedFunction recip =
      holomorphic_reduction(HoloKind::reciprocal, sig, 0, pole);
  const BoundaryData bdr = make_boundary_data(recip.field, D, params, cfg.res_boundary);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    Point x{1.4 + 0.8 * std::abs(u(gen)), 1.1 * u(gen)};
    const Multivector got = exterior_cauchy(bdr, x);
    worst = std::max(worst, max_abs_diff(got, -recip.field.eval(x)));
  }
  const double tol = 1e-8 * cfg.tol_scale;
  detail::add_record(rep, "exterior-verify", "complex-reduction",
                     {{"max_error", worst}}, tol, worst <= tol, clock.ms());
}

inline void plemelj_suite(const ExperimentConfig& cfg, Report& rep) {
  require_signature(cfg, 0, 1, "plemelj-verify");
  const detail::Stopwatch clock;
  const Signature sig = cfg.signature();
  const SliceDomain D = cfg.stem_domain();
  const KernelParams params(sig, SliceEmbedding::axis(sig));
  const int n = std::max(cfg.res_boundary, 256);

  // boundary cases with classical Sokhotski values:
  //   f = z:        inner = x,       outer = 0,         PV = x/2
  //   f = conj(z):  inner = 0,       outer = -conj(x),  PV = -conj(x)/2
  //   f = exp(z):   inner = exp(x),  outer = 0,         PV = exp(x)/2
  struct Case {
    std::string name;
    std::function<std::complex<double>(std::complex<double>)> f;
    std::function<std::complex<double>(std::complex<double>)> inner;
    std::function<std::complex<double>(std::complex<double>)> outer;
  };
  const std::vector<Case> cases{
      {"z", [](std::complex<double> z) { return z; },
       [](std::complex<double> x) { return x; },
       [](std::complex<double>) { return std::complex<double>(0.0); }},
      {"conj", [](std::complex<double> z) { return std::conj(z); },
       [](std::complex<double>) { return std::complex<double>(0.0); },
       [](std::complex<double> x) { return -std::conj(x); }},
      {"exp", [](std::complex<double> z) { return std::exp(z); },
       [](std::complex<double> x) { return std::exp(x); },
       [](std::complex<double>) { return std::complex<double>(0.0); }}};

  double worst = 0.0;
  for (const Case& cs : cases) {
    FieldFunction f([&cs, sig](const Point& x) {
      const std::complex<double> v = cs.f(std::complex<double>(x[0], x[1]));
      Multivector m = Multivector::scalar(sig, v.real());
      m[0b1] = v.imag();
      return m;
    });
    const BoundaryData bd = make_boundary_data(f, D, params, n);
    // anchor at the boundary node nearest (1, 0)
    std::size_t idx = 0;
    double best = 1e30;
    for (std::size_t i = 0; i < bd.rule.size(); ++i) {
      const double dx = bd.rule.nodes[i][0] - 1.0, dv = bd.rule.nodes[i][1];
      if (dx * dx + dv * dv < best) {
        best = dx * dx + dv * dv;
        idx = i;
      }
    }
    const std::complex<double> x(bd.rule.nodes[idx][0], bd.rule.nodes[idx][1]);
    const Point anchor{x.real(), x.imag()};
    const PlemeljResult res =
        plemelj_limits(bd, ApproachPath::geometric(anchor, 0.35, 0.5, 6));

    auto cerr2 = [&](const Multivector& got, std::complex<double> expect) {
      return std::hypot(scalar_part(got) - expect.real(), got[0b1] - expect.imag()) /
             std::max(1.0, std::abs(expect));
    };
    const std::complex<double> inner = cs.inner(x), outer = cs.outer(x);
    worst = std::max(worst, cerr2(res.inner, inner));
    worst = std::max(worst, cerr2(res.outer, outer));
    worst = std::max(worst, cerr2(res.principal, 0.5 * (inner + outer)));
    // jump identity inner - outer = f(x)
    worst = std::max(worst, cerr2(res.inner - res.outer, cs.f(x)));
  }
  const double tol = 0.01 * cfg.tol_scale;
  detail::add_record(rep, "plemelj-verify", "sokhotski-oracle",
                     {{"max_rel_error", worst}, {"nodes", n}}, tol, worst <= tol,
                     clock.ms());
}

// Shared bump placement: centered on the stem domain, radius 0.78 R (pushed
// off the axis on centered q = 1 domains).
struct BumpSetup {
  TaggedFunction fn;
  StemPoint center;
  double radius;
};

inline BumpSetup default_bump(const ExperimentConfig& cfg) {
  const Signature sig = cfg.signature();
  const SliceDomain D = cfg.stem_domain();
  StemPoint center;
  center.xp.assign(D.center().begin(), D.center().end() - 1);
  center.v = D.center().back();
  double radius = 0.78 * cfg.domain_scale();
  if (center.v == 0.0) {
    center.v = 0.45 * cfg.domain_scale();
    radius = std::min(radius, 0.4 * cfg.domain_scale());
  }
  Multivector coeff = Multivector::scalar(sig, 1.0);
  coeff[BladeMask{1}] = 0.4;
  coeff *= 1.0 / norm(coeff);
  return {bump(center, radius, coeff, sig, nullptr), center, radius};
}

// Exclusion radii keyed to the integrand's feature size, and a volume
// resolution that keeps the rule spacing below the finest radius.
inline std::vector<double> feature_schedule(double feature) {
  return {0.43 * feature, 0.172 * feature, 0.069 * feature};
}

inline int scaled_volume_res(const ExperimentConfig& cfg) {
  const double scale = cfg.domain_scale() / 0.45;
  return std::max(cfg.res_slice, static_cast<int>(cfg.res_slice * scale));
}

inline std::vector<Point> interior_test_points(const ExperimentConfig& cfg,
                                               const StemPoint& center, double spread,
                                               int count, std::mt19937_64& gen) {
  const Signature sig = cfg.signature();
  const SliceDomain D = cfg.stem_domain();
  std::uniform_real_distribution<double> u(-spread, spread);
  std::vector<Point> pts;
  while (static_cast<int>(pts.size()) < count) {
    StemPoint sp = center;
    for (double& v : sp.xp) v += u(gen);
    sp.v += u(gen);
    if (sp.v <= 0.05 || !D.contains(sp)) continue;
    SplitPoint s;
    s.xp = sp.xp;
    s.r = sp.v;
    s.omega = detail::random_direction(sig.q, gen);
    pts.push_back(reassemble(s, sig));
  }
  return pts;
}

inline void pompeiu_suite(const ExperimentConfig& cfg, Report& rep) {
  const detail::Stopwatch clock;
  const Signature sig = cfg.signature();
  const SliceDomain D = cfg.stem_domain();
  const KernelParams params(sig, SliceEmbedding::axis(sig));
  auto gen = std::mt19937_64(cfg.seed + 5);

  const BumpSetup setup = default_bump(cfg);
  const TaggedFunction& f = setup.fn;
  const std::vector<Point> pts =
      interior_test_points(cfg, setup.center, 0.45 * cfg.domain_scale(), 10, gen);

  double fsup = 0.0;
  for (const Point& x : pts) fsup = std::max(fsup, norm(f.field.eval(x)));

  // reconstruction error at three resolutions; default in the middle
  const int vol_base = sig.p == 0 ? scaled_volume_res(cfg)
                                  : std::max(16, 3 * scaled_volume_res(cfg) / 4);
  std::vector<double> errors;
  for (double scale : {0.5, 1.0, 2.0}) {
    CauchyPompeiuOptions opt;
    opt.n_boundary = std::max(8, static_cast<int>(cfg.res_boundary * scale));
    opt.n_volume = std::max(8, static_cast<int>(vol_base * scale));
    opt.delta_schedule = feature_schedule(setup.radius);
    if (scale < 1.0)
      for (double& d : opt.delta_schedule) d *= 1.5;
    if (scale > 1.0)
      for (double& d : opt.delta_schedule) d *= 0.6;
    opt.scheme = cfg.scheme();
    std::vector<double> per_pt(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) {
      const auto res = cauchy_pompeiu(f.field, D, params, pts[i], opt);
      per_pt[i] = norm(res.reconstruction - f.field.eval(pts[i]));
    });
    errors.push_back(*std::max_element(per_pt.begin(), per_pt.end()) / fsup);
  }

  const double tol = 0.02 * cfg.tol_scale;
  const bool pass = errors[1] <= tol && errors[2] <= errors[0];
  detail::add_record(rep, "pompeiu-verify",
                     "p" + std::to_string(sig.p) + "q" + std::to_string(sig.q),
                     {{"rel_error_default", errors[1]},
                      {"rel_error_coarse", errors[0]},
                      {"rel_error_fine", errors[2]}},
                     tol, pass, clock.ms());
}

inline void teodorescu_suite(const ExperimentConfig& cfg, Report& rep) {
  const detail::Stopwatch clock;
  const Signature sig = cfg.signature();
  const SliceDomain D = cfg.stem_domain();
  auto gen = std::mt19937_64(cfg.seed + 6);
  const BumpSetup setup = default_bump(cfg);
  const TaggedFunction& f = setup.fn;

  // higher stem dimensions multiply the polar node count; keep the rule at a
  // comparable size and widen the exclusion radii to what it can resolve
  const int base_res = scaled_volume_res(cfg);
  const int n_slice = sig.p == 0 ? base_res : std::max(16, 5 * base_res / 8);
  const int af = sig.p == 0 ? 4 : 2;
  const FiberedRule rule = fibered_volume_rule(D, sig, cfg.res_eta, n_slice, af);
  std::vector<double> schedule = feature_schedule(setup.radius);
  if (sig.p > 0)
    for (double& d : schedule) d *= 1.4;

  FieldFunction vtheta_f([&f, sig](const Point& y) {
    return apply_vartheta_bar_analytic(f.field, y, sig);
  });

  // (1) left inverse on compact support
  const std::vector<Point> pts =
      interior_test_points(cfg, setup.center, 0.35 * cfg.domain_scale(), 10, gen);
  std::vector<double> per_pt(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    const Multivector got = teodorescu(vtheta_f, rule, pts[i], schedule);
    per_pt[i] = norm(got - f.field.eval(pts[i]));
  });
  const double inv_err = *std::max_element(per_pt.begin(), per_pt.end());
  const double inv_tol = 0.02 * cfg.tol_scale;
  detail::add_record(rep, "teodorescu-verify", "left-inverse",
                     {{"max_error", inv_err}, {"sup_f", 1.0}}, inv_tol,
                     inv_err <= inv_tol, clock.ms());

  // (2) existence everywhere in R_*, including outside the domain
  const detail::Stopwatch clock2;
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<Point> everywhere;
  while (everywhere.size() < 100) {
    Point x;
    x.c.resize(sig.point_dim());
    for (double& v : x.c) v = u(gen);
    if (split(x, sig).r < 0.05) continue;
    everywhere.push_back(x);
  }
  std::vector<double> values(everywhere.size());
  std::vector<double> ratios(everywhere.size(), 0.0);
  parallel_for(everywhere.size(), [&](std::size_t i) {
    const TeodorescuResult res =
        teodorescu_with_detail(f.field, rule, everywhere[i], schedule);
    values[i] = norm(res.value);
    double ratio = 0.0;
    for (std::size_t k = 2; k < res.detail.per_delta.size(); ++k) {
      const double d1 = norm(res.detail.per_delta[k] - res.detail.per_delta[k - 1]);
      const double d0 = norm(res.detail.per_delta[k - 1] - res.detail.per_delta[k - 2]);
      if (d0 > 1e-13) ratio = std::max(ratio, d1 / d0);
    }
    ratios[i] = ratio;
  });
  bool finite = true;
  for (double v : values) finite = finite && std::isfinite(v);
  const double max_ratio = *std::max_element(ratios.begin(), ratios.end());
  detail::add_record(rep, "teodorescu-verify", "existence",
                     {{"points", 100},
                      {"all_finite", finite},
                      {"max_cauchy_ratio", max_ratio}},
                     0.5, finite && max_ratio < 0.5, clock2.ms());

  // (3) vartheta-bar T f = 0 outside the closure, at FD order 2
  const detail::Stopwatch clock3;
  std::vector<Point> outside;
  while (outside.size() < 6) {
    Point x;
    x.c.resize(sig.point_dim());
    for (double& v : x.c) v = u(gen);
    const SplitPoint s = split(x, sig);
    if (s.r < 0.4) continue;
    const double d = D.exterior_distance(s.stem());
    if (d < 0.25 || d > 1.5) continue;
    outside.push_back(x);
  }
  std::vector<double> res(2);
  const std::vector<double> mono_steps{2e-3, 1e-3};
  parallel_for(2, [&](std::size_t k) {
    res[k] = teodorescu_monogenicity_check(f.field, rule, D, outside,
                                           FDScheme{2, mono_steps[k]}, schedule);
  });
  const double r1 = res[0], r2 = res[1];
  const double order = observed_order(r1, r2);
  detail::add_record(rep, "teodorescu-verify", "monogenic-outside",
                     {{"residual_h", r1}, {"residual_h2", r2}, {"order", order}}, 0.5,
                     std::abs(order - 2.0) <= 0.5, clock3.ms());
}

inline void norm_estimate_suite(const ExperimentConfig& cfg, Report& rep) {
  if (cfg.q < 2)
    throw std::invalid_argument("norm-estimate requires q > 1");
  const detail::Stopwatch clock;
  const Signature sig = cfg.signature();
  const SliceDomain D = cfg.stem_domain();
  auto gen = std::mt19937_64(cfg.seed + 7);
  const LtParams lt(4.0);
  if (!lt.estimate_valid(sig))
    throw std::invalid_argument("norm-estimate: t = 4 invalid for this signature");

  // 50 random Gaussian bumps inside the domain
  std::vector<FieldFunction> ensemble;
  std::uniform_real_distribution<double> uw(0.25, 0.6);
  std::uniform_real_distribution<double> uc(-0.5, 0.5);
  for (int m = 0; m < 50; ++m) {
    StemPoint c;
    c.xp.assign(D.center().begin(), D.center().end() - 1);
    for (double& v : c.xp) v += uc(gen) * cfg.domain_scale();
    c.v = D.center().back() + uc(gen) * cfg.domain_scale() * 0.8;
    if (c.v < 0.1) c.v = 0.1;
    const double width = uw(gen) * cfg.domain_scale();
    Multivector coeff = detail::random_mv(sig, gen, 1.0);
    if (norm(coeff) < 0.1) coeff = Multivector::scalar(sig, 1.0);
    ensemble.push_back(gaussian_bump(c, width, coeff, sig).field);
  }

  // stability only needs moderate rules; the schedule stays above their
  // resolving power
  const double R = cfg.domain_scale();
  const std::vector<double> schedule{0.4 * R, 0.2 * R, 0.1 * R};
  auto run_at = [&](int inner_slice) {
    const FiberedRule outer = fibered_volume_rule(D, sig, 6, 12);
    const FiberedRule inner = fibered_volume_rule(D, sig, 12, inner_slice);
    return norm_estimate_experiment(ensemble, outer, inner, lt, schedule);
  };
  const NormEstimateResult base = run_at(20);
  const NormEstimateResult fine = run_at(40);

  const double drift = std::abs(fine.max_ratio - base.max_ratio) /
                       std::max(1e-12, base.max_ratio);
  const double spearman = detail::spearman_against_index(fine.ratios);
  const bool pass = drift <= 0.10 && std::abs(spearman) < 0.3 &&
                    std::isfinite(fine.max_ratio);
  detail::add_record(rep, "norm-estimate", "t4-ensemble",
                     {{"max_ratio", fine.max_ratio},
                      {"max_ratio_coarse", base.max_ratio},
                      {"drift", drift},
                      {"spearman", spearman},
                      {"members", 50},
                      {"skipped", fine.skipped.size()}},
                     0.10, pass, clock.ms());
}

inline void slice_preservation_suite(const ExperimentConfig& cfg, Report& rep) {
  if (cfg.q < 2)
    throw std::invalid_argument("slice-preservation requires q >= 2");
  const detail::Stopwatch clock;
  const Signature sig = cfg.signature();
  const SliceDomain D = cfg.stem_domain();
  auto gen = std::mt19937_64(cfg.seed + 8);
  const FiberedRule rule =
      fibered_volume_rule(D, sig, cfg.res_eta / 2, cfg.res_slice / 2);
  const std::vector<double> schedule = cfg.schedule();

  std::vector<OrbitTriple> triples;
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int t = 0; t < 20; ++t) {
    OrbitTriple tr;
    tr.base.xp.assign(D.center().begin(), D.center().end() - 1);
    for (double& v : tr.base.xp) v += u(gen) * cfg.domain_scale();
    tr.base.v = D.center().back() + u(gen) * cfg.domain_scale();
    tr.w = detail::random_direction(sig.q, gen);
    tr.w_check = detail::random_direction(sig.q, gen);
    triples.push_back(std::move(tr));
  }

  const TaggedFunction f = default_bump(cfg).fn;
  const double tf_violation = slice_preservation_check(f.field, rule, schedule, triples);

  const TaggedFunction control = omega_asymmetric_control(sig);
  const double control_violation =
      slice_preservation_check(control.field, sig, triples);

  const double tol = 0.02 * cfg.tol_scale;
  const bool pass = tf_violation <= tol &&
                    control_violation >= 10.0 * std::max(tf_violation, 1e-3);
  detail::add_record(rep, "slice-preservation",
                     "p" + std::to_string(sig.p) + "q" + std::to_string(sig.q),
                     {{"tf_violation", tf_violation},
                      {"control_violation", control_violation},
                      {"triples", 20}},
                     tol, pass, clock.ms());
}

// ---------------------------------------------------------------------------
// Suite registry and drivers
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& all_suites() {
  static const std::vector<std::string> names{
      "algebra-selftest", "representation",    "kernel-residual",
      "cauchy-verify",    "exterior-verify",   "plemelj-verify",
      "pompeiu-verify",   "teodorescu-verify", "norm-estimate",
      "slice-preservation"};
  return names;
}

inline bool suite_applicable(const std::string& name, const ExperimentConfig& cfg) {
  if (name == "cauchy-verify" || name == "exterior-verify" || name == "plemelj-verify")
    return cfg.p == 0 && cfg.q == 1;
  if (name == "norm-estimate" || name == "slice-preservation") return cfg.q >= 2;
  return true;
}

inline void run_suite(const std::string& name, const ExperimentConfig& cfg,
                      Report& rep) {
  if (name == "algebra-selftest") return algebra_selftest(cfg, rep);
  if (name == "representation") return representation_suite(cfg, rep);
  if (name == "kernel-residual") return kernel_residual_suite(cfg, rep);
  if (name == "cauchy-verify") return cauchy_suite(cfg, rep);
  if (name == "exterior-verify") return exterior_suite(cfg, rep);
  if (name == "plemelj-verify") return plemelj_suite(cfg, rep);
  if (name == "pompeiu-verify") return pompeiu_suite(cfg, rep);
  if (name == "teodorescu-verify") return teodorescu_suite(cfg, rep);
  if (name == "norm-estimate") return norm_estimate_suite(cfg, rep);
  if (name == "slice-preservation") return slice_preservation_suite(cfg, rep);
  throw std::invalid_argument("unknown suite '" + name + "'");
}

inline Report run(const ExperimentConfig& cfg, std::vector<std::string> suites) {
  Report rep;
  rep.config = cfg.to_json();
  rep.config_hash = cfg.hash();
  if (suites.size() == 1 && suites[0] == "all") {
    suites.clear();
    for (const std::string& s : all_suites())
      if (suite_applicable(s, cfg)) suites.push_back(s);
  }
  for (const std::string& s : suites) run_suite(s, cfg, rep);
  return rep;
}

// Reruns a refinable error metric across resolutions and reports observed
// convergence orders (log2 ratios of successive errors).
inline Report convergence_table(const ExperimentConfig& cfg, const std::string& suite,
                                int levels) {
  if (levels < 3)
    throw std::invalid_argument("convergence_table: need at least 3 levels");
  Report rep;
  rep.config = cfg.to_json();
  rep.config_hash = cfg.hash();
  const detail::Stopwatch clock;

  std::vector<double> errors;
  for (int level = 0; level < levels; ++level) {
    const int factor = 1 << level;
    if (suite == "circle-trapezoid") {
      // spectral smoke test: trapezoid on the circle, analytic integrand
      const QuadRule r = sphere_rule(2, 8 * factor);
      std::vector<double> terms(r.size());
      for (std::size_t i = 0; i < r.size(); ++i)
        terms[i] = r.weights[i] * std::exp(r.nodes[i][0]);
      // 2 pi I_0(1), frozen from the Bessel series
      const double exact = 2.0 * M_PI * 1.2660658777520083;
      errors.push_back(std::abs(pairwise_sum(terms) - exact));
    } else if (suite == "kernel-residual") {
      ExperimentConfig sub = cfg;
      sub.fd_step = 4e-3 / factor;
      Report inner;
      kernel_residual_suite(sub, inner);
      errors.push_back(inner.records.back().values["residual_finest"].get<double>());
    } else if (suite == "cauchy-verify") {
      ExperimentConfig sub = cfg;
      sub.res_boundary = 8 * factor;
      Report inner;
      cauchy_suite(sub, inner);
      errors.push_back(inner.records.back().values["max_error"].get<double>());
    } else if (suite == "pompeiu-verify") {
      ExperimentConfig sub = cfg;
      sub.res_boundary = std::max(8, cfg.res_boundary * factor / 4);
      sub.res_slice = std::max(8, cfg.res_slice * factor / 4);
      Report inner;
      pompeiu_suite(sub, inner);
      errors.push_back(inner.records.back().values["rel_error_default"].get<double>());
    } else {
      throw std::invalid_argument("convergence_table: suite '" + suite +
                                  "' has no refinable metric");
    }
  }
  nlohmann::json orders = nlohmann::json::array();
  bool converging = false;
  for (std::size_t k = 1; k < errors.size(); ++k) {
    orders.push_back(observed_order(errors[k - 1], errors[k]));
    if (errors[k] < errors[k - 1]) converging = true;
  }
  const bool floored = errors.back() < 1e-12;
  detail::add_record(rep, "convergence", suite,
                     {{"errors", errors}, {"orders", orders}, {"converging", converging},
                      {"machine_floor", floored}},
                     0.0, converging || floored, clock.ms());
  return rep;
}

}  // namespace gpsm
