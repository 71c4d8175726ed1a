#include <catch2/catch_amalgamated.hpp>

#include "gpsm/quadrature.hpp"
#include "test_support.hpp"

using namespace gpsm;
using namespace testsupport;

namespace {

double integrate(const QuadRule& rule, const std::function<double(const std::vector<double>&)>& g) {
  std::vector<double> terms(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i)
    terms[i] = rule.weights[i] * g(rule.nodes[i]);
  return pairwise_sum(terms);
}

}  // namespace

TEST_CASE("Gauss-Legendre nodes and exactness", "[quadrature]") {
  const QuadRule r1 = gauss_legendre(1, -1.0, 1.0);
  CHECK(r1.nodes[0][0] == Catch::Approx(0.0).margin(1e-15));
  CHECK(r1.weights[0] == Catch::Approx(2.0));

  const QuadRule r2 = gauss_legendre(2, -1.0, 1.0);
  CHECK(r2.nodes[0][0] == Catch::Approx(1.0 / std::sqrt(3.0)));
  CHECK(r2.nodes[1][0] == Catch::Approx(-1.0 / std::sqrt(3.0)));
  CHECK(r2.weights[0] == Catch::Approx(1.0));
  CHECK(r2.weights[1] == Catch::Approx(1.0));

  // degree-3 exactness with two points
  CHECK(integrate(r2, [](const std::vector<double>& x) { return x[0] * x[0]; }) ==
        Catch::Approx(2.0 / 3.0));

  // high order stays accurate
  const QuadRule r48 = gauss_legendre(48, 0.0, M_PI);
  CHECK(integrate(r48, [](const std::vector<double>& x) { return std::sin(x[0]); }) ==
        Catch::Approx(2.0).margin(1e-14));

  CHECK_THROWS_AS(gauss_legendre(0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(gauss_legendre(4, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("sphere rules integrate constants to the sphere area", "[quadrature]") {
  CHECK(sphere_rule(1, 1).total_weight() == Catch::Approx(2.0));
  CHECK(sphere_rule(2, 64).total_weight() == Catch::Approx(2.0 * M_PI));
  CHECK(sphere_rule(3, 24).total_weight() == Catch::Approx(4.0 * M_PI));
  CHECK(sphere_rule(4, 16).total_weight() == Catch::Approx(2.0 * M_PI * M_PI).epsilon(1e-10));
  CHECK_THROWS_AS(sphere_rule(5, 8), std::invalid_argument);
}

TEST_CASE("sphere rule second moments", "[quadrature]") {
  // int y_3^2 over S^2 = 4 pi / 3
  const QuadRule s2 = sphere_rule(3, 24);
  CHECK(integrate(s2, [](const std::vector<double>& y) { return y[2] * y[2]; }) ==
        Catch::Approx(4.0 * M_PI / 3.0));
  // int y_1^2 over S^1 = pi
  const QuadRule s1 = sphere_rule(2, 32);
  CHECK(integrate(s1, [](const std::vector<double>& y) { return y[0] * y[0]; }) ==
        Catch::Approx(M_PI));
}

TEST_CASE("hemisphere rule keeps true weights", "[quadrature]") {
  const QuadRule h2 = hemisphere_rule(2, 16);
  CHECK(h2.total_weight() == Catch::Approx(M_PI));
  for (const auto& node : h2.nodes) CHECK(node.back() > 0.0);

  const QuadRule h3 = hemisphere_rule(3, 16);
  CHECK(h3.total_weight() == Catch::Approx(2.0 * M_PI));

  // S^0 hemisphere: the single direction +1 with weight 1
  const QuadRule h1 = hemisphere_rule(1, 1);
  REQUIRE(h1.size() == 1);
  CHECK(h1.nodes[0][0] == 1.0);
  CHECK(h1.weights[0] == 1.0);
}

TEST_CASE("boundary rules: measure, unit normals, closure", "[quadrature]") {
  const SliceDomain disc = SliceDomain::ball({0.0, 0.0}, 1.5);
  const QuadRule circ = boundary_rule(disc, 64);
  CHECK(circ.total_weight() == Catch::Approx(2.0 * M_PI * 1.5));

  const SliceDomain shifted = SliceDomain::ball({0.2, 1.0}, 0.4);
  const QuadRule two = boundary_rule(shifted, 64);
  CHECK(two.total_weight() == Catch::Approx(2.0 * (2.0 * M_PI * 0.4)));

  const SliceDomain box = SliceDomain::box({0.0, 1.0}, {0.5, 0.25});
  const QuadRule bx = boundary_rule(box, 16);
  CHECK(bx.total_weight() == Catch::Approx(2.0 * (2.0 * 1.0 + 2.0 * 0.5)));

  for (const QuadRule* rule : {&circ, &two, &bx}) {
    REQUIRE(rule->normals.size() == rule->size());
    std::vector<double> nx(rule->size()), nv(rule->size());
    for (std::size_t i = 0; i < rule->size(); ++i) {
      CHECK(euclidean_norm(rule->normals[i]) == Catch::Approx(1.0));
      nx[i] = rule->weights[i] * rule->normals[i][0];
      nv[i] = rule->weights[i] * rule->normals[i][1];
    }
    // closed surfaces: int n dS = 0
    CHECK(std::abs(pairwise_sum(nx)) <= 1e-10);
    CHECK(std::abs(pairwise_sum(nv)) <= 1e-10);
  }

  // 3-d stem boundary (p = 1)
  const SliceDomain ball3 = SliceDomain::ball({0.0, 0.0, 1.0}, 0.4);
  const QuadRule sph = boundary_rule(ball3, 16);
  CHECK(sph.total_weight() == Catch::Approx(2.0 * 4.0 * M_PI * 0.16));
}

TEST_CASE("slice volume rules: areas and moments", "[quadrature]") {
  const SliceDomain square = SliceDomain::box({0.0, 0.0}, {0.5, 0.5});
  CHECK(slice_volume_rule(square, 8).total_weight() == Catch::Approx(1.0));

  const SliceDomain disc = SliceDomain::ball({0.0, 0.0}, 1.0);
  CHECK(slice_volume_rule(disc, 32).total_weight() == Catch::Approx(M_PI));

  // int x_0^2 over [-1,1]^2 = 2/3 * 2
  const SliceDomain big = SliceDomain::box({0.0, 0.0}, {1.0, 1.0});
  const QuadRule r = slice_volume_rule(big, 8);
  CHECK(integrate(r, [](const std::vector<double>& x) { return x[0] * x[0]; }) ==
        Catch::Approx(4.0 / 3.0));

  // mirrored annulus in the stem plane
  const SliceDomain ann = SliceDomain::annulus({0.0, 0.0}, 0.5, 1.0);
  CHECK(slice_volume_rule(ann, 32).total_weight() ==
        Catch::Approx(M_PI * (1.0 - 0.25)));

  // 3-d stem ball, mirrored pair
  const SliceDomain ball3 = SliceDomain::ball({0.0, 0.0, 1.5}, 0.5);
  CHECK(slice_volume_rule(ball3, 16).total_weight() ==
        Catch::Approx(2.0 * 4.0 / 3.0 * M_PI * 0.125).epsilon(1e-10));
}

TEST_CASE("fibered rule integrates constants to the completion volume", "[quadrature]") {
  // q = 2, box stem {x0 in [-1,1], v in [1,2]}: shell cylinder, vol = 2 pi (4-1) = 6 pi
  const Signature sig(0, 2);
  const SliceDomain box = SliceDomain::box({0.0, 1.5}, {1.0, 0.5});
  const FiberedRule fib = fibered_volume_rule(box, sig, 16, 24);
  CHECK(fib.volume() == Catch::Approx(6.0 * M_PI).epsilon(1e-9));

  // q = 2, ball stem: solid torus, vol = 2 pi^2 c_v rho^2 (Pappus)
  const SliceDomain ball = SliceDomain::ball({0.0, 1.0}, 0.45);
  const FiberedRule torus = fibered_volume_rule(ball, sig, 16, 24);
  CHECK(torus.volume() ==
        Catch::Approx(2.0 * M_PI * M_PI * 1.0 * 0.45 * 0.45).epsilon(1e-9));

  // q = 1 degenerates to the plain slice rule
  const Signature sig1(0, 1);
  const FiberedRule flat = fibered_volume_rule(ball, sig1, 4, 24);
  CHECK(flat.volume() == Catch::Approx(2.0 * M_PI * 0.45 * 0.45).epsilon(1e-9));

  // q = 3: revolve over S^2: vol = int 4 pi v^2 dx0 dv over the stem box
  const Signature sig3(0, 3);
  const SliceDomain thin = SliceDomain::box({0.0, 1.25}, {1.0, 0.25});
  const FiberedRule fat = fibered_volume_rule(thin, sig3, 16, 24);
  const double expect = 2.0 * (4.0 * M_PI / 3.0) * (std::pow(1.5, 3) - std::pow(1.0, 3));
  CHECK(fat.volume() == Catch::Approx(expect).epsilon(1e-9));

  CHECK_THROWS_AS(fibered_volume_rule(SliceDomain::ball({0.0, 0.0}, 1.0), sig, 8, 8),
                  std::invalid_argument);
}

TEST_CASE("fibered rule agrees with an independent tensor rule", "[quadrature]") {
  // p = 0, q = 2 box stem: the completion is an annular cylinder in R^3.
  // Direct rule: Gauss in x0 times polar rule on the annulus.
  const Signature sig(0, 2);
  const SliceDomain box = SliceDomain::box({0.1, 1.5}, {0.9, 0.5});
  const FiberedRule fib = fibered_volume_rule(box, sig, 24, 32);

  const QuadRule gx = gauss_legendre(24, 0.1 - 0.9, 0.1 + 0.9);
  const QuadRule gr = gauss_legendre(24, 1.0, 2.0);
  const int nth = 48;

  auto direct = [&](const std::function<double(const Point&)>& g) {
    std::vector<double> terms;
    for (std::size_t i = 0; i < gx.size(); ++i)
      for (std::size_t j = 0; j < gr.size(); ++j)
        for (int k = 0; k < nth; ++k) {
          const double th = 2.0 * M_PI * (k + 0.5) / nth;
          const double rr = gr.nodes[j][0];
          const Point y{gx.nodes[i][0], rr * std::cos(th), rr * std::sin(th)};
          terms.push_back(gx.weights[i] * gr.weights[j] * (2.0 * M_PI / nth) * rr * g(y));
        }
    return pairwise_sum(terms);
  };
  auto fibered = [&](const std::function<double(const Point&)>& g) {
    std::vector<double> terms(fib.size());
    for (std::size_t i = 0; i < fib.size(); ++i)
      terms[i] = fib.weights[i] * g(fib.points[i]);
    return pairwise_sum(terms);
  };

  const std::vector<std::function<double(const Point&)>> integrands{
      [](const Point& y) { return std::exp(y[0] - 0.3 * (y[1] * y[1] + y[2] * y[2])); },
      [](const Point& y) { return 1.0 / (1.0 + y[0] * y[0] + y[1] * y[1] + y[2] * y[2]); },
      [](const Point& y) { return y[0] * y[0] + std::sin(y[1]) * y[2]; }};
  for (const auto& g : integrands)
    CHECK(fibered(g) == Catch::Approx(direct(g)).margin(1e-5));
}

TEST_CASE("singular volume integral: bounded integrands ignore the schedule",
          "[quadrature]") {
  const Signature sig(0, 2);
  const SliceDomain disc = SliceDomain::ball({0.0, 0.0}, 1.0);
  const QuadRule rule = slice_volume_rule(disc, 48);
  std::vector<StemPoint> stem(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i)
    stem[i] = StemPoint{{rule.nodes[i][0]}, rule.nodes[i][1]};

  auto smooth = [&](std::size_t i) {
    return Multivector::scalar(sig, std::exp(-stem[i].xp[0]) * std::cos(stem[i].v));
  };
  // singular point far outside the domain
  const std::vector<StemPoint> far{{{5.0}, 5.0}};
  const auto res = singular_volume_integral_nodes(stem, rule.weights, smooth, far,
                                                  {0.2, 0.1, 0.05}, sig);
  for (const auto& v : res.per_delta)
    CHECK(max_abs_diff(v, res.per_delta.front()) <= 1e-8);

  auto zero = [&](std::size_t) { return Multivector(sig); };
  const auto z = singular_volume_integral_nodes(stem, rule.weights, zero, far,
                                                {0.2, 0.1, 0.05}, sig);
  CHECK(norm(z.extrapolated) == 0.0);
}

TEST_CASE("singular volume integral recovers the radial oracle", "[quadrature]") {
  // int_{|y| < R} |y|^{-1} dA = 2 pi R exactly; the excluded-disc value is
  // 2 pi (R - delta), linear in delta, so the extrapolation removes it.
  const Signature sig(0, 2);
  const double R = 0.8;
  const SliceDomain disc = SliceDomain::ball({0.0, 0.0}, R);
  const QuadRule rule = slice_volume_rule(disc, 64);
  std::vector<StemPoint> stem(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i)
    stem[i] = StemPoint{{rule.nodes[i][0]}, rule.nodes[i][1]};
  const std::vector<StemPoint> center{{{0.0}, 0.0}};

  auto g = [&](std::size_t i) {
    const double d = stem_distance(stem[i], center[0]);
    return Multivector::scalar(sig, 1.0 / d);
  };
  const std::vector<double> schedule{0.2, 0.12, 0.08, 0.05};
  const auto res =
      singular_volume_integral_nodes(stem, rule.weights, g, center, schedule, sig);

  // Cauchy convergence of the delta sequence
  for (std::size_t k = 2; k < res.per_delta.size(); ++k) {
    const double d1 = norm(res.per_delta[k] - res.per_delta[k - 1]);
    const double d0 = norm(res.per_delta[k - 1] - res.per_delta[k - 2]);
    CHECK(d1 < d0);
  }
  CHECK(scalar_part(res.extrapolated) == Catch::Approx(2.0 * M_PI * R).epsilon(2e-3));

  CHECK_THROWS_AS(singular_volume_integral_nodes(stem, rule.weights, g, center,
                                                 {0.1, 0.2}, sig),
                  std::invalid_argument);
  CHECK_THROWS_AS(singular_volume_integral_nodes(stem, rule.weights, g, center,
                                                 {10.0, 5.0}, sig),
                  std::domain_error);
}

TEST_CASE("domain-level singular integral wrapper", "[quadrature]") {
  const Signature sig(0, 2);
  const double R = 0.8;
  const SliceDomain disc = SliceDomain::ball({0.0, 0.0}, R);
  const std::vector<StemPoint> center{{{0.0}, 0.0}};
  auto g = [&](const StemPoint& sp) {
    return Multivector::scalar(sig, 1.0 / stem_distance(sp, center[0]));
  };
  const auto res =
      singular_volume_integral(g, disc, sig, center, {0.2, 0.12, 0.08, 0.05}, 64);
  CHECK(scalar_part(res.extrapolated) == Catch::Approx(2.0 * M_PI * R).epsilon(2e-3));
}

TEST_CASE("Neville extrapolation removes polynomial error terms", "[quadrature]") {
  const Signature sig(0, 1);
  std::vector<double> ts{0.4, 0.2, 0.1, 0.05};
  std::vector<Multivector> vs;
  for (double t : ts)
    vs.push_back(Multivector::scalar(sig, 3.0 + 2.0 * t + 0.5 * t * t - t * t * t));
  CHECK(scalar_part(neville_extrapolate(ts, vs)) == Catch::Approx(3.0).margin(1e-12));
}

TEST_CASE("resolution refinement converges monotonically on smooth integrands",
          "[quadrature]") {
  const SliceDomain disc = SliceDomain::ball({0.0, 0.0}, 1.0);
  auto value = [&](int n) {
    const QuadRule r = slice_volume_rule(disc, n);
    return integrate(r, [](const std::vector<double>& y) {
      return std::exp(y[0]) * std::cos(2.0 * y[1]);
    });
  };
  const double ref = value(96);
  double prev = std::abs(value(6) - ref);
  for (int n : {12, 24, 48}) {
    const double err = std::abs(value(n) - ref);
    CHECK(err <= prev);
    prev = err;
  }
}
