#include <catch2/catch_amalgamated.hpp>

#include "gpsm/functions.hpp"
#include "test_support.hpp"

using namespace gpsm;
using namespace testsupport;

TEST_CASE("fueter variables are D-monogenic", "[functions]") {
  const Signature sig(1, 2);
  const Point x{1.0, 2.0, 0.7, -0.3};
  for (int i = 1; i <= sig.n(); ++i) {
    const TaggedFunction tf = fueter_variable(i, sig);
    CHECK(norm(apply_D(tf.field, x, sig)) <= 1e-8);
    CHECK(norm(tf.field.eval(Point{0.0, 0.0, 0.0, 0.0})) == 0.0);
  }
  // i = 1, x = (1, 2, ...): f = 2 - e_1
  const TaggedFunction z1 = fueter_variable(1, sig);
  Multivector expect = Multivector::scalar(sig, 2.0);
  expect[0b1] = -1.0;
  CHECK(max_abs_diff(z1.field.eval(x), expect) == 0.0);
  CHECK(z1.has(Tag::gpsm));                       // i <= p
  CHECK_FALSE(fueter_variable(2, sig).has(Tag::gpsm));  // sphere-block index
  CHECK_THROWS_AS(fueter_variable(9, sig), std::invalid_argument);
}

TEST_CASE("shifted kernel: slice collapse, decay, orbit guard", "[functions]") {
  const Signature sig(0, 2);
  const Point c{2.0, 0.0, 1.5};
  const TaggedFunction tf = shifted_kernel(c, sig);

  // on the slice of c (omega = eta = direction of c_q), calE = E
  const SplitPoint sc = split(c, sig);
  const KernelParams params(sig, SliceEmbedding(*sc.omega));
  const Point x = embed_stem({{0.3}, 0.9}, *sc.omega, sig);
  const StemPoint diff{{2.0 - 0.3}, 1.5 - 0.9};
  CHECK(max_abs_diff(tf.field.eval(x), cauchy_kernel(diff, params)) <= 1e-14);

  // far-field decay |f| = O(|x|^{-(p+1)})
  auto mag_at = [&](double scale) {
    return norm(tf.field.eval(Point{-5.0 * scale, 4.0 * scale, 3.0 * scale}));
  };
  const double ratio = mag_at(1.0) / mag_at(2.0);
  CHECK(ratio == Catch::Approx(std::pow(2.0, sig.p + 1)).epsilon(0.1));

  const SliceDomain D = SliceDomain::ball({0.0, 1.0}, 0.45);
  CHECK_THROWS_AS(require_orbit_clear(Point{0.0, 0.0, 1.2}, D, sig, 0.0),
                  std::invalid_argument);
  CHECK_NOTHROW(require_orbit_clear(Point{3.0, 0.0, 1.2}, D, sig, 0.5));
}

TEST_CASE("shifted kernel is gpsm on a clear domain", "[functions]") {
  const Signature sig(1, 2);
  const Point c{0.0, 0.0, 0.0, 2.0};
  const TaggedFunction tf = shifted_kernel(c, sig);
  auto gen = rng(101);
  std::vector<Point> pts;
  while (pts.size() < 6) {
    Point x = random_point(sig, gen, 0.8);
    const SplitPoint s = split(x, sig);
    if (s.r < 0.4) continue;
    if (stem_distance(s.stem(), StemPoint{{0.0, 0.0}, 2.0}) < 0.8) continue;
    pts.push_back(x);
  }
  CHECK(gpsm_residual(tf.field, pts, sig, FDScheme{2, 1e-3}) <= 2e-5);
}

TEST_CASE("representation extension reproduces kernels and constants", "[functions]") {
  const Signature sig(0, 2);
  const SliceEmbedding eta = SliceEmbedding::axis(sig);
  const std::vector<StemPoint> precheck{{{0.2}, 0.8}, {{-0.4}, 1.1}, {{0.0}, -0.9}};

  // constant
  auto genm = rng(103);
  const Multivector c = random_multivector(sig, genm);
  const TaggedFunction ext =
      representation_extension(FieldFunction([c](const Point&) { return c; }), eta, sig,
                               precheck);
  CHECK(max_abs_diff(ext.field.eval(Point{0.3, 0.5, -0.8}), c) <= 1e-13);

  // restriction of a shifted kernel extends back to itself
  const Point src{2.5, 0.0, 1.0};
  const TaggedFunction kern = shifted_kernel(src, sig);
  const TaggedFunction kext = representation_extension(kern.field, eta, sig, precheck);
  auto gen = rng(107);
  for (int t = 0; t < 10; ++t) {
    Point x = random_point(sig, gen, 1.0);
    if (split(x, sig).r < 0.2) continue;
    const Multivector a = kern.field.eval(x);
    const Multivector b = kext.field.eval(x);
    CHECK(max_abs_diff(a, b) <= 1e-12 * std::max(1.0, norm(a)));
  }

  // z^2 on the eta-slice extends to a gpsm function
  FieldFunction zsq([sig](const Point& x) {
    // slice coordinates (x_0, v) with v the eta-component
    const double u = x[0], v = x[1];
    Multivector m = Multivector::scalar(sig, u * u - v * v);
    m[0b01] = 2.0 * u * v;
    return m;
  });
  const TaggedFunction zext = representation_extension(zsq, eta, sig, precheck);
  std::vector<Point> pts;
  while (pts.size() < 6) {
    Point x = random_point(sig, gen, 1.2);
    if (split(x, sig).r < 0.4) continue;
    pts.push_back(x);
  }
  CHECK(gpsm_residual(zext.field, pts, sig, FDScheme{2, 1e-3}) <= 2e-5);

  // a non-slice-monogenic restriction fails the precheck
  FieldFunction bad([sig](const Point& x) {
    return Multivector::scalar(sig, x[0] * x[0]);
  });
  CHECK_THROWS_AS(representation_extension(bad, eta, sig, precheck),
                  std::invalid_argument);
}

TEST_CASE("bump: support, center value, analytic partials", "[functions]") {
  const Signature sig(0, 2);
  auto genm = rng(109);
  const Multivector coeff = random_multivector(sig, genm);
  const StemPoint center{{0.1}, 1.0};
  const TaggedFunction tf = bump(center, 0.4, coeff, sig);

  const Point at_center = embed_stem(center, {0.6, 0.8}, sig);
  CHECK(max_abs_diff(tf.field.eval(at_center), coeff) <= 1e-13);
  CHECK(norm(tf.field.eval(Point{3.0, 0.0, 0.0})) == 0.0);
  CHECK(norm(tf.field.eval(Point{0.1, 0.0, 1.45})) == 0.0);  // just outside

  // partials against finite differences
  auto gen = rng(113);
  int checked = 0;
  while (checked < 8) {
    Point x = random_point(sig, gen, 1.3);
    const SplitPoint s = split(x, sig);
    if (s.r < 0.3) continue;
    if (norm(tf.field.eval(x)) < 1e-6) continue;
    ++checked;
    for (int axis = 0; axis < sig.point_dim(); ++axis) {
      const Multivector fd = partial_derivative(tf.field, x, axis, sig, FDScheme{4, 1e-4});
      const Multivector an = tf.field.partial(x, axis);
      CHECK(max_abs_diff(fd, an) <= 1e-8 * std::max(1.0, norm(an)));
    }
  }

  // vartheta of the bump also has compact support: collar points vanish
  FieldFunction vb([&](const Point& y) {
    return apply_vartheta_bar_analytic(tf.field, y, sig);
  });
  CHECK(norm(vb.eval(Point{0.1, 0.0, 1.5})) == 0.0);

  CHECK_THROWS_AS(bump(StemPoint{{0.0}, 0.2}, 0.4, coeff, sig), std::invalid_argument);
  const SliceDomain tight = SliceDomain::ball({0.1, 1.0}, 0.3);
  CHECK_THROWS_AS(bump(center, 0.4, coeff, sig, &tight), std::invalid_argument);
}

TEST_CASE("gaussian bump partials match finite differences", "[functions]") {
  const Signature sig(1, 2);
  auto genm = rng(127);
  const Multivector coeff = random_multivector(sig, genm);
  const TaggedFunction tf = gaussian_bump(StemPoint{{0.0, 0.2}, 1.0}, 0.5, coeff, sig);
  auto gen = rng(131);
  for (int t = 0; t < 6; ++t) {
    Point x = random_point(sig, gen, 1.2);
    if (split(x, sig).r < 0.3) continue;
    for (int axis = 0; axis < sig.point_dim(); ++axis) {
      const Multivector fd = partial_derivative(tf.field, x, axis, sig, FDScheme{4, 1e-4});
      const Multivector an = tf.field.partial(x, axis);
      CHECK(max_abs_diff(fd, an) <= 1e-8 * std::max(1.0, norm(an)));
    }
  }
}

TEST_CASE("holomorphic reductions lift complex functions", "[functions]") {
  const Signature sig(0, 1);
  const TaggedFunction zsq = holomorphic_reduction(HoloKind::power, sig, 2);
  // z^2 at 1 + 2 e_1 -> -3 + 4 e_1
  Multivector expect = Multivector::scalar(sig, -3.0);
  expect[0b1] = 4.0;
  CHECK(max_abs_diff(zsq.field.eval(Point{1.0, 2.0}), expect) <= 1e-14);

  const TaggedFunction one = holomorphic_reduction(HoloKind::power, sig, 0);
  CHECK(max_abs_diff(one.field.eval(Point{0.4, -0.7}),
                     Multivector::scalar(sig, 1.0)) <= 1e-15);

  std::vector<Point> pts{{0.3, 0.4}, {-0.8, 0.1}, {1.2, -0.5}};
  CHECK(gpsm_residual(zsq.field, pts, sig) <= 1e-8);
  const TaggedFunction ez = holomorphic_reduction(HoloKind::exponential, sig);
  CHECK(gpsm_residual(ez.field, pts, sig) <= 1e-8);

  CHECK_THROWS_AS(holomorphic_reduction(HoloKind::power, Signature(0, 2), 2),
                  std::invalid_argument);
}

TEST_CASE("corpus tag checks pass for true tags and refuse false ones", "[functions]") {
  const Signature sig(0, 2);
  const SliceDomain D = SliceDomain::ball({0.0, 1.0}, 0.45);
  TagCheckConfig cfg{D};

  std::vector<TaggedFunction> corpus;
  corpus.push_back(shifted_kernel(Point{2.5, 0.0, 1.0}, sig));
  corpus.push_back(bump(StemPoint{{0.0}, 1.0}, 0.35,
                        Multivector::scalar(sig, 1.0), sig, &D));
  corpus.push_back(omega_asymmetric_control(sig));
  CHECK_NOTHROW(build_corpus(corpus, sig, cfg));

  // mislabeling the sphere coordinate field as gpsm must refuse to build
  TaggedFunction lie = omega_asymmetric_control(sig);
  lie.tags.insert(Tag::gpsm);
  CHECK_THROWS_AS(verify_tags(lie, sig, cfg), std::runtime_error);

  // negative control fails the slice-structure check by a wide margin
  auto gen = rng(137);
  const TaggedFunction control = omega_asymmetric_control(sig);
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const StemPoint base{{0.2}, 1.0};
    worst = std::max(worst, orbit_structure_violation(control.field, sig, base,
                                                      random_unit_vector(2, gen),
                                                      random_unit_vector(2, gen)));
  }
  CHECK(worst > 0.1);
}
