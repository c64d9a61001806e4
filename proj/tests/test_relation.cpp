#include <doctest.h>

#include <cmath>

#include "relkit/domain.hpp"
#include "relkit/errors.hpp"
#include "relkit/registry.hpp"
#include "relkit/relation.hpp"

using namespace relkit;

namespace {

Point pt1(double x) {
  Point p(1);
  p[0] = x;
  return p;
}

Point pt2(double x, double y) {
  Point p(2);
  p[0] = x;
  p[1] = y;
  return p;
}

BoxDomain unit_interval() {
  return BoxDomain(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1));
}

std::vector<PointPair> pairs_from_grid(const BoxDomain& dom, int per_axis) {
  const auto pts = sample_grid(dom, per_axis);
  std::vector<PointPair> pairs;
  for (const Point& x : pts)
    for (const Point& y : pts) pairs.emplace_back(x, y);
  return pairs;
}

}  // namespace

TEST_CASE("Relation: black box evaluates the wrapped function") {
  const Relation r = Relation::black_box(
      [](const Point& x, const Point& y) { return x[0] * 2.0 + y[0]; });
  CHECK(r(pt1(1.0), pt1(3.0)) == doctest::Approx(5.0));
  CHECK(r.kind() == RelationKind::BlackBox);
  CHECK_THROWS_AS(r.matrix(), InvalidArgument);
  CHECK_THROWS_AS(r.features(), InvalidArgument);
}

TEST_CASE("Relation: finite matrix looks up by nearest element") {
  Eigen::MatrixXd R(2, 2);
  R << 1.0, 2.0, 3.0, 4.0;
  const Relation r = Relation::finite_matrix(R, {pt1(0.0), pt1(1.0)});
  CHECK(r(pt1(0.0), pt1(1.0)) == 2.0);
  CHECK(r(pt1(0.1), pt1(0.9)) == 2.0);   // off-element queries snap
  CHECK(r(pt1(-5.0), pt1(5.0)) == 2.0);  // extension covers all of R
  CHECK(r(pt1(0.5), pt1(0.5)) == 1.0);   // equidistant -> lowest index
  CHECK(r.matrix() == R);
  CHECK(r.elements().size() == 2);
}

TEST_CASE("Relation: finite matrix validates its inputs") {
  Eigen::MatrixXd R(2, 2);
  R << 1.0, 2.0, 3.0, 4.0;
  CHECK_THROWS_AS(Relation::finite_matrix(R, {pt1(0.0)}), InvalidArgument);
  CHECK_THROWS_AS(Relation::finite_matrix(R, {}), InvalidArgument);
  Eigen::MatrixXd bad = R;
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(Relation::finite_matrix(bad, {pt1(0.0), pt1(1.0)}),
                  InvalidArgument);
  CHECK_THROWS_AS(Relation::finite_matrix(R, {pt1(0.0), pt2(0.0, 1.0)}),
                  InvalidArgument);
}

TEST_CASE("Relation: feature pair sums the declared series") {
  const Relation r = Relation::feature_pair(make_feature_pair("poly-pair"));
  // x*y^2 + x^2*y
  CHECK(r(pt1(2.0), pt1(3.0)) == doctest::Approx(2.0 * 9.0 + 4.0 * 3.0));
  CHECK(r.features().cap == 2);
}

TEST_CASE("sup_error: known gaps and the identical-relation zero") {
  const auto pairs = pairs_from_grid(unit_interval(), 5);
  const Relation r = make_relation("sin-diff");
  CHECK(sup_error(r, r, pairs) == 0.0);

  const Relation one = Relation::black_box([](const Point&, const Point&) { return 1.0; });
  const Relation zero = Relation::black_box([](const Point&, const Point&) { return 0.0; });
  CHECK(sup_error(one, zero, pairs) == doctest::Approx(1.0));

  // r(x,y) = x*y vs 0 over the 4 corner pairs of [0,1]^2 pair space: max at (1,1)
  const Relation prod = make_relation("lin-prod");
  CHECK(sup_error(prod, zero, pairs_from_grid(unit_interval(), 2)) == doctest::Approx(1.0));
}

TEST_CASE("sup_error: argument order does not matter, empty list rejected") {
  const auto pairs = pairs_from_grid(unit_interval(), 4);
  const Relation a = make_relation("sin-diff");
  const Relation b = make_relation("lin-prod");
  CHECK(sup_error(a, b, pairs) == sup_error(b, a, pairs));
  CHECK_THROWS_AS(sup_error(a, b, {}), InvalidArgument);

  // triangle inequality through a third relation
  const Relation c = make_relation("min-kernel");
  CHECK(sup_error(a, c, pairs) <= sup_error(a, b, pairs) + sup_error(b, c, pairs) + 1e-15);
}

TEST_CASE("l2_error: bounded by sup_error, zero on identical relations") {
  const auto pairs = pairs_from_grid(unit_interval(), 6);
  const Relation a = make_relation("sin-diff");
  const Relation b = make_relation("lin-prod");
  CHECK(l2_error(a, b, pairs) <= sup_error(a, b, pairs) + 1e-15);
  CHECK(l2_error(a, a, pairs) == 0.0);
  CHECK_THROWS_AS(l2_error(a, b, {}), InvalidArgument);
}

TEST_CASE("modulus_of_continuity: known Lipschitz relations") {
  const BoxDomain dom = unit_interval();
  const auto probes = quasirandom_pairs(dom, 48, 3);

  const Relation konst = Relation::black_box([](const Point&, const Point&) { return 7.0; });
  CHECK(modulus_of_continuity(konst, dom, probes, 0.1) == 0.0);

  // r(x,y) = x - y is 1-Lipschitz in each argument: modulus(delta) <= 2 delta
  const Relation diff = Relation::black_box(
      [](const Point& x, const Point& y) { return x[0] - y[0]; });
  const double m_diff = modulus_of_continuity(diff, dom, probes, 0.1);
  CHECK(m_diff <= 0.2 + 1e-12);
  CHECK(m_diff > 0.0);

  // sin(3(x-y)) is 3-Lipschitz in each argument
  const Relation sin3 = make_relation("sin-diff");
  CHECK(modulus_of_continuity(sin3, dom, probes, 0.05) <= 0.3 + 1e-12);
}

TEST_CASE("modulus_of_continuity: monotone in delta by construction") {
  const BoxDomain dom = unit_interval();
  const auto probes = quasirandom_pairs(dom, 32, 11);
  const Relation r = make_relation("sin-diff");
  double prev = 0.0;
  for (double delta : {0.01, 0.02, 0.05, 0.1, 0.2}) {
    const double m = modulus_of_continuity(r, dom, probes, delta);
    CHECK(m >= prev);
    prev = m;
  }
}

TEST_CASE("check_symmetry: accepts kernels, rejects asymmetric relations") {
  const auto pairs = quasirandom_pairs(unit_interval(), 100, 17);
  CHECK_NOTHROW(check_symmetry(make_relation("rbf"), pairs));
  CHECK_NOTHROW(check_symmetry(make_relation("min-kernel"), pairs));
  const Relation asym = Relation::symmetric_kernel(
      [](const Point& x, const Point& y) { return x[0] - y[0]; });
  CHECK_THROWS_AS(check_symmetry(asym, pairs), InvalidArgument);
}

TEST_CASE("check_square_summable: honest decay passes, lying bound throws") {
  const auto probes = quasirandom_points(unit_interval(), 64, 23);
  FeaturePair geo = make_feature_pair("geom-pair");
  CHECK_NOTHROW(check_square_summable(geo, probes));

  FeaturePair lying = geo;
  lying.tail_bound = [](int) { return 1e-30; };  // far below the true tail
  CHECK_THROWS_AS(check_square_summable(lying, probes), InvalidArgument);

  FeaturePair silent = geo;
  silent.tail_bound = nullptr;  // no claim, nothing to check
  CHECK_NOTHROW(check_square_summable(silent, probes));
}

TEST_CASE("registry: ids resolve and unknown ids fail with the catalogue") {
  for (const auto& id : relation_ids()) CHECK_NOTHROW(make_relation(id));
  for (const auto& id : feature_pair_ids()) CHECK_NOTHROW(make_feature_pair(id));
  CHECK_THROWS_AS(make_relation("no-such-relation"), InvalidArgument);
  CHECK_THROWS_AS(make_feature_pair("no-such-pair"), InvalidArgument);
  CHECK_THROWS_AS(make_utility("no-such-utility"), InvalidArgument);

  // parameterized construction
  const Relation fast = make_relation("sin-diff", {6.0});
  const Relation slow = make_relation("sin-diff", {3.0});
  CHECK(fast(pt1(0.2), pt1(0.0)) == doctest::Approx(std::sin(1.2)));
  CHECK(slow(pt1(0.2), pt1(0.0)) == doctest::Approx(std::sin(0.6)));
  CHECK_THROWS_AS(make_feature_pair("geom-pair", {1.5}), InvalidArgument);
}

TEST_CASE("registry: utilities evaluate their closed forms") {
  const UtilityFn nsq = make_utility("neg-sqdist");
  CHECK(nsq(pt1(0.5), pt1(0.1)) == doctest::Approx(-0.16));
  const UtilityFn dot = make_utility("dot");
  CHECK(dot(pt2(1.0, 2.0), pt2(3.0, 4.0)) == doctest::Approx(11.0));

  Eigen::MatrixXd table(2, 2);
  table << 0.0, 1.0, 2.0, 3.0;
  const UtilityFn tab = make_table_utility({pt1(0.0), pt1(1.0)}, table);
  CHECK(tab(pt1(0.1), pt1(0.9)) == 1.0);
  CHECK(tab(pt1(0.9), pt1(0.9)) == 3.0);
  CHECK_THROWS_AS(make_table_utility({pt1(0.0)}, table), InvalidArgument);
}
