#include <doctest.h>

#include <cmath>
#include <string>

#include "relkit/domain.hpp"
#include "relkit/errors.hpp"
#include "relkit/indicator.hpp"

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

BoxDomain unit_square() {
  return BoxDomain(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2));
}

std::vector<Point> two_landmarks() { return {pt1(0.0), pt1(1.0)}; }

// Independent argmin scan; duplicates quantize's contract without its code.
int argmin_distance(const std::vector<Point>& landmarks, const Point& x) {
  int best = 0;
  for (std::size_t i = 1; i < landmarks.size(); ++i)
    if ((x - landmarks[i]).norm() < (x - landmarks[best]).norm())
      best = static_cast<int>(i);
  return best;
}

// gap between the two smallest landmark distances
double distance_gap(const std::vector<Point>& landmarks, const Point& x) {
  double d1 = std::numeric_limits<double>::infinity(), d2 = d1;
  for (const Point& l : landmarks) {
    const double d = (x - l).norm();
    if (d < d1) {
      d2 = d1;
      d1 = d;
    } else if (d < d2) {
      d2 = d;
    }
  }
  return d2 - d1;
}

}  // namespace

TEST_CASE("place_landmarks: 1-D lattices match the closed form") {
  const auto three = place_landmarks(unit_interval(), 0.5);
  REQUIRE(three.size() == 3);
  CHECK(three[0][0] == doctest::Approx(0.0));
  CHECK(three[1][0] == doctest::Approx(0.5));
  CHECK(three[2][0] == doctest::Approx(1.0));

  // delta exceeding the diameter collapses to the single centered landmark
  const auto one = place_landmarks(unit_interval(), 2.0);
  REQUIRE(one.size() == 1);
  CHECK(one[0][0] == doctest::Approx(0.5));
}

TEST_CASE("place_landmarks: 2-D lattice spacing respects delta/sqrt(dim)") {
  const auto grid = place_landmarks(unit_square(), 0.2);
  CHECK(grid.size() == 81);  // 9 per axis: ceil(sqrt(2)/0.2) + 1

  // diameter guarantee, brute force: every grid sample sits within delta/2
  // of some landmark
  const auto samples = sample_grid(unit_square(), 41);
  for (const Point& x : samples) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const Point& l : grid) nearest = std::min(nearest, (x - l).norm());
    CHECK(nearest <= 0.1 + 1e-12);
  }
}

TEST_CASE("place_landmarks: cap rejection carries the computed count") {
  const BoxDomain dom5(Eigen::VectorXd::Zero(5), Eigen::VectorXd::Ones(5));
  CHECK_THROWS_AS(place_landmarks(dom5, 0.01), BudgetExceeded);
  try {
    place_landmarks(dom5, 0.01);
  } catch (const BudgetExceeded& e) {
    CHECK(e.count > 100000u);
    CHECK(std::string(e.what()).find(std::to_string(e.count)) != std::string::npos);
  }
  CHECK_THROWS_AS(place_landmarks(unit_interval(), 0.0), InvalidArgument);
  CHECK_THROWS_AS(place_landmarks(unit_interval(), -1.0), InvalidArgument);
}

TEST_CASE("build_indicator_network: first-layer weights follow the landmark formula") {
  const auto net = build_indicator_network(two_landmarks(), Activation::hard());
  CHECK(net.size() == 2);
  CHECK(net.dim() == 1);

  const auto [w01, b01] = net.first_layer_unit(0, 1);
  CHECK(w01[0] == doctest::Approx(-1.0));
  CHECK(b01 == doctest::Approx(-0.5));
  const auto [w10, b10] = net.first_layer_unit(1, 0);
  CHECK(w10[0] == doctest::Approx(1.0));
  CHECK(b10 == doctest::Approx(0.5));

  const auto net2 =
      build_indicator_network({pt2(0.0, 0.0), pt2(1.0, 1.0)}, Activation::hard());
  const auto [w, b] = net2.first_layer_unit(0, 1);
  CHECK(w[0] == doctest::Approx(-1.0));
  CHECK(w[1] == doctest::Approx(-1.0));
  CHECK(b == doctest::Approx(-1.0));

  CHECK_THROWS_AS(net.first_layer_unit(0, 0), InvalidArgument);
  CHECK_THROWS_AS(net.first_layer_unit(2, 0), InvalidArgument);
}

TEST_CASE("build_indicator_network: preactivation is the half-distance difference") {
  // unit (k,j) preactivation at x must equal 0.5(|x-x_j|^2 - |x-x_k|^2)
  const std::vector<Point> lm = {pt2(0.1, 0.7), pt2(0.9, 0.2), pt2(0.4, 0.4)};
  const auto net = build_indicator_network(lm, Activation::hard());
  const auto xs = quasirandom_points(unit_square(), 50, 5);
  for (const Point& x : xs)
    for (int k = 0; k < 3; ++k)
      for (int j = 0; j < 3; ++j) {
        if (j == k) continue;
        const auto [w, b] = net.first_layer_unit(k, j);
        const double pre = w.dot(x) - b;
        const double oracle =
            0.5 * ((x - lm[j]).squaredNorm() - (x - lm[k]).squaredNorm());
        CHECK(pre == doctest::Approx(oracle).epsilon(1e-12));
      }
}

TEST_CASE("build_indicator_network: duplicates rejected naming the indices") {
  try {
    build_indicator_network({pt1(0.0), pt1(0.5), pt1(0.0)}, Activation::hard());
    FAIL("expected InvalidArgument");
  } catch (const InvalidArgument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("0") != std::string::npos);
    CHECK(msg.find("2") != std::string::npos);
  }
  CHECK_THROWS_AS(build_indicator_network({}, Activation::hard()), InvalidArgument);
}

TEST_CASE("eval_indicator: single landmark is the constant one") {
  const auto net = build_indicator_network({pt1(0.3)}, Activation::hard());
  for (double x : {-1.0, 0.0, 0.3, 2.0}) {
    const auto out = eval_indicator(net, pt1(x));
    REQUIRE(out.size() == 1);
    CHECK(out[0] == 1.0);
  }
}

TEST_CASE("eval_indicator: two-landmark membership and the boundary tie") {
  const auto net = build_indicator_network(two_landmarks(), Activation::hard());
  const auto at = [&](double x) { return eval_indicator(net, pt1(x)); };
  CHECK(at(0.2)[0] == 1.0);
  CHECK(at(0.2)[1] == 0.0);
  CHECK(at(0.9)[0] == 0.0);
  CHECK(at(0.9)[1] == 1.0);
  // exact boundary: both cells lit pre-tie-break, kept index 0
  const auto raw = eval_indicator_raw(net, pt1(0.5));
  CHECK(raw[0] == 1.0);
  CHECK(raw[1] == 1.0);
  const auto tied = at(0.5);
  CHECK(tied[0] == 1.0);
  CHECK(tied[1] == 0.0);
}

TEST_CASE("quantize: nearest landmark with lowest-index ties") {
  CHECK(quantize(two_landmarks(), pt1(0.2)) == 0);
  CHECK(quantize(two_landmarks(), pt1(0.5)) == 0);
  CHECK(quantize(two_landmarks(), pt1(0.51)) == 1);
  CHECK_THROWS_AS(quantize({}, pt1(0.0)), InvalidArgument);

  const auto grid = place_landmarks(unit_square(), 0.2);
  const auto xs = quasirandom_points(unit_square(), 500, 9);
  for (const Point& x : xs) CHECK(quantize(grid, x) == argmin_distance(grid, x));
}

TEST_CASE("eval_indicator: agrees with the quantize oracle off boundaries") {
  const auto landmarks = place_landmarks(unit_square(), 0.35);
  const auto net = build_indicator_network(landmarks, Activation::hard());
  const auto xs = quasirandom_points(unit_square(), 2000, 13);
  int checked = 0;
  for (const Point& x : xs) {
    if (distance_gap(landmarks, x) <= 1e-9) continue;
    ++checked;
    const auto out = eval_indicator(net, x);
    const int cell = quantize(landmarks, x);
    CHECK(out[cell] == 1.0);
    CHECK(out.sum() == 1.0);
    CHECK(cell_index(net, x) == cell);
  }
  CHECK(checked > 1900);
}

TEST_CASE("eval_indicator: outputs one-hot partition off boundaries") {
  const auto landmarks = place_landmarks(unit_interval(), 0.3);
  const auto net = build_indicator_network(landmarks, Activation::hard());
  for (const Point& x : quasirandom_points(unit_interval(), 400, 21)) {
    if (distance_gap(landmarks, x) <= 1e-9) continue;
    const auto out = eval_indicator(net, x);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      CHECK((out[i] == 0.0 || out[i] == 1.0));
      sum += out[i];
    }
    CHECK(sum == 1.0);
  }
}

TEST_CASE("eval_indicator: sigmoid surrogate rounds to the hard output") {
  const auto landmarks = place_landmarks(unit_square(), 0.5);
  const auto hard_net = build_indicator_network(landmarks, Activation::hard());
  const auto soft_net = build_indicator_network(landmarks, Activation::sigmoid());
  const auto mild_net = build_indicator_network(landmarks, Activation::sigmoid(10.0));
  for (const Point& x : quasirandom_points(unit_square(), 500, 31)) {
    if (distance_gap(landmarks, x) <= 0.01) continue;
    const auto hard = eval_indicator(hard_net, x);
    const auto soft = eval_indicator(soft_net, x);
    const auto mild = eval_indicator(mild_net, x);
    for (Eigen::Index i = 0; i < hard.size(); ++i) {
      // strictly inside (0,1) at mild steepness; saturation to exactly
      // 0/1 at beta_act = 1e4 is expected in double precision
      CHECK(mild[i] > 0.0);
      CHECK(mild[i] < 1.0);
      CHECK((soft[i] >= 0.5 ? 1.0 : 0.0) == hard[i]);
    }
  }
}

TEST_CASE("eval_indicator: sigmoid sharpens toward hard as beta_act grows") {
  const auto landmarks = place_landmarks(unit_interval(), 0.4);
  const auto hard_net = build_indicator_network(landmarks, Activation::hard());
  const Point x = pt1(0.37);
  const auto target = eval_indicator(hard_net, x);
  double prev_gap = std::numeric_limits<double>::infinity();
  for (double beta_act : {1e2, 1e3, 1e4, 1e5}) {
    const auto net = build_indicator_network(landmarks, Activation::sigmoid(beta_act));
    const double gap = (eval_indicator(net, x) - target).cwiseAbs().maxCoeff();
    CHECK(gap <= prev_gap + 1e-15);
    prev_gap = gap;
  }
  CHECK(prev_gap < 1e-3);
}

TEST_CASE("indicator JSON: round trip preserves landmarks and activation") {
  const auto landmarks = place_landmarks(unit_square(), 0.6);
  const auto net = build_indicator_network(landmarks, Activation::sigmoid(500.0));
  const auto restored = indicator_from_json(indicator_to_json(net));
  CHECK(restored.size() == net.size());
  CHECK(restored.dim() == net.dim());
  CHECK(restored.landmarks() == net.landmarks());
  CHECK(restored.activation().kind == ActivationKind::Sigmoid);
  CHECK(restored.activation().beta_act == 500.0);

  for (const Point& x : quasirandom_points(unit_square(), 50, 41))
    CHECK(eval_indicator(restored, x) == eval_indicator(net, x));

  nlohmann::json bad = indicator_to_json(net);
  bad.erase("landmarks");
  CHECK_THROWS_AS(indicator_from_json(bad), InvalidArgument);
}
