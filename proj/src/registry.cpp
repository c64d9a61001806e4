#include "relkit/registry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "relkit/errors.hpp"
#include "relkit/indicator.hpp"

namespace relkit {

namespace {

std::string join(const std::vector<std::string>& ids) {
  std::string s;
  for (const auto& id : ids) s += (s.empty() ? "" : ", ") + id;
  return s;
}

double sum_diff(const Point& x, const Point& y) { return (x - y).sum(); }

void require_scalar(const Point& x, const Point& y, const char* id) {
  if (x.size() != 1 || y.size() != 1)
    throw InvalidArgument(std::string(id) + " is 1-D only");
}

}  // namespace

const std::vector<std::string>& relation_ids() {
  static const std::vector<std::string> ids = {"sin-diff",   "lin-prod", "order-sign",
                                               "min-kernel", "rbf",      "poly-pair"};
  return ids;
}

const std::vector<std::string>& feature_pair_ids() {
  static const std::vector<std::string> ids = {"poly-pair", "geom-pair"};
  return ids;
}

const std::vector<std::string>& utility_ids() {
  static const std::vector<std::string> ids = {"neg-sqdist", "dot", "custom-table"};
  return ids;
}

Relation make_relation(const std::string& id, const std::vector<double>& params) {
  if (id == "sin-diff") {
    const double gamma = params.empty() ? 3.0 : params[0];
    return Relation::black_box([gamma](const Point& x, const Point& y) {
      return std::sin(gamma * sum_diff(x, y));
    });
  }
  if (id == "lin-prod") {
    return Relation::black_box([](const Point& x, const Point& y) { return x.dot(y); });
  }
  if (id == "order-sign") {
    const double gamma = params.empty() ? 4.0 : params[0];
    return Relation::black_box([gamma](const Point& x, const Point& y) {
      return std::tanh(gamma * sum_diff(y, x));
    });
  }
  if (id == "min-kernel") {
    return Relation::symmetric_kernel([](const Point& x, const Point& y) {
      require_scalar(x, y, "min-kernel");
      return std::min(x[0], y[0]);
    });
  }
  if (id == "rbf") {
    const double bw = params.empty() ? 1.0 : params[0];
    if (!(bw > 0.0)) throw InvalidArgument("rbf: bandwidth must be > 0");
    return Relation::symmetric_kernel([bw](const Point& x, const Point& y) {
      return std::exp(-(x - y).squaredNorm() / (2.0 * bw * bw));
    });
  }
  if (id == "poly-pair") {
    return Relation::feature_pair(make_feature_pair("poly-pair"));
  }
  throw InvalidArgument("make_relation: unknown relation '" + id +
                        "'; known: " + join(relation_ids()));
}

FeaturePair make_feature_pair(const std::string& id, const std::vector<double>& params) {
  if (id == "poly-pair") {
    FeaturePair fp;
    fp.cap = 2;
    fp.phi = [](int i, const Point& x) {
      if (x.size() != 1) throw InvalidArgument("poly-pair is 1-D only");
      return i == 0 ? x[0] : x[0] * x[0];
    };
    fp.phi_star = [](int i, const Point& y) {
      if (y.size() != 1) throw InvalidArgument("poly-pair is 1-D only");
      return i == 0 ? y[0] * y[0] : y[0];
    };
    return fp;
  }
  if (id == "geom-pair") {
    const double ratio = params.empty() ? 0.5 : params[0];
    const int cap = params.size() > 1 ? static_cast<int>(params[1]) : 24;
    if (!(ratio > 0.0 && ratio < 1.0))
      throw InvalidArgument("geom-pair: ratio must be in (0,1)");
    if (cap < 1) throw InvalidArgument("geom-pair: cap must be >= 1");
    FeaturePair fp;
    fp.cap = cap;
    auto coord = [ratio](int i, const Point& x) {
      if (x.size() != 1) throw InvalidArgument("geom-pair is 1-D only");
      return std::pow(ratio, 0.5 * i) * std::cos(i * std::numbers::pi * x[0]);
    };
    fp.phi = coord;
    fp.phi_star = coord;
    // |Phi_i|^2 <= ratio^i, so the square-sum beyond d is at most the full
    // geometric tail
    fp.tail_bound = [ratio](int d) { return std::pow(ratio, d) / (1.0 - ratio); };
    return fp;
  }
  throw InvalidArgument("make_feature_pair: unknown pair '" + id +
                        "'; known: " + join(feature_pair_ids()));
}

UtilityFn make_utility(const std::string& id, const std::vector<double>& params) {
  (void)params;
  if (id == "neg-sqdist") {
    return [](const Point& q, const Point& x) { return -(q - x).squaredNorm(); };
  }
  if (id == "dot") {
    return [](const Point& q, const Point& x) { return q.dot(x); };
  }
  if (id == "custom-table") {
    throw InvalidArgument(
        "make_utility: custom-table carries data; build it with make_table_utility");
  }
  throw InvalidArgument("make_utility: unknown utility '" + id +
                        "'; known: " + join(utility_ids()));
}

UtilityFn make_table_utility(std::vector<Point> anchors, Eigen::MatrixXd table) {
  const int n = static_cast<int>(anchors.size());
  if (n == 0) throw InvalidArgument("make_table_utility: no anchors");
  if (table.rows() != n || table.cols() != n)
    throw InvalidArgument("make_table_utility: table must be " + std::to_string(n) +
                          "x" + std::to_string(n));
  if (!table.allFinite())
    throw InvalidArgument("make_table_utility: table has non-finite entries");
  return [anchors = std::move(anchors), table = std::move(table)](const Point& q,
                                                                  const Point& x) {
    return table(quantize(anchors, q), quantize(anchors, x));
  };
}

}  // namespace relkit
