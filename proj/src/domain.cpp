#include "relkit/domain.hpp"

#include <cmath>
#include <string>

#include "relkit/errors.hpp"
#include "relkit/rng.hpp"

namespace relkit {

BoxDomain::BoxDomain(Eigen::VectorXd lower, Eigen::VectorXd upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() == 0 || lower_.size() != upper_.size())
    throw InvalidArgument("BoxDomain: bound vectors must be nonempty and of equal length");
  for (Eigen::Index i = 0; i < lower_.size(); ++i) {
    if (!(lower_[i] < upper_[i]))
      throw InvalidArgument("BoxDomain: lower[" + std::to_string(i) +
                            "] must be strictly below upper[" + std::to_string(i) + "]");
    if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]))
      throw InvalidArgument("BoxDomain: bounds must be finite");
  }
}

double BoxDomain::radius() const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < lower_.size(); ++i)
    s += std::max(lower_[i] * lower_[i], upper_[i] * upper_[i]);
  return std::sqrt(s);
}

double BoxDomain::diameter() const { return (upper_ - lower_).norm(); }

bool BoxDomain::contains(const Point& x, double tol) const {
  if (x.size() != lower_.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x[i] < lower_[i] - tol || x[i] > upper_[i] + tol) return false;
  return true;
}

Point BoxDomain::clamp(Point x) const {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    x[i] = std::min(std::max(x[i], lower_[i]), upper_[i]);
  return x;
}

std::vector<Point> sample_grid(const BoxDomain& domain, int per_axis) {
  if (per_axis < 2) throw InvalidArgument("sample_grid: per_axis must be >= 2");
  const int dim = domain.dim();
  double total = std::pow(static_cast<double>(per_axis), dim);
  if (total > 1e7)
    throw BudgetExceeded("sample_grid: " + std::to_string(per_axis) + "^" +
                             std::to_string(dim) + " points exceeds the 1e7 budget",
                         static_cast<std::size_t>(std::min(total, 1e18)),
                         std::numeric_limits<double>::quiet_NaN());
  const auto n = static_cast<std::size_t>(total + 0.5);

  std::vector<Point> points;
  points.reserve(n);
  std::vector<int> idx(dim, 0);
  Point p(dim);
  for (std::size_t c = 0; c < n; ++c) {
    for (int a = 0; a < dim; ++a) {
      const double t = static_cast<double>(idx[a]) / (per_axis - 1);
      p[a] = domain.lower()[a] + t * (domain.upper()[a] - domain.lower()[a]);
    }
    points.push_back(p);
    // odometer increment, last axis fastest => lexicographic by axis index
    for (int a = dim - 1; a >= 0; --a) {
      if (++idx[a] < per_axis) break;
      idx[a] = 0;
    }
  }
  return points;
}

std::vector<Point> quasirandom_points(const BoxDomain& domain, std::size_t count,
                                      std::uint64_t seed) {
  const int dim = domain.dim();
  QuasiRandom qr(dim, seed);
  std::vector<Point> points;
  points.reserve(count);
  std::vector<double> buf(dim);
  Point p(dim);
  for (std::size_t c = 0; c < count; ++c) {
    qr.next(buf.data());
    for (int a = 0; a < dim; ++a)
      p[a] = domain.lower()[a] + buf[a] * (domain.upper()[a] - domain.lower()[a]);
    points.push_back(p);
  }
  return points;
}

std::vector<PointPair> quasirandom_pairs(const BoxDomain& domain, std::size_t count,
                                         std::uint64_t seed) {
  const int dim = domain.dim();
  QuasiRandom qr(2 * dim, seed);
  std::vector<PointPair> pairs;
  pairs.reserve(count);
  std::vector<double> buf(2 * dim);
  Point x(dim), y(dim);
  for (std::size_t c = 0; c < count; ++c) {
    qr.next(buf.data());
    for (int a = 0; a < dim; ++a) {
      x[a] = domain.lower()[a] + buf[a] * (domain.upper()[a] - domain.lower()[a]);
      y[a] = domain.lower()[a] + buf[dim + a] * (domain.upper()[a] - domain.lower()[a]);
    }
    pairs.emplace_back(x, y);
  }
  return pairs;
}

}  // namespace relkit
