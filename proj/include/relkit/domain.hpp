#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

namespace relkit {

using Point = Eigen::VectorXd;
using PointPair = std::pair<Point, Point>;

// Axis-aligned box in R^dim, the compact domain every approximator is
// built over. Immutable after construction.
class BoxDomain {
 public:
  BoxDomain(Eigen::VectorXd lower, Eigen::VectorXd upper);

  int dim() const { return static_cast<int>(lower_.size()); }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }

  // max Euclidean norm over the box = norm of the per-axis farthest corner
  double radius() const;
  // Euclidean diameter = ||upper - lower||
  double diameter() const;
  Eigen::VectorXd center() const { return 0.5 * (lower_ + upper_); }

  bool contains(const Point& x, double tol = 0.0) const;
  // Per-coordinate projection onto the box. Never moves a coordinate past
  // the base value, so ||clamp(x + u) - x|| <= ||u|| for x in the box.
  Point clamp(Point x) const;

 private:
  Eigen::VectorXd lower_, upper_;
};

// Regular lattice with per_axis points per axis, corners included,
// ordered lexicographically by axis index (first axis slowest).
// Throws BudgetExceeded when per_axis^dim > 10^7.
std::vector<Point> sample_grid(const BoxDomain& domain, int per_axis);

// `count` low-discrepancy points inside the box; deterministic for a
// given (domain, count, seed) on every platform.
std::vector<Point> quasirandom_points(const BoxDomain& domain, std::size_t count,
                                      std::uint64_t seed);

// Pairs (x, y) with both endpoints in the box, from one 2*dim sequence.
std::vector<PointPair> quasirandom_pairs(const BoxDomain& domain, std::size_t count,
                                         std::uint64_t seed);

}  // namespace relkit
