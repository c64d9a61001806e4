#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <vector>

#include "relkit/domain.hpp"

namespace relkit {

using RelationFn = std::function<double(const Point&, const Point&)>;

// Explicit feature-pair series r(x,y) = sum_{i<cap} phi(i,x) * phi_star(i,y).
// Coordinate indices are 0-based. `tail_bound(d)`, when set, is the declared
// sup bound on |sum_{i>=d} phi_i(x) phi_star_i(y)| over the domain.
struct FeaturePair {
  int cap = 0;
  std::function<double(int, const Point&)> phi;
  std::function<double(int, const Point&)> phi_star;
  std::function<double(int)> tail_bound;  // may be null: no declared decay
};

enum class RelationKind { BlackBox, FiniteMatrix, SymmetricKernel, FeaturePair };

// A relation function r: X x X -> R in one of four concrete forms.
// FiniteMatrix evaluates by nearest-element lookup (lowest index on ties),
// so the finite space's relation extends to all of R^dim.
class Relation {
 public:
  static Relation black_box(RelationFn f);
  static Relation finite_matrix(Eigen::MatrixXd R, std::vector<Point> elements);
  static Relation symmetric_kernel(RelationFn k);
  static Relation feature_pair(FeaturePair fp);

  RelationKind kind() const { return kind_; }
  double operator()(const Point& x, const Point& y) const;

  // FiniteMatrix accessors (InvalidArgument on other kinds)
  const Eigen::MatrixXd& matrix() const;
  const std::vector<Point>& elements() const;
  // FeaturePair accessor (InvalidArgument on other kinds)
  const FeaturePair& features() const;

 private:
  Relation() = default;
  RelationKind kind_ = RelationKind::BlackBox;
  RelationFn fn_;
  std::shared_ptr<const Eigen::MatrixXd> matrix_;
  std::shared_ptr<const std::vector<Point>> elements_;
  std::shared_ptr<const FeaturePair> fp_;
};

// max |r - r_hat| over the pair list; InvalidArgument when the list is empty.
double sup_error(const Relation& r, const Relation& r_hat,
                 const std::vector<PointPair>& pairs);

// root-mean-square |r - r_hat| over the pair list (companion metric to
// sup_error for reports).
double l2_error(const Relation& r, const Relation& r_hat,
                const std::vector<PointPair>& pairs);

// Empirical max of |r(x,y) - r(x',y')| over perturbations with
// ||x - x'|| <= delta and ||y - y'|| <= delta, both points clamped to the
// domain. 8 fixed quasi-random direction pairs per probe pair; radii from a
// fixed dyadic ladder intersected with (0, delta], so the perturbation set is
// nested across delta and the estimate is monotone in delta by construction.
double modulus_of_continuity(const Relation& r, const BoxDomain& domain,
                             const std::vector<PointPair>& probe_pairs, double delta);

// SymmetricKernel invariant: k(x,y) == k(y,x) on every sampled pair within
// 1e-12 relative. Throws InvalidArgument on violation.
void check_symmetry(const Relation& k, const std::vector<PointPair>& pairs);

// FeaturePair invariant: empirical tail-sum of squared coordinates at the cap
// stays below the declared bound on every probe point. No-op when the pair
// declares no bound. Throws InvalidArgument on violation.
void check_square_summable(const FeaturePair& fp, const std::vector<Point>& probes);

}  // namespace relkit
