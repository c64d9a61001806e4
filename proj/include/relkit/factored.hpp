#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include <json.hpp>

#include "relkit/domain.hpp"
#include "relkit/indicator.hpp"
#include "relkit/relation.hpp"

namespace relkit {

struct Factorization {
  Eigen::MatrixXd P;  // m×n
  Eigen::MatrixXd Q;  // m×n
  int m = 0;
};

// Truncated SVD factorization R ≈ PᵀQ with P = Σ^{1/2}Uᵀ, Q = Σ^{1/2}Vᵀ.
// Retains singular values σ_k > tol·σ₁ (tol = 0 uses a machine-precision
// threshold), floored at one retained value, then extends the cut as needed
// so ‖R − PᵀQ‖_F ≤ max(tol, 1e−10)·‖R‖_F.
Factorization decompose_relation_matrix(const Eigen::MatrixXd& R, double tol);

// Pair scorer (x,y) ↦ ⟨P·η(x), Q·η(y)⟩ over a Voronoi one-hot code η.
class FactoredRelation {
 public:
  FactoredRelation() = default;
  FactoredRelation(Eigen::MatrixXd P, Eigen::MatrixXd Q, IndicatorNetwork net);

  int inner_dim() const { return static_cast<int>(P_.rows()); }
  int cells() const { return net_.size(); }
  const Eigen::MatrixXd& P() const { return P_; }
  const Eigen::MatrixXd& Q() const { return Q_; }
  const IndicatorNetwork& net() const { return net_; }

  Eigen::VectorXd phi(const Point& x) const;  // P·η(x)
  Eigen::VectorXd psi(const Point& y) const;  // Q·η(y)

 private:
  Eigen::MatrixXd P_, Q_;
  IndicatorNetwork net_;
};

double eval_factored(const FactoredRelation& fr, const Point& x, const Point& y);

struct BuildOptions {
  std::size_t landmark_cap = 100000;  // Voronoi cell budget
  std::size_t matrix_cap = 16384;     // largest n for which the dense n×n sample is built
  std::uint64_t seed = 0;
  int heldout_pairs = 1000;
  int probe_pairs = 48;  // pairs probed per modulus estimate during δ-bisection
  bool certify = true;
};

struct AsymmetricBuild {
  FactoredRelation relation;
  double delta = 0.0;  // quantization scale chosen by bisection
  double sup_error_heldout = 0.0;
  double l2_error_heldout = 0.0;
  std::vector<PointPair> heldout;  // the off-boundary evaluation set used
};

// Quantize-then-factor construction: bisect δ until the empirical modulus of
// continuity is ≤ ε/2, lay a lattice, sample R_{ij} = r(x_i, x_j), factor so
// the dropped spectral tail is ≤ ε/2, and certify on fresh off-boundary pairs.
AsymmetricBuild build_asymmetric_approximator(const Relation& r, const BoxDomain& domain,
                                              double epsilon,
                                              const BuildOptions& opts = {});

// r(x,y) = r_bar(ξ(x), ξ(y)) with the approximator built over the
// k-dimensional filter image, so the cell count scales with k rather than
// with the ambient dimension.
class ComposedRelation {
 public:
  ComposedRelation() = default;
  ComposedRelation(std::function<Point(const Point&)> filter, BoxDomain feature_box,
                   FactoredRelation fr);

  double operator()(const Point& x, const Point& y) const;
  const FactoredRelation& inner() const { return fr_; }
  const BoxDomain& feature_box() const { return feature_box_; }
  Point map(const Point& x) const;  // filter output, checked against the feature box

 private:
  std::function<Point(const Point&)> filter_;
  BoxDomain feature_box_{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)};
  FactoredRelation fr_;
};

struct CompositionalBuild {
  ComposedRelation relation;
  AsymmetricBuild inner;         // certification over the feature box
  double sup_error_original = 0.0;  // held-out errors measured on the original domain
  double l2_error_original = 0.0;
};

CompositionalBuild build_compositional_approximator(
    const Relation& r_bar, const std::function<Point(const Point&)>& filter,
    const BoxDomain& filter_domain_image, const BoxDomain& original_domain,
    double epsilon, const BuildOptions& opts = {});

// distance-gap between the two nearest landmarks of x; +inf for a single
// landmark (no boundary exists)
double boundary_gap(const IndicatorNetwork& net, const Point& x);

nlohmann::json factored_to_json(const FactoredRelation& fr);
FactoredRelation factored_from_json(const nlohmann::json& j);

}  // namespace relkit
