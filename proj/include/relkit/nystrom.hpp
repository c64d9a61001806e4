#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "relkit/domain.hpp"
#include "relkit/relation.hpp"

namespace relkit {

// Symmetric PD kernel with an optional registry identity; kernels without an
// id evaluate fine but cannot be serialized.
struct Kernel {
  std::string id;
  std::vector<double> params;
  RelationFn fn;

  double operator()(const Point& x, const Point& y) const { return fn(x, y); }
};

// Built-ins: "rbf" {bandwidth}, "linear" {}, "min" {} (1-D), "polynomial"
// {degree, offset}.
Kernel make_kernel(const std::string& id, const std::vector<double>& params = {});

// Truncated spectral feature map from the eigendecomposition of the scaled
// landmark Gram G = (1/m)[k(z_i,z_j)].  Coordinate i of a point x:
//   phi_i(x) = eigval_i^{-1/2} * (1/sqrt(m)) * sum_j U_{ji} k(x, z_j)
// so on landmarks <phi(z_a), phi(z_b)> is the rank-d Nystrom reconstruction
// of the Gram.
class NystromFeatureMap {
 public:
  NystromFeatureMap() = default;
  NystromFeatureMap(std::vector<Point> landmarks, Eigen::VectorXd eigvals,
                    Eigen::MatrixXd eigvecs, int d, Kernel kernel);

  int landmark_count() const { return static_cast<int>(landmarks_.size()); }
  int truncation() const { return d_; }
  const std::vector<Point>& landmarks() const { return landmarks_; }
  const Eigen::VectorXd& eigvals() const { return eigvals_; }  // descending, of G
  const Eigen::MatrixXd& eigvecs() const { return eigvecs_; }  // matching columns
  const Kernel& kernel() const { return kernel_; }

  Eigen::VectorXd features(const Point& x) const;              // length d
  double reconstruct(const Point& x, const Point& y) const;    // <phi(x), phi(y)>

 private:
  std::vector<Point> landmarks_;
  Eigen::VectorXd eigvals_;
  Eigen::MatrixXd eigvecs_;
  int d_ = 0;
  Kernel kernel_;
};

// Smallest d whose rank-d reconstruction matches the landmark Gram to
// sup-error epsilon; the empirical surrogate for the spectrum-decay level.
int estimate_spectrum_decay(const Kernel& kernel, const std::vector<Point>& landmarks,
                            double epsilon);

// Max over retained coordinates and eval points of |phi_i(x)|.
double estimate_eigenfunction_bound(const NystromFeatureMap& fm,
                                    const std::vector<Point>& eval_points);

// Max-norm gap between the landmark Gram and its rank-d reconstruction.
double landmark_residual(const NystromFeatureMap& fm, int d);

// Deterministic landmark layout: lattice for dim <= 2 (with a fixed
// quasi-random top-up to exactly m), quasi-random for dim >= 3.
std::vector<Point> default_landmarks(const BoxDomain& domain, int m);

struct SymmetricBuildOptions {
  std::uint64_t seed = 0;
  int heldout_pairs = 1000;
  bool certify = true;
};

struct SymmetricBuild {
  NystromFeatureMap map;
  double sup_error_heldout = 0.0;
  double l2_error_heldout = 0.0;
  std::vector<PointPair> heldout;
};

SymmetricBuild build_symmetric_features(const Kernel& kernel, const BoxDomain& domain,
                                        double epsilon, int m,
                                        const SymmetricBuildOptions& opts = {});

bool psd_check(const Eigen::MatrixXd& gram, double tol);

// Formula calculators for reporting; constants inside the O(.) are taken as
// 1 and results are order-of-magnitude only.
struct NeuronBudget {
  double value = 0.0;        // +inf when the direct evaluation overflows
  double log10_value = 0.0;  // always finite for positive inputs
  bool overflow = false;
};

NeuronBudget neuron_budget_relu(int d_r, double C, double L, double epsilon, int dim);
NeuronBudget neuron_budget_barron(int d_r, double C, double radius, double B,
                                  double epsilon);

struct TruncatedFeaturePair {
  int d = 0;
  RelationFn evaluator;  // (x,y) -> sum_{i<d} phi_i(x) phi*_i(y)
};

// Smallest truncation level matching the cap-length series to epsilon/2 on
// the eval pairs.  A declared square-sum tail bound exceeding epsilon/2 at
// the cap means the cap itself cannot witness the target.
TruncatedFeaturePair truncate_feature_pair(const FeaturePair& fp,
                                           const std::vector<PointPair>& eval_pairs,
                                           double epsilon);

nlohmann::json feature_map_to_json(const NystromFeatureMap& fm);
NystromFeatureMap feature_map_from_json(const nlohmann::json& j);

}  // namespace relkit
