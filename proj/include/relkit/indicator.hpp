#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <utility>
#include <vector>

#include <json.hpp>

#include "relkit/domain.hpp"

namespace relkit {

enum class ActivationKind { HardThreshold, Sigmoid };

struct Activation {
  ActivationKind kind = ActivationKind::HardThreshold;
  double beta_act = 1e4;  // steepness; used by Sigmoid only

  static Activation hard() { return {ActivationKind::HardThreshold, 1e4}; }
  static Activation sigmoid(double beta_act = 1e4) {
    return {ActivationKind::Sigmoid, beta_act};
  }
};

// Two-layer threshold network that one-hot encodes Voronoi membership over a
// landmark set.  First layer: n(n-1) units, unit (k,j) has weight x_k - x_j
// and bias 0.5*<x_k - x_j, x_k + x_j>, so its preactivation at x equals
// 0.5*(|x - x_j|^2 - |x - x_k|^2).  Second layer: unit k counts its n-1
// first-layer units against the bias n-1.  Weights are never stored; they are
// determined by the landmarks.
class IndicatorNetwork {
 public:
  IndicatorNetwork() = default;

  int size() const { return static_cast<int>(landmarks_.rows()); }
  int dim() const { return static_cast<int>(landmarks_.cols()); }
  const Eigen::MatrixXd& landmarks() const { return landmarks_; }  // row i = landmark i
  const Activation& activation() const { return act_; }

  // first-layer unit (k,j), k != j, 0-based
  std::pair<Eigen::VectorXd, double> first_layer_unit(int k, int j) const;

 private:
  friend IndicatorNetwork build_indicator_network(const std::vector<Point>& landmarks,
                                                  Activation activation);
  Eigen::MatrixXd landmarks_;
  Activation act_;
};

// Regular lattice over the box with per-axis spacing <= delta/sqrt(dim), so
// every Voronoi cell has diameter <= delta.  An axis whose width*sqrt(dim)
// fits inside delta contributes a single centered coordinate.
std::vector<Point> place_landmarks(const BoxDomain& domain, double delta,
                                   std::size_t cap = 100000);

IndicatorNetwork build_indicator_network(const std::vector<Point>& landmarks,
                                         Activation activation);

// Raw network outputs, before any tie-breaking: {0,1} coordinates (possibly
// several lit on cell boundaries) under HardThreshold, values in (0,1) under
// Sigmoid.
Eigen::VectorXd eval_indicator_raw(const IndicatorNetwork& net, const Point& x);

// Voronoi code: under HardThreshold exactly one coordinate is 1 (boundary
// ties keep the lowest index); under Sigmoid the raw soft outputs pass
// through unchanged.
Eigen::VectorXd eval_indicator(const IndicatorNetwork& net, const Point& x);

// Index of the cell x falls in, ties to the lowest index.
int cell_index(const IndicatorNetwork& net, const Point& x);

// Brute-force nearest-landmark index, ties to the lowest index.  Oracle for
// eval_indicator under HardThreshold.
int quantize(const std::vector<Point>& landmarks, const Point& x);

nlohmann::json indicator_to_json(const IndicatorNetwork& net);
IndicatorNetwork indicator_from_json(const nlohmann::json& j);

}  // namespace relkit
