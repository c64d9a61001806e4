#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "relkit/attention.hpp"
#include "relkit/relation.hpp"

namespace relkit {

// Built-in relations:
//   sin-diff   {gamma=3}     sin(gamma * sum_i (x_i - y_i))
//   lin-prod   {}            <x, y>
//   order-sign {gamma=4}     tanh(gamma * sum_i (y_i - x_i)), antisymmetric
//   min-kernel {}            min(x, y), 1-D
//   rbf        {bandwidth=1} exp(-|x-y|^2 / (2 bw^2))
//   poly-pair  {}            x*y^2 + x^2*y, 1-D (the poly-pair series in closed form)
Relation make_relation(const std::string& id, const std::vector<double>& params = {});

// Built-in feature pairs:
//   poly-pair {}                   Phi = (x, x^2), Phi* = (y^2, y); cap 2
//   geom-pair {ratio=0.5, cap=24}  Phi_i = Phi*_i = ratio^{i/2} cos(i pi x); declared
//                                  square-sum tail ratio^d/(1-ratio)
FeaturePair make_feature_pair(const std::string& id, const std::vector<double>& params = {});

// Built-in utilities:
//   neg-sqdist {}  u(q,x) = -|q-x|^2
//   dot        {}  u(q,x) = <q, x>
// "custom-table" requires data; construct it with make_table_utility.
UtilityFn make_utility(const std::string& id, const std::vector<double>& params = {});

// Utility from a finite table: u(q,x) = table(a(q), a(x)) where a(.) is the
// nearest-anchor index.
UtilityFn make_table_utility(std::vector<Point> anchors, Eigen::MatrixXd table);

const std::vector<std::string>& relation_ids();
const std::vector<std::string>& feature_pair_ids();
const std::vector<std::string>& utility_ids();

}  // namespace relkit
