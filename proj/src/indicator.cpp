#include "relkit/indicator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "relkit/errors.hpp"

namespace relkit {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::string activation_name(ActivationKind k) {
  return k == ActivationKind::HardThreshold ? "hard" : "sigmoid";
}

}  // namespace

std::vector<Point> place_landmarks(const BoxDomain& domain, double delta,
                                   std::size_t cap) {
  if (!(delta > 0.0))
    throw InvalidArgument("place_landmarks: delta must be > 0");
  const int dim = domain.dim();
  const double root_dim = std::sqrt(static_cast<double>(dim));

  // per-axis lattice sizes; count in double first so the budget check cannot
  // overflow before it fires
  std::vector<double> axis_count(dim);
  double total = 1.0;
  for (int i = 0; i < dim; ++i) {
    const double width = domain.upper()[i] - domain.lower()[i];
    axis_count[i] = (width * root_dim <= delta)
                        ? 1.0
                        : std::ceil(width * root_dim / delta) + 1.0;
    total *= axis_count[i];
  }
  if (total > static_cast<double>(cap)) {
    const double clamped =
        std::min(total, static_cast<double>(std::numeric_limits<std::size_t>::max() / 2));
    throw BudgetExceeded("place_landmarks: lattice for delta=" + std::to_string(delta) +
                             " needs " + std::to_string(static_cast<std::size_t>(clamped)) +
                             " landmarks, cap is " + std::to_string(cap),
                         static_cast<std::size_t>(clamped), delta);
  }

  std::vector<int> counts(dim);
  for (int i = 0; i < dim; ++i) counts[i] = static_cast<int>(axis_count[i]);

  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(total));
  std::vector<int> idx(dim, 0);
  while (true) {
    Point p(dim);
    for (int i = 0; i < dim; ++i) {
      const double lo = domain.lower()[i], up = domain.upper()[i];
      if (counts[i] == 1) {
        p[i] = 0.5 * (lo + up);
      } else if (idx[i] == counts[i] - 1) {
        p[i] = up;  // land on the endpoint exactly
      } else {
        p[i] = lo + idx[i] * ((up - lo) / (counts[i] - 1));
      }
    }
    out.push_back(std::move(p));
    int axis = dim - 1;  // last axis fastest, matching grid sampling order
    while (axis >= 0 && ++idx[axis] == counts[axis]) idx[axis--] = 0;
    if (axis < 0) break;
  }
  return out;
}

IndicatorNetwork build_indicator_network(const std::vector<Point>& landmarks,
                                         Activation activation) {
  const std::size_t n = landmarks.size();
  if (n == 0) throw InvalidArgument("build_indicator_network: no landmarks");
  const Eigen::Index dim = landmarks[0].size();
  if (dim < 1) throw InvalidArgument("build_indicator_network: zero-dimensional landmark");
  for (const Point& p : landmarks)
    if (p.size() != dim)
      throw InvalidArgument("build_indicator_network: landmarks of mixed dimension");
  if (activation.kind == ActivationKind::Sigmoid && !(activation.beta_act > 0.0))
    throw InvalidArgument("build_indicator_network: beta_act must be > 0");

  // duplicates must be adjacent after a lexicographic sort
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      if (landmarks[a][c] != landmarks[b][c]) return landmarks[a][c] < landmarks[b][c];
    }
    return a < b;
  });
  for (std::size_t s = 1; s < n; ++s) {
    const std::size_t a = order[s - 1], b = order[s];
    if (landmarks[a] == landmarks[b]) {
      throw InvalidArgument("build_indicator_network: landmarks " +
                            std::to_string(std::min(a, b)) + " and " +
                            std::to_string(std::max(a, b)) + " coincide");
    }
  }

  IndicatorNetwork net;
  net.landmarks_.resize(static_cast<Eigen::Index>(n), dim);
  for (std::size_t i = 0; i < n; ++i) net.landmarks_.row(static_cast<Eigen::Index>(i)) = landmarks[i];
  net.act_ = activation;
  return net;
}

std::pair<Eigen::VectorXd, double> IndicatorNetwork::first_layer_unit(int k, int j) const {
  if (k == j || k < 0 || j < 0 || k >= size() || j >= size())
    throw InvalidArgument("first_layer_unit: need distinct indices in [0, n)");
  const Eigen::VectorXd w = landmarks_.row(k) - landmarks_.row(j);
  const double b = 0.5 * w.dot(Eigen::VectorXd(landmarks_.row(k) + landmarks_.row(j)));
  return {w, b};
}

Eigen::VectorXd eval_indicator_raw(const IndicatorNetwork& net, const Point& x) {
  const int n = net.size();
  if (n == 0) throw InvalidArgument("eval_indicator_raw: empty network");
  if (x.size() != net.dim())
    throw InvalidArgument("eval_indicator_raw: point dimension mismatch");

  // unit (k,j) preactivation: <x_k - x_j, x> - 0.5*(|x_k|^2 - |x_j|^2),
  // i.e. 0.5*(|x - x_j|^2 - |x - x_k|^2); cache the dot products once
  const Eigen::VectorXd t = net.landmarks() * x;
  const Eigen::VectorXd q = net.landmarks().rowwise().squaredNorm();

  Eigen::VectorXd out(n);
  if (net.activation().kind == ActivationKind::HardThreshold) {
    for (int k = 0; k < n; ++k) {
      int count = 0;  // integer counts keep the second-layer bias comparison exact
      for (int j = 0; j < n; ++j) {
        if (j == k) continue;
        if (t[k] - t[j] - 0.5 * (q[k] - q[j]) >= 0.0) ++count;
      }
      out[k] = (count >= n - 1) ? 1.0 : 0.0;
    }
  } else {
    const double beta = net.activation().beta_act;
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == k) continue;
        s += sigmoid(beta * (t[k] - t[j] - 0.5 * (q[k] - q[j])));
      }
      // soft counting can never reach n-1 exactly, so the soft path tests
      // against n-3/2; for integer counts that midpoint separates the same
      // two outcomes as the bias n-1
      out[k] = sigmoid(beta * (s - (n - 1.5)));
    }
  }
  return out;
}

Eigen::VectorXd eval_indicator(const IndicatorNetwork& net, const Point& x) {
  Eigen::VectorXd raw = eval_indicator_raw(net, x);
  if (net.activation().kind == ActivationKind::Sigmoid) return raw;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(raw.size());
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    if (raw[i] == 1.0) {  // lowest lit cell wins boundary ties
      out[i] = 1.0;
      break;
    }
  }
  return out;
}

int cell_index(const IndicatorNetwork& net, const Point& x) {
  const Eigen::VectorXd raw = eval_indicator_raw(net, x);
  int best = 0;
  for (Eigen::Index i = 1; i < raw.size(); ++i)
    if (raw[i] > raw[best]) best = static_cast<int>(i);
  return best;
}

int quantize(const std::vector<Point>& landmarks, const Point& x) {
  if (landmarks.empty()) throw InvalidArgument("quantize: no landmarks");
  int best = 0;
  double best_d = (x - landmarks[0]).squaredNorm();
  for (std::size_t i = 1; i < landmarks.size(); ++i) {
    const double d = (x - landmarks[i]).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

nlohmann::json indicator_to_json(const IndicatorNetwork& net) {
  nlohmann::json j;
  j["version"] = 1;
  j["dim"] = net.dim();
  nlohmann::json lms = nlohmann::json::array();
  for (int i = 0; i < net.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < net.dim(); ++c) row.push_back(net.landmarks()(i, c));
    lms.push_back(std::move(row));
  }
  j["landmarks"] = std::move(lms);
  j["activation"] = activation_name(net.activation().kind);
  j["beta_act"] = net.activation().beta_act;
  return j;
}

IndicatorNetwork indicator_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != 1)
      throw InvalidArgument("indicator_from_json: unsupported version");
    const int dim = j.at("dim").get<int>();
    std::vector<Point> landmarks;
    for (const auto& row : j.at("landmarks")) {
      Point p(dim);
      if (static_cast<int>(row.size()) != dim)
        throw InvalidArgument("indicator_from_json: landmark/dim mismatch");
      for (int c = 0; c < dim; ++c) p[c] = row.at(c).get<double>();
      landmarks.push_back(std::move(p));
    }
    const std::string act = j.at("activation").get<std::string>();
    Activation a;
    if (act == "hard") {
      a = Activation::hard();
      a.beta_act = j.at("beta_act").get<double>();
    } else if (act == "sigmoid") {
      a = Activation::sigmoid(j.at("beta_act").get<double>());
    } else {
      throw InvalidArgument("indicator_from_json: unknown activation '" + act + "'");
    }
    return build_indicator_network(landmarks, a);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("indicator_from_json: malformed document: ") + e.what());
  }
}

}  // namespace relkit
