#include "relkit/nystrom.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "relkit/errors.hpp"
#include "relkit/rng.hpp"

namespace relkit {

namespace {

Eigen::MatrixXd gram_matrix(const Kernel& kernel, const std::vector<Point>& pts) {
  const int m = static_cast<int>(pts.size());
  Eigen::MatrixXd K(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) K(i, j) = kernel(pts[i], pts[j]);
  return K;
}

// eigvals of G = K/m descending with small negatives clipped, eigvecs ordered
// to match; a negative below -1e-8*lambda_1 is a genuine PSD violation
void eigendecompose_scaled_gram(const Eigen::MatrixXd& K, Eigen::VectorXd* eigvals,
                                Eigen::MatrixXd* eigvecs) {
  const int m = static_cast<int>(K.rows());
  const Eigen::MatrixXd G = (K + K.transpose()) / (2.0 * m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  if (es.info() != Eigen::Success)
    throw Error("eigendecompose: solver failed to converge");
  // ascending from Eigen; flip
  Eigen::VectorXd vals(m);
  Eigen::MatrixXd vecs(m, m);
  for (int i = 0; i < m; ++i) {
    vals[i] = es.eigenvalues()[m - 1 - i];
    vecs.col(i) = es.eigenvectors().col(m - 1 - i);
  }
  const double top = std::max(vals[0], 0.0);
  const double floor = -1e-8 * std::max(top, std::numeric_limits<double>::min());
  if (vals[m - 1] < floor)
    throw NotPsd("gram eigenvalue " + std::to_string(vals[m - 1]) +
                     " is negative beyond rounding scale",
                 vals[m - 1], vals[0]);
  for (int i = 0; i < m; ++i) vals[i] = std::max(vals[i], 0.0);
  *eigvals = std::move(vals);
  *eigvecs = std::move(vecs);
}

}  // namespace

Kernel make_kernel(const std::string& id, const std::vector<double>& params) {
  if (id == "rbf") {
    const double bw = params.empty() ? 1.0 : params[0];
    if (!(bw > 0.0)) throw InvalidArgument("make_kernel: rbf bandwidth must be > 0");
    return {id, {bw}, [bw](const Point& x, const Point& y) {
              return std::exp(-(x - y).squaredNorm() / (2.0 * bw * bw));
            }};
  }
  if (id == "linear") {
    return {id, {}, [](const Point& x, const Point& y) { return x.dot(y); }};
  }
  if (id == "min") {
    return {id, {}, [](const Point& x, const Point& y) {
              if (x.size() != 1 || y.size() != 1)
                throw InvalidArgument("min kernel is 1-D only");
              return std::min(x[0], y[0]);
            }};
  }
  if (id == "polynomial") {
    const double degree = params.empty() ? 2.0 : params[0];
    const double offset = params.size() > 1 ? params[1] : 1.0;
    if (!(degree > 0.0))
      throw InvalidArgument("make_kernel: polynomial degree must be > 0");
    return {id, {degree, offset}, [degree, offset](const Point& x, const Point& y) {
              return std::pow(x.dot(y) + offset, degree);
            }};
  }
  throw InvalidArgument("make_kernel: unknown kernel '" + id +
                        "'; known: rbf, linear, min, polynomial");
}

NystromFeatureMap::NystromFeatureMap(std::vector<Point> landmarks, Eigen::VectorXd eigvals,
                                     Eigen::MatrixXd eigvecs, int d, Kernel kernel)
    : landmarks_(std::move(landmarks)),
      eigvals_(std::move(eigvals)),
      eigvecs_(std::move(eigvecs)),
      d_(d),
      kernel_(std::move(kernel)) {
  const int m = landmark_count();
  if (m < 1) throw InvalidArgument("NystromFeatureMap: no landmarks");
  if (eigvals_.size() != m || eigvecs_.rows() != m || eigvecs_.cols() != m)
    throw InvalidArgument("NystromFeatureMap: eigendecomposition shape mismatch");
  if (d_ < 1 || d_ > m)
    throw InvalidArgument("NystromFeatureMap: truncation must be in [1, m]");
  for (int i = 0; i + 1 < m; ++i)
    if (eigvals_[i] < eigvals_[i + 1])
      throw InvalidArgument("NystromFeatureMap: eigenvalues must be descending");
  if (eigvals_[m - 1] < 0.0)
    throw InvalidArgument("NystromFeatureMap: negative eigenvalue");
  if (!kernel_.fn) throw InvalidArgument("NystromFeatureMap: kernel has no callable");
}

Eigen::VectorXd NystromFeatureMap::features(const Point& x) const {
  const int m = landmark_count();
  Eigen::VectorXd kvec(m);
  for (int j = 0; j < m; ++j) kvec[j] = kernel_(x, landmarks_[j]);
  const double root_m = std::sqrt(static_cast<double>(m));
  Eigen::VectorXd out = eigvecs_.leftCols(d_).transpose() * kvec / root_m;
  for (int i = 0; i < d_; ++i)
    out[i] = (eigvals_[i] > 0.0) ? out[i] / std::sqrt(eigvals_[i]) : 0.0;
  return out;
}

double NystromFeatureMap::reconstruct(const Point& x, const Point& y) const {
  return features(x).dot(features(y));
}

double landmark_residual(const NystromFeatureMap& fm, int d) {
  const int m = fm.landmark_count();
  if (d < 0 || d > m) throw InvalidArgument("landmark_residual: d out of range");
  Eigen::MatrixXd E = gram_matrix(fm.kernel(), fm.landmarks());
  for (int i = 0; i < d; ++i) {
    const Eigen::VectorXd u = fm.eigvecs().col(i);
    E -= (m * fm.eigvals()[i]) * (u * u.transpose());
  }
  return E.cwiseAbs().maxCoeff();
}

int estimate_spectrum_decay(const Kernel& kernel, const std::vector<Point>& landmarks,
                            double epsilon) {
  if (!(epsilon > 0.0))
    throw InvalidArgument("estimate_spectrum_decay: epsilon must be > 0");
  const int m = static_cast<int>(landmarks.size());
  if (m < 2) throw InvalidArgument("estimate_spectrum_decay: need at least 2 landmarks");

  const Eigen::MatrixXd K = gram_matrix(kernel, landmarks);
  Eigen::VectorXd eigvals;
  Eigen::MatrixXd eigvecs;
  eigendecompose_scaled_gram(K, &eigvals, &eigvecs);

  // peel the spectrum one rank at a time; the remainder after d terms is the
  // reconstruction residual at truncation level d
  Eigen::MatrixXd E = K;
  double residual = E.cwiseAbs().maxCoeff();
  for (int d = 1; d <= m; ++d) {
    const Eigen::VectorXd u = eigvecs.col(d - 1);
    E -= (m * eigvals[d - 1]) * (u * u.transpose());
    residual = E.cwiseAbs().maxCoeff();
    if (residual <= epsilon) return d;
  }
  throw SpectrumTooFlat("estimate_spectrum_decay: residual " + std::to_string(residual) +
                            " at full rank still exceeds " + std::to_string(epsilon),
                        residual);
}

double estimate_eigenfunction_bound(const NystromFeatureMap& fm,
                                    const std::vector<Point>& eval_points) {
  if (eval_points.empty())
    throw InvalidArgument("estimate_eigenfunction_bound: no eval points");
  double worst = 0.0;
  for (const Point& x : eval_points)
    worst = std::max(worst, fm.features(x).cwiseAbs().maxCoeff());
  return worst;
}

std::vector<Point> default_landmarks(const BoxDomain& domain, int m) {
  if (m < 1) throw InvalidArgument("default_landmarks: m must be >= 1");
  const int dim = domain.dim();
  if (dim > 2) return quasirandom_points(domain, m, 0x5eedu);

  const int per_axis = static_cast<int>(std::floor(std::pow(static_cast<double>(m),
                                                            1.0 / dim)));
  std::vector<Point> pts;
  if (per_axis >= 2) {
    pts = sample_grid(domain, per_axis);
    if (static_cast<int>(pts.size()) > m) pts.resize(m);
  }
  if (static_cast<int>(pts.size()) < m) {
    const std::vector<Point> extra =
        quasirandom_points(domain, m - static_cast<int>(pts.size()), 0x5eedu);
    pts.insert(pts.end(), extra.begin(), extra.end());
  }
  return pts;
}

SymmetricBuild build_symmetric_features(const Kernel& kernel, const BoxDomain& domain,
                                        double epsilon, int m,
                                        const SymmetricBuildOptions& opts) {
  if (!(epsilon > 0.0))
    throw InvalidArgument("build_symmetric_features: epsilon must be > 0");
  if (m < 2) throw InvalidArgument("build_symmetric_features: need m >= 2 landmarks");

  std::vector<Point> landmarks = default_landmarks(domain, m);
  const Eigen::MatrixXd K = gram_matrix(kernel, landmarks);
  Eigen::VectorXd eigvals;
  Eigen::MatrixXd eigvecs;
  eigendecompose_scaled_gram(K, &eigvals, &eigvecs);

  // half the budget to spectral truncation, half to off-landmark extension
  Eigen::MatrixXd E = K;
  int d = m;
  for (int lvl = 1; lvl <= m; ++lvl) {
    const Eigen::VectorXd u = eigvecs.col(lvl - 1);
    E -= (m * eigvals[lvl - 1]) * (u * u.transpose());
    if (E.cwiseAbs().maxCoeff() <= 0.5 * epsilon) {
      d = lvl;
      break;
    }
    if (lvl == m)
      throw SpectrumTooFlat("build_symmetric_features: full-rank residual " +
                                std::to_string(E.cwiseAbs().maxCoeff()) +
                                " exceeds " + std::to_string(0.5 * epsilon),
                            E.cwiseAbs().maxCoeff());
  }

  SymmetricBuild out;
  out.map = NystromFeatureMap(std::move(landmarks), std::move(eigvals),
                              std::move(eigvecs), d, kernel);

  if (opts.certify) {
    std::uint64_t s = opts.seed + 0x9e3779b97f4a7c15ull;
    out.heldout = quasirandom_pairs(domain, opts.heldout_pairs, splitmix64(s));
    double sup = 0.0, sq = 0.0;
    for (const auto& [x, y] : out.heldout) {
      const double diff = kernel(x, y) - out.map.reconstruct(x, y);
      sup = std::max(sup, std::abs(diff));
      sq += diff * diff;
    }
    out.sup_error_heldout = sup;
    out.l2_error_heldout = std::sqrt(sq / static_cast<double>(out.heldout.size()));
    if (sup > epsilon)
      throw CertificationFailure("build_symmetric_features: held-out max error " +
                                     std::to_string(sup) + " exceeds target " +
                                     std::to_string(epsilon),
                                 sup, epsilon);
  }
  return out;
}

bool psd_check(const Eigen::MatrixXd& gram, double tol) {
  if (gram.rows() != gram.cols())
    throw InvalidArgument("psd_check: matrix not square");
  const double scale = std::max(gram.cwiseAbs().maxCoeff(), 1.0);
  if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InvalidArgument("psd_check: matrix not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  return lo >= -tol * std::max(hi, 1.0);
}

NeuronBudget neuron_budget_relu(int d_r, double C, double L, double epsilon, int dim) {
  if (d_r < 1 || !(C > 0.0) || !(L > 0.0) || !(epsilon > 0.0) || dim < 1)
    throw InvalidArgument("neuron_budget_relu: all inputs must be positive");
  NeuronBudget b;
  const double base = 4.0 * C * static_cast<double>(d_r) * L / epsilon;
  b.log10_value = std::log10(static_cast<double>(d_r)) + dim * std::log10(base);
  b.value = d_r * std::pow(base, static_cast<double>(dim));
  if (!std::isfinite(b.value)) {
    b.value = std::numeric_limits<double>::infinity();
    b.overflow = true;
  }
  return b;
}

NeuronBudget neuron_budget_barron(int d_r, double C, double radius, double B,
                                  double epsilon) {
  if (d_r < 1 || !(C > 0.0) || !(radius > 0.0) || !(B > 0.0) || !(epsilon > 0.0))
    throw InvalidArgument("neuron_budget_barron: all inputs must be positive");
  NeuronBudget b;
  const double prod = C * radius * B;
  b.log10_value = 3.0 * std::log10(static_cast<double>(d_r)) +
                  2.0 * std::log10(prod) - 2.0 * std::log10(epsilon);
  const double dr = static_cast<double>(d_r);
  b.value = dr * dr * dr * prod * prod / (epsilon * epsilon);
  if (!std::isfinite(b.value)) {
    b.value = std::numeric_limits<double>::infinity();
    b.overflow = true;
  }
  return b;
}

TruncatedFeaturePair truncate_feature_pair(const FeaturePair& fp,
                                           const std::vector<PointPair>& eval_pairs,
                                           double epsilon) {
  if (!(epsilon > 0.0))
    throw InvalidArgument("truncate_feature_pair: epsilon must be > 0");
  if (eval_pairs.empty())
    throw InvalidArgument("truncate_feature_pair: empty eval set");
  if (fp.cap < 1 || !fp.phi || !fp.phi_star)
    throw InvalidArgument("truncate_feature_pair: malformed feature pair");

  const double half = 0.5 * epsilon;
  if (fp.tail_bound && fp.tail_bound(fp.cap) > half)
    throw TailTooHeavy("truncate_feature_pair: declared tail at the cap is " +
                           std::to_string(fp.tail_bound(fp.cap)) +
                           ", exceeding half the budget",
                       fp.tail_bound(fp.cap));

  // per-pair term prefix sums; residual(d) = max |full - prefix_d|
  const std::size_t np = eval_pairs.size();
  Eigen::MatrixXd prefix(np, fp.cap + 1);
  for (std::size_t p = 0; p < np; ++p) {
    double s = 0.0;
    prefix(p, 0) = 0.0;
    for (int i = 0; i < fp.cap; ++i) {
      s += fp.phi(i, eval_pairs[p].first) * fp.phi_star(i, eval_pairs[p].second);
      prefix(p, i + 1) = s;
    }
  }
  for (int d = 1; d <= fp.cap; ++d) {
    double residual = 0.0;
    for (std::size_t p = 0; p < np; ++p)
      residual = std::max(residual, std::abs(prefix(p, fp.cap) - prefix(p, d)));
    if (residual <= half) {
      TruncatedFeaturePair out;
      out.d = d;
      out.evaluator = [fp, d](const Point& x, const Point& y) {
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += fp.phi(i, x) * fp.phi_star(i, y);
        return s;
      };
      return out;
    }
  }
  // unreachable: residual at d = cap is identically 0
  throw TailTooHeavy("truncate_feature_pair: no level within the cap works", 0.0);
}

nlohmann::json feature_map_to_json(const NystromFeatureMap& fm) {
  if (fm.kernel().id.empty())
    throw InvalidArgument("feature_map_to_json: kernel has no registry id");
  nlohmann::json j;
  j["version"] = 1;
  nlohmann::json lms = nlohmann::json::array();
  for (const Point& z : fm.landmarks()) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < z.size(); ++c) row.push_back(z[c]);
    lms.push_back(std::move(row));
  }
  j["landmarks"] = std::move(lms);
  j["eigvals"] = std::vector<double>(fm.eigvals().data(),
                                     fm.eigvals().data() + fm.eigvals().size());
  nlohmann::json vecs = nlohmann::json::array();
  for (int i = 0; i < fm.landmark_count(); ++i)
    for (int c = 0; c < fm.landmark_count(); ++c) vecs.push_back(fm.eigvecs()(i, c));
  j["eigvecs"] = std::move(vecs);
  j["d"] = fm.truncation();
  j["kernel_id"] = fm.kernel().id;
  j["kernel_params"] = fm.kernel().params;
  return j;
}

NystromFeatureMap feature_map_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != 1)
      throw InvalidArgument("feature_map_from_json: unsupported version");
    std::vector<Point> landmarks;
    for (const auto& row : j.at("landmarks")) {
      Point p(row.size());
      for (std::size_t c = 0; c < row.size(); ++c) p[c] = row.at(c).get<double>();
      landmarks.push_back(std::move(p));
    }
    const int m = static_cast<int>(landmarks.size());
    const auto& ev = j.at("eigvals");
    if (static_cast<int>(ev.size()) != m)
      throw InvalidArgument("feature_map_from_json: eigval count mismatch");
    Eigen::VectorXd eigvals(m);
    for (int i = 0; i < m; ++i) eigvals[i] = ev.at(i).get<double>();
    const auto& vecs = j.at("eigvecs");
    if (static_cast<int>(vecs.size()) != m * m)
      throw InvalidArgument("feature_map_from_json: eigvec size mismatch");
    Eigen::MatrixXd eigvecs(m, m);
    int idx = 0;
    for (int i = 0; i < m; ++i)
      for (int c = 0; c < m; ++c) eigvecs(i, c) = vecs.at(idx++).get<double>();
    const Kernel kernel = make_kernel(j.at("kernel_id").get<std::string>(),
                                      j.at("kernel_params").get<std::vector<double>>());
    return NystromFeatureMap(std::move(landmarks), std::move(eigvals), std::move(eigvecs),
                             j.at("d").get<int>(), kernel);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("feature_map_from_json: malformed document: ") +
                          e.what());
  }
}

}  // namespace relkit
