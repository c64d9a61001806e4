#include "relkit/factored.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "relkit/errors.hpp"
#include "relkit/rng.hpp"

namespace relkit {

namespace {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t s = base + 0x9e3779b97f4a7c15ull * (salt + 1);
  return splitmix64(s);
}

std::string point_to_string(const Point& p) {
  std::ostringstream os;
  os << "(";
  for (Eigen::Index i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ")";
  return os.str();
}

}  // namespace

Factorization decompose_relation_matrix(const Eigen::MatrixXd& R, double tol) {
  if (!R.allFinite())
    throw InvalidArgument("decompose_relation_matrix: matrix has non-finite entries");
  if (!(tol >= 0.0))
    throw InvalidArgument("decompose_relation_matrix: tol must be >= 0");
  if (R.rows() == 0 || R.cols() == 0)
    throw InvalidArgument("decompose_relation_matrix: empty matrix");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(R, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();  // descending
  const int nsv = static_cast<int>(sv.size());
  const double s1 = sv[0];

  // tol = 0 separates numerical rank from SVD backward error, which sits at
  // the eps*n*sigma_1 scale
  const double cut = (tol == 0.0)
                         ? s1 * 64.0 * static_cast<double>(std::max(R.rows(), R.cols())) *
                               std::numeric_limits<double>::epsilon()
                         : tol * s1;
  int m = 0;
  for (int k = 0; k < nsv; ++k)
    if (sv[k] > cut) ++m;
  m = std::max(m, 1);

  // the retained part must also meet the Frobenius guarantee; widen if the
  // spectrum is too flat for the per-value cut alone
  const double fro_target = std::max(tol, 1e-10) * R.norm();
  auto tail_fro = [&](int keep) {
    double s = 0.0;
    for (int k = keep; k < nsv; ++k) s += sv[k] * sv[k];
    return std::sqrt(s);
  };
  while (m < nsv && tail_fro(m) > fro_target) ++m;

  Factorization f;
  f.m = m;
  const Eigen::VectorXd root = sv.head(m).cwiseSqrt();
  f.P = root.asDiagonal() * svd.matrixU().leftCols(m).transpose();
  f.Q = root.asDiagonal() * svd.matrixV().leftCols(m).transpose();
  return f;
}

FactoredRelation::FactoredRelation(Eigen::MatrixXd P, Eigen::MatrixXd Q,
                                   IndicatorNetwork net)
    : P_(std::move(P)), Q_(std::move(Q)), net_(std::move(net)) {
  if (P_.rows() != Q_.rows() || P_.cols() != Q_.cols())
    throw InvalidArgument("FactoredRelation: P and Q shapes differ");
  if (P_.cols() != net_.size())
    throw InvalidArgument("FactoredRelation: factor width must equal the cell count");
}

Eigen::VectorXd FactoredRelation::phi(const Point& x) const {
  return P_ * eval_indicator(net_, x);
}

Eigen::VectorXd FactoredRelation::psi(const Point& y) const {
  return Q_ * eval_indicator(net_, y);
}

double eval_factored(const FactoredRelation& fr, const Point& x, const Point& y) {
  return fr.phi(x).dot(fr.psi(y));
}

double boundary_gap(const IndicatorNetwork& net, const Point& x) {
  const int n = net.size();
  if (n < 2) return std::numeric_limits<double>::infinity();
  double d1 = std::numeric_limits<double>::infinity(), d2 = d1;
  for (int i = 0; i < n; ++i) {
    const double d = (net.landmarks().row(i).transpose() - x).squaredNorm();
    if (d < d1) {
      d2 = d1;
      d1 = d;
    } else if (d < d2) {
      d2 = d;
    }
  }
  return std::sqrt(d2) - std::sqrt(d1);
}

namespace {

// quasi-random pairs from the box, keeping only pairs whose two endpoints sit
// clear of every Voronoi boundary
std::vector<PointPair> off_boundary_pairs(const BoxDomain& domain,
                                          const IndicatorNetwork& net, int count,
                                          std::uint64_t seed) {
  const int dim = domain.dim();
  QuasiRandom qr(2 * dim, seed);
  std::vector<double> buf(2 * dim);
  std::vector<PointPair> out;
  out.reserve(static_cast<std::size_t>(count));
  const long attempts_cap = 20L * count;
  for (long a = 0; a < attempts_cap && static_cast<int>(out.size()) < count; ++a) {
    qr.next(buf.data());
    Point x(dim), y(dim);
    for (int i = 0; i < dim; ++i) {
      x[i] = domain.lower()[i] + buf[i] * (domain.upper()[i] - domain.lower()[i]);
      y[i] = domain.lower()[i] + buf[dim + i] * (domain.upper()[i] - domain.lower()[i]);
    }
    if (boundary_gap(net, x) > 1e-6 && boundary_gap(net, y) > 1e-6)
      out.emplace_back(std::move(x), std::move(y));
  }
  if (out.empty())
    throw Error("off_boundary_pairs: every candidate landed on a Voronoi boundary");
  return out;
}

}  // namespace

AsymmetricBuild build_asymmetric_approximator(const Relation& r, const BoxDomain& domain,
                                              double epsilon, const BuildOptions& opts) {
  if (!(epsilon > 0.0))
    throw InvalidArgument("build_asymmetric_approximator: epsilon must be > 0");

  const double half = 0.5 * epsilon;
  const std::vector<PointPair> probes =
      quasirandom_pairs(domain, opts.probe_pairs, derive_seed(opts.seed, 1));

  // largest quantization scale whose measured modulus still fits half the
  // error budget; the modulus estimate is monotone in delta by construction
  double lo = 0.0, hi = domain.diameter();
  double best_seen = std::numeric_limits<double>::infinity();
  if (modulus_of_continuity(r, domain, probes, hi) <= half) {
    lo = hi;
  } else {
    for (int step = 0; step < 30; ++step) {
      const double mid = 0.5 * (lo + hi);
      const double w = modulus_of_continuity(r, domain, probes, mid);
      best_seen = std::min(best_seen, w);
      if (w <= half)
        lo = mid;
      else
        hi = mid;
    }
    if (lo == 0.0)
      throw ContinuityViolation(
          "build_asymmetric_approximator: modulus stuck at " +
              std::to_string(best_seen) + " against target " + std::to_string(half),
          half, best_seen);
  }
  const double delta = lo;

  const std::vector<Point> landmarks = place_landmarks(domain, delta, opts.landmark_cap);
  const std::size_t n = landmarks.size();
  if (n > opts.matrix_cap)
    throw BudgetExceeded("build_asymmetric_approximator: " + std::to_string(n) +
                             " cells exceed the dense-sample cap " +
                             std::to_string(opts.matrix_cap),
                         n, delta);

  Eigen::MatrixXd R(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      R(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          r(landmarks[i], landmarks[j]);

  // drop only spectral mass below eps/2: every dropped sigma_k <= tol*sigma_1
  // <= eps/2 because sigma_1 <= |R|_F, and |R - P'Q|_max <= sigma_{m+1}
  const double fro = R.norm();
  const double tol = (fro == 0.0) ? 0.0 : std::min(1.0, half / fro);
  Factorization f = decompose_relation_matrix(R, tol);

  IndicatorNetwork net = build_indicator_network(landmarks, Activation::hard());
  AsymmetricBuild out;
  out.relation = FactoredRelation(std::move(f.P), std::move(f.Q), std::move(net));
  out.delta = delta;

  if (opts.certify) {
    out.heldout = off_boundary_pairs(domain, out.relation.net(), opts.heldout_pairs,
                                     derive_seed(opts.seed, 2));
    const Relation approx = Relation::black_box(
        [fr = out.relation](const Point& x, const Point& y) { return eval_factored(fr, x, y); });
    out.sup_error_heldout = sup_error(r, approx, out.heldout);
    out.l2_error_heldout = l2_error(r, approx, out.heldout);
    if (out.sup_error_heldout > epsilon)
      throw CertificationFailure("build_asymmetric_approximator: held-out sup error " +
                                     std::to_string(out.sup_error_heldout) +
                                     " exceeds target " + std::to_string(epsilon),
                                 out.sup_error_heldout, epsilon);
  }
  return out;
}

ComposedRelation::ComposedRelation(std::function<Point(const Point&)> filter,
                                   BoxDomain feature_box, FactoredRelation fr)
    : filter_(std::move(filter)), feature_box_(std::move(feature_box)), fr_(std::move(fr)) {
  if (!filter_) throw InvalidArgument("ComposedRelation: null filter");
}

Point ComposedRelation::map(const Point& x) const {
  Point u = filter_(x);
  if (u.size() != feature_box_.dim())
    throw InvalidArgument("ComposedRelation: filter output dimension mismatch");
  if (!feature_box_.contains(u, 1e-9))
    throw DomainViolation("ComposedRelation: filter output " + point_to_string(u) +
                              " escapes the declared feature box",
                          u);
  return u;
}

double ComposedRelation::operator()(const Point& x, const Point& y) const {
  return eval_factored(fr_, map(x), map(y));
}

CompositionalBuild build_compositional_approximator(
    const Relation& r_bar, const std::function<Point(const Point&)>& filter,
    const BoxDomain& filter_domain_image, const BoxDomain& original_domain,
    double epsilon, const BuildOptions& opts) {
  if (!filter) throw InvalidArgument("build_compositional_approximator: null filter");
  if (!(epsilon > 0.0))
    throw InvalidArgument("build_compositional_approximator: epsilon must be > 0");

  // probe the filter before paying for a build
  const int n_probes = std::max(64, opts.probe_pairs);
  for (const Point& p :
       quasirandom_points(original_domain, n_probes, derive_seed(opts.seed, 3))) {
    const Point u = filter(p);
    if (u.size() != filter_domain_image.dim())
      throw InvalidArgument(
          "build_compositional_approximator: filter output dimension mismatch");
    if (!filter_domain_image.contains(u, 1e-9))
      throw DomainViolation("build_compositional_approximator: filter output " +
                                point_to_string(u) + " escapes the declared image box",
                            u);
  }

  CompositionalBuild out;
  out.inner = build_asymmetric_approximator(r_bar, filter_domain_image, epsilon, opts);
  out.relation = ComposedRelation(filter, filter_domain_image, out.inner.relation);

  // the composed error on the original domain is the inner error at image
  // points; measure it there anyway, over image pairs clear of boundaries
  const int dim = original_domain.dim();
  QuasiRandom qr(2 * dim, derive_seed(opts.seed, 4));
  std::vector<double> buf(2 * dim);
  double sup = 0.0, sq = 0.0;
  long used = 0;
  const long attempts_cap = 20L * opts.heldout_pairs;
  for (long a = 0; a < attempts_cap && used < opts.heldout_pairs; ++a) {
    qr.next(buf.data());
    Point x(dim), y(dim);
    for (int i = 0; i < dim; ++i) {
      x[i] = original_domain.lower()[i] +
             buf[i] * (original_domain.upper()[i] - original_domain.lower()[i]);
      y[i] = original_domain.lower()[i] +
             buf[dim + i] * (original_domain.upper()[i] - original_domain.lower()[i]);
    }
    const Point u = out.relation.map(x), v = out.relation.map(y);
    if (boundary_gap(out.inner.relation.net(), u) <= 1e-6 ||
        boundary_gap(out.inner.relation.net(), v) <= 1e-6)
      continue;
    const double diff = r_bar(u, v) - out.relation(x, y);
    sup = std::max(sup, std::abs(diff));
    sq += diff * diff;
    ++used;
  }
  if (used > 0) {
    out.sup_error_original = sup;
    out.l2_error_original = std::sqrt(sq / static_cast<double>(used));
  }
  return out;
}

nlohmann::json factored_to_json(const FactoredRelation& fr) {
  nlohmann::json j;
  j["version"] = 1;
  j["m"] = fr.inner_dim();
  auto flatten = [](const Eigen::MatrixXd& M) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i)
      for (Eigen::Index c = 0; c < M.cols(); ++c) a.push_back(M(i, c));
    return a;
  };
  j["P"] = flatten(fr.P());
  j["Q"] = flatten(fr.Q());
  j["indicator_network"] = indicator_to_json(fr.net());
  return j;
}

FactoredRelation factored_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != 1)
      throw InvalidArgument("factored_from_json: unsupported version");
    IndicatorNetwork net = indicator_from_json(j.at("indicator_network"));
    const int m = j.at("m").get<int>();
    const int n = net.size();
    auto unflatten = [&](const nlohmann::json& a) {
      if (static_cast<int>(a.size()) != m * n)
        throw InvalidArgument("factored_from_json: factor size mismatch");
      Eigen::MatrixXd M(m, n);
      int idx = 0;
      for (int i = 0; i < m; ++i)
        for (int c = 0; c < n; ++c) M(i, c) = a.at(idx++).get<double>();
      return M;
    };
    Eigen::MatrixXd P = unflatten(j.at("P"));
    Eigen::MatrixXd Q = unflatten(j.at("Q"));
    return FactoredRelation(std::move(P), std::move(Q), std::move(net));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("factored_from_json: malformed document: ") + e.what());
  }
}

}  // namespace relkit
