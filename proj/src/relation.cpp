#include "relkit/relation.hpp"

#include <cmath>
#include <string>

#include "relkit/errors.hpp"
#include "relkit/rng.hpp"

namespace relkit {

namespace {

int nearest_element(const std::vector<Point>& elements, const Point& x) {
  int best = 0;
  double best_d = (x - elements[0]).squaredNorm();
  for (std::size_t i = 1; i < elements.size(); ++i) {
    const double d = (x - elements[i]).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

double eval_feature_pair(const FeaturePair& fp, const Point& x, const Point& y,
                         int terms) {
  double s = 0.0;
  for (int i = 0; i < terms; ++i) s += fp.phi(i, x) * fp.phi_star(i, y);
  return s;
}

}  // namespace

Relation Relation::black_box(RelationFn f) {
  if (!f) throw InvalidArgument("Relation: null callable");
  Relation r;
  r.kind_ = RelationKind::BlackBox;
  r.fn_ = std::move(f);
  return r;
}

Relation Relation::finite_matrix(Eigen::MatrixXd R, std::vector<Point> elements) {
  if (R.rows() != R.cols())
    throw InvalidArgument("Relation: finite matrix must be square");
  if (static_cast<Eigen::Index>(elements.size()) != R.rows())
    throw InvalidArgument("Relation: element list length must match matrix size");
  if (elements.empty()) throw InvalidArgument("Relation: empty element list");
  if (!R.allFinite())
    throw InvalidArgument("Relation: finite matrix has non-finite entries");
  for (const Point& e : elements)
    if (e.size() != elements.front().size())
      throw InvalidArgument("Relation: elements must share one dimension");
  Relation r;
  r.kind_ = RelationKind::FiniteMatrix;
  r.matrix_ = std::make_shared<const Eigen::MatrixXd>(std::move(R));
  r.elements_ = std::make_shared<const std::vector<Point>>(std::move(elements));
  return r;
}

Relation Relation::symmetric_kernel(RelationFn k) {
  if (!k) throw InvalidArgument("Relation: null callable");
  Relation r;
  r.kind_ = RelationKind::SymmetricKernel;
  r.fn_ = std::move(k);
  return r;
}

Relation Relation::feature_pair(FeaturePair fp) {
  if (fp.cap < 1) throw InvalidArgument("Relation: feature pair needs cap >= 1");
  if (!fp.phi || !fp.phi_star)
    throw InvalidArgument("Relation: feature pair needs both coordinate callables");
  Relation r;
  r.kind_ = RelationKind::FeaturePair;
  r.fp_ = std::make_shared<const FeaturePair>(std::move(fp));
  return r;
}

double Relation::operator()(const Point& x, const Point& y) const {
  switch (kind_) {
    case RelationKind::BlackBox:
    case RelationKind::SymmetricKernel:
      return fn_(x, y);
    case RelationKind::FiniteMatrix: {
      const int i = nearest_element(*elements_, x);
      const int j = nearest_element(*elements_, y);
      return (*matrix_)(i, j);
    }
    case RelationKind::FeaturePair:
      return eval_feature_pair(*fp_, x, y, fp_->cap);
  }
  return 0.0;  // unreachable
}

const Eigen::MatrixXd& Relation::matrix() const {
  if (kind_ != RelationKind::FiniteMatrix)
    throw InvalidArgument("Relation: not a finite-matrix relation");
  return *matrix_;
}

const std::vector<Point>& Relation::elements() const {
  if (kind_ != RelationKind::FiniteMatrix)
    throw InvalidArgument("Relation: not a finite-matrix relation");
  return *elements_;
}

const FeaturePair& Relation::features() const {
  if (kind_ != RelationKind::FeaturePair)
    throw InvalidArgument("Relation: not a feature-pair relation");
  return *fp_;
}

double sup_error(const Relation& r, const Relation& r_hat,
                 const std::vector<PointPair>& pairs) {
  if (pairs.empty()) throw InvalidArgument("sup_error: empty pair list");
  double m = 0.0;
  for (const auto& [x, y] : pairs) m = std::max(m, std::abs(r(x, y) - r_hat(x, y)));
  return m;
}

double l2_error(const Relation& r, const Relation& r_hat,
                const std::vector<PointPair>& pairs) {
  if (pairs.empty()) throw InvalidArgument("l2_error: empty pair list");
  double s = 0.0;
  for (const auto& [x, y] : pairs) {
    const double d = r(x, y) - r_hat(x, y);
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(pairs.size()));
}

double modulus_of_continuity(const Relation& r, const BoxDomain& domain,
                             const std::vector<PointPair>& probe_pairs, double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("modulus_of_continuity: delta must be > 0");
  if (probe_pairs.empty())
    throw InvalidArgument("modulus_of_continuity: empty probe set");

  const int dim = domain.dim();
  // Fixed dyadic radius ladder relative to the domain diameter. Using only
  // ladder radii <= delta makes perturbation sets literally nested across
  // delta values, which is what makes the estimate monotone in delta.
  const double diam = domain.diameter();
  std::vector<double> radii;
  for (int k = 0; k < 48; ++k) {
    const double rad = diam * std::ldexp(1.0, -k);
    if (rad <= delta) radii.push_back(rad);
    if (rad < 1e-14 * diam) break;
  }
  if (radii.empty()) radii.push_back(delta);

  // one fixed direction-pair stream; probe pair p consumes samples 8p..8p+7
  QuasiRandom qr(2 * dim, /*seed=*/0x6d0d5u);
  std::vector<double> buf(2 * dim);
  double worst = 0.0;
  for (const auto& [x, y] : probe_pairs) {
    for (int j = 0; j < 8; ++j) {
      qr.next(buf.data());
      Point u(dim), v(dim);
      for (int a = 0; a < dim; ++a) {
        u[a] = 2.0 * buf[a] - 1.0;
        v[a] = 2.0 * buf[dim + a] - 1.0;
      }
      const double nu = u.norm(), nv = v.norm();
      if (nu < 1e-12 || nv < 1e-12) continue;  // degenerate direction, skip
      u /= nu;
      v /= nv;
      const double base = r(x, y);
      for (const double rad : radii) {
        const Point xp = domain.clamp(x + rad * u);
        const Point yp = domain.clamp(y + rad * v);
        worst = std::max(worst, std::abs(base - r(xp, yp)));
      }
    }
  }
  return worst;
}

void check_symmetry(const Relation& k, const std::vector<PointPair>& pairs) {
  for (const auto& [x, y] : pairs) {
    const double a = k(x, y), b = k(y, x);
    const double scale = std::max({std::abs(a), std::abs(b), 1.0});
    if (std::abs(a - b) > 1e-12 * scale)
      throw InvalidArgument("symmetric kernel violates k(x,y) == k(y,x): |" +
                            std::to_string(a) + " - " + std::to_string(b) + "|");
  }
}

void check_square_summable(const FeaturePair& fp, const std::vector<Point>& probes) {
  if (!fp.tail_bound) return;  // nothing declared, nothing checkable
  const int d0 = fp.cap / 2;
  const double bound = fp.tail_bound(d0);
  for (const Point& x : probes) {
    double tail = 0.0;
    for (int i = d0; i < fp.cap; ++i) {
      const double c = fp.phi(i, x), cs = fp.phi_star(i, x);
      tail += std::max(c * c, cs * cs);
    }
    if (tail > bound + 1e-12)
      throw InvalidArgument(
          "feature pair tail-sum " + std::to_string(tail) +
          " exceeds its declared bound " + std::to_string(bound));
  }
}

}  // namespace relkit
