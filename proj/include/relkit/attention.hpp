#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

#include <json.hpp>

#include "relkit/domain.hpp"
#include "relkit/factored.hpp"

namespace relkit {

// Query-conditioned utility; the induced relevance preorder is
// x ⪯_q y  ⇔  u(q,x) ≤ u(q,y).
using UtilityFn = std::function<double(const Point&, const Point&)>;

// Softmax scorer.  Scores are ⟨phi(q), psi(x)⟩ unless score_override is set
// (exact-score mode, used to isolate the softmax bound from approximation
// error).
struct AttentionModule {
  std::function<Eigen::VectorXd(const Point&)> phi;
  std::function<Eigen::VectorXd(const Point&)> psi;
  double beta = 1.0;
  UtilityFn score_override;

  double score(const Point& q, const Point& x) const {
    return score_override ? score_override(q, x) : phi(q).dot(psi(x));
  }

  static AttentionModule from_factored(const FactoredRelation& fr, double beta);
  static AttentionModule from_scores(UtilityFn scores, double beta);
};

struct SelectResult {
  int index = 0;
  Point element;
};

// argmax_i u(q, x_i), ties to the lowest index.
SelectResult select(const UtilityFn& u, const Point& q, const std::vector<Point>& context);

// Softmax attention weights over the context, max-subtracted before
// exponentiation; always a probability vector.
Eigen::VectorXd attention_weights(const AttentionModule& module, const Point& q,
                                  const std::vector<Point>& context);

// Σ_i α_i x_i; lies in the convex hull of the context.
Point attention(const AttentionModule& module, const Point& q,
                const std::vector<Point>& context);

// (2/eta)·log(2(n−1)·max_norm/epsilon), floored at 0.
double calibrate_beta(double eta, int n, double max_norm, double epsilon);

struct ContextDraw {
  Point q;
  std::vector<Point> context;
};

// Trial i of any Monte-Carlo loop receives seed base+i, so results are
// independent of evaluation order.
using ContextSampler = std::function<ContextDraw(std::uint64_t trial_seed)>;

ContextSampler uniform_context_sampler(const BoxDomain& domain, int context_size,
                                       std::uint64_t seed_base);

// Empirical ε-quantile of the top1−top2 utility gap over seeded draws; the
// margin exceeds the returned value with empirical probability ≥ 1−ε.
double estimate_margin(const UtilityFn& u, const ContextSampler& sampler, double epsilon,
                       int trials);

struct AttentionBuild {
  AttentionModule module;   // beta left at 1; calibrate separately
  AsymmetricBuild approx;   // certification of the score approximation
};

// Approximates u itself as the score relation, to sup error eta/4 — the
// margin fraction the retrieval bound budgets for score error.
AttentionBuild build_attention_from_utility(const UtilityFn& u, const BoxDomain& domain,
                                            double eta, const BuildOptions& opts = {});

struct VerifyOptions {
  double epsilon_prob = 0.1;
  double epsilon_out = -1.0;  // < 0 means: same as epsilon_prob
  double eta = 0.0;           // margin level the β was calibrated against
  int trials = 1000;
  std::uint64_t seed = 0;     // echoed into the report
};

struct RetrievalReport {
  std::uint64_t seed = 0;
  int trials = 0;
  double epsilon_prob = 0.0;
  double epsilon_out = 0.0;
  double beta = 0.0;
  double eta = 0.0;
  double success_rate = 0.0;             // ‖attention − select‖ < ε_out
  double margin_hit_rate = 0.0;          // margin > η
  double conditional_success_rate = 0.0; // success given margin hit
  double mean_error = 0.0;
  double max_error = 0.0;
  int tie_draws = 0;  // drawn contexts with a tied argmax, excluded from rates
};

RetrievalReport verify_retrieval(const AttentionModule& module, const UtilityFn& u,
                                 const ContextSampler& sampler,
                                 const VerifyOptions& opts = {});

nlohmann::json report_to_json(const RetrievalReport& r);

}  // namespace relkit
