#include "relkit/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "relkit/errors.hpp"
#include "relkit/rng.hpp"

namespace relkit {

AttentionModule AttentionModule::from_factored(const FactoredRelation& fr, double beta) {
  AttentionModule m;
  m.phi = [fr](const Point& q) { return fr.phi(q); };
  m.psi = [fr](const Point& x) { return fr.psi(x); };
  m.beta = beta;
  return m;
}

AttentionModule AttentionModule::from_scores(UtilityFn scores, double beta) {
  if (!scores) throw InvalidArgument("AttentionModule: null score function");
  AttentionModule m;
  m.beta = beta;
  m.score_override = std::move(scores);
  return m;
}

SelectResult select(const UtilityFn& u, const Point& q,
                    const std::vector<Point>& context) {
  if (context.empty()) throw InvalidArgument("select: empty context");
  int best = 0;
  double best_u = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < context.size(); ++i) {
    const double v = u(q, context[i]);
    if (!std::isfinite(v))
      throw InvalidArgument("select: non-finite utility at context index " +
                            std::to_string(i));
    if (v > best_u) {
      best_u = v;
      best = static_cast<int>(i);
    }
  }
  return {best, context[best]};
}

Eigen::VectorXd attention_weights(const AttentionModule& module, const Point& q,
                                  const std::vector<Point>& context) {
  if (context.empty()) throw InvalidArgument("attention: empty context");
  const int n = static_cast<int>(context.size());
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z[i] = module.beta * module.score(q, context[i]);
  z.array() -= z.maxCoeff();
  Eigen::VectorXd w = z.array().exp();
  return w / w.sum();
}

Point attention(const AttentionModule& module, const Point& q,
                const std::vector<Point>& context) {
  const Eigen::VectorXd alpha = attention_weights(module, q, context);
  Point out = Point::Zero(context[0].size());
  for (std::size_t i = 0; i < context.size(); ++i)
    out += alpha[static_cast<Eigen::Index>(i)] * context[i];
  return out;
}

double calibrate_beta(double eta, int n, double max_norm, double epsilon) {
  if (!(eta > 0.0))
    throw InvalidArgument("calibrate_beta: eta must be > 0 (no margin, no retrieval)");
  if (n < 2) throw InvalidArgument("calibrate_beta: need a context of at least 2");
  if (!(max_norm > 0.0)) throw InvalidArgument("calibrate_beta: max_norm must be > 0");
  if (!(epsilon > 0.0)) throw InvalidArgument("calibrate_beta: epsilon must be > 0");
  const double beta = (2.0 / eta) * std::log(2.0 * (n - 1) * max_norm / epsilon);
  return std::max(beta, 0.0);
}

ContextSampler uniform_context_sampler(const BoxDomain& domain, int context_size,
                                       std::uint64_t seed_base) {
  if (context_size < 1)
    throw InvalidArgument("uniform_context_sampler: context_size must be >= 1");
  return [domain, context_size, seed_base](std::uint64_t trial) {
    Rng rng(seed_base + trial);
    const int dim = domain.dim();
    auto draw_point = [&]() {
      Point p(dim);
      for (int i = 0; i < dim; ++i)
        p[i] = rng.uniform(domain.lower()[i], domain.upper()[i]);
      return p;
    };
    ContextDraw d;
    d.q = draw_point();
    d.context.reserve(context_size);
    for (int i = 0; i < context_size; ++i) d.context.push_back(draw_point());
    return d;
  };
}

namespace {

// top1 − top2 utility; exactly 0 when the argmax is tied
double draw_margin(const UtilityFn& u, const ContextDraw& d, int top_index) {
  double second = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < d.context.size(); ++j) {
    if (static_cast<int>(j) == top_index) continue;
    second = std::max(second, u(d.q, d.context[j]));
  }
  return u(d.q, d.context[top_index]) - second;
}

}  // namespace

double estimate_margin(const UtilityFn& u, const ContextSampler& sampler, double epsilon,
                       int trials) {
  if (trials < 100) throw InvalidArgument("estimate_margin: need at least 100 trials");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw InvalidArgument("estimate_margin: epsilon must be in (0,1)");

  std::vector<double> margins;
  margins.reserve(trials);
  bool any_positive = false;
  for (int i = 0; i < trials; ++i) {
    const ContextDraw d = sampler(static_cast<std::uint64_t>(i));
    if (d.context.size() < 2)
      throw InvalidArgument("estimate_margin: contexts need at least 2 elements");
    const SelectResult sel = select(u, d.q, d.context);
    const double m = draw_margin(u, d, sel.index);
    margins.push_back(m);
    any_positive = any_positive || m > 0.0;
  }
  if (!any_positive)
    throw ZeroMargin("estimate_margin: every draw produced a tied argmax");

  std::sort(margins.begin(), margins.end());
  const int k = std::max(1, static_cast<int>(std::floor(epsilon * trials)));
  return margins[k - 1];
}

AttentionBuild build_attention_from_utility(const UtilityFn& u, const BoxDomain& domain,
                                            double eta, const BuildOptions& opts) {
  if (!u) throw InvalidArgument("build_attention_from_utility: null utility");
  if (!(eta > 0.0))
    throw InvalidArgument("build_attention_from_utility: eta must be > 0");
  AttentionBuild out;
  out.approx = build_asymmetric_approximator(Relation::black_box(u), domain, 0.25 * eta,
                                             opts);
  out.module = AttentionModule::from_factored(out.approx.relation, 1.0);
  return out;
}

RetrievalReport verify_retrieval(const AttentionModule& module, const UtilityFn& u,
                                 const ContextSampler& sampler,
                                 const VerifyOptions& opts) {
  if (opts.trials < 100)
    throw InvalidArgument("verify_retrieval: need at least 100 trials");
  if (!(opts.epsilon_prob > 0.0 && opts.epsilon_prob < 1.0))
    throw InvalidArgument("verify_retrieval: epsilon_prob must be in (0,1)");
  const double eps_out = opts.epsilon_out < 0.0 ? opts.epsilon_prob : opts.epsilon_out;
  if (!(eps_out > 0.0))
    throw InvalidArgument("verify_retrieval: epsilon_out must be > 0");

  RetrievalReport r;
  r.seed = opts.seed;
  r.trials = opts.trials;
  r.epsilon_prob = opts.epsilon_prob;
  r.epsilon_out = eps_out;
  r.beta = module.beta;
  r.eta = opts.eta;

  long successes = 0, hits = 0, hit_successes = 0, counted = 0;
  double err_sum = 0.0, err_max = 0.0;
  for (int i = 0; i < opts.trials; ++i) {
    const ContextDraw d = sampler(static_cast<std::uint64_t>(i));
    const SelectResult sel = select(u, d.q, d.context);
    const double margin = draw_margin(u, d, sel.index);
    if (margin == 0.0) {  // tied argmax: Select's output is arbitrary
      ++r.tie_draws;
      continue;
    }
    const Point out = attention(module, d.q, d.context);
    const double err = (out - sel.element).norm();
    const bool ok = err < eps_out;
    const bool hit = margin > opts.eta;
    ++counted;
    successes += ok;
    hits += hit;
    hit_successes += (ok && hit);
    err_sum += err;
    err_max = std::max(err_max, err);
  }
  if (counted == 0)
    throw ZeroMargin("verify_retrieval: every draw produced a tied argmax");

  r.success_rate = static_cast<double>(successes) / counted;
  r.margin_hit_rate = static_cast<double>(hits) / counted;
  r.conditional_success_rate =
      hits > 0 ? static_cast<double>(hit_successes) / hits
               : std::numeric_limits<double>::quiet_NaN();
  r.mean_error = err_sum / counted;
  r.max_error = err_max;
  return r;
}

nlohmann::json report_to_json(const RetrievalReport& r) {
  nlohmann::json j;
  j["seed"] = r.seed;
  j["trials"] = r.trials;
  j["epsilon_prob"] = r.epsilon_prob;
  j["epsilon_out"] = r.epsilon_out;
  j["beta"] = r.beta;
  j["eta"] = r.eta;
  j["success_rate"] = r.success_rate;
  j["margin_hit_rate"] = r.margin_hit_rate;
  j["conditional_success_rate"] = r.conditional_success_rate;
  j["mean_error"] = r.mean_error;
  j["max_error"] = r.max_error;
  j["tie_draws"] = r.tie_draws;
  return j;
}

}  // namespace relkit
