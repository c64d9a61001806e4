#include "relkit/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "relkit/attention.hpp"
#include "relkit/errors.hpp"
#include "relkit/factored.hpp"
#include "relkit/nystrom.hpp"
#include "relkit/registry.hpp"
#include "relkit/rng.hpp"

namespace relkit {

namespace {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t s = base + 0x9e3779b97f4a7c15ull * (salt + 1);
  return splitmix64(s);
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& v, const std::string& where) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + v + "' is not a number (" + where + ")");
  }
}

std::uint64_t parse_u64(const std::string& v, const std::string& where) {
  try {
    // stoull would wrap "-3" around instead of rejecting it
    if (v.empty() || v[0] == '-') throw std::invalid_argument(v);
    std::size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + v + "' is not an unsigned integer (" + where + ")");
  }
}

int parse_int(const std::string& v, const std::string& where) {
  try {
    std::size_t used = 0;
    const long x = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return static_cast<int>(x);
  } catch (const std::exception&) {
    throw ConfigError("config: '" + v + "' is not an integer (" + where + ")");
  }
}

bool parse_bool(const std::string& v, const std::string& where) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw ConfigError("config: '" + v + "' is not on/off (" + where + ")");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::vector<double> parse_double_list(const std::string& v, const std::string& where) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  for (const std::string& tok : split(v, ','))
    out.push_back(parse_double(tok, where));
  return out;
}

// points separated by ';', coordinates by ','
std::vector<Point> parse_point_list(const std::string& v, const std::string& where) {
  std::vector<Point> out;
  if (trim(v).empty()) return out;
  for (const std::string& tok : split(v, ';')) {
    const std::vector<double> coords = parse_double_list(tok, where);
    if (coords.empty()) throw ConfigError("config: empty point in " + where);
    Point p(static_cast<Eigen::Index>(coords.size()));
    for (std::size_t i = 0; i < coords.size(); ++i) p[static_cast<Eigen::Index>(i)] = coords[i];
    out.push_back(std::move(p));
  }
  return out;
}

Eigen::MatrixXd parse_matrix(const std::string& v, const std::string& where) {
  std::vector<std::vector<double>> rows;
  for (const std::string& tok : split(v, ';'))
    rows.push_back(parse_double_list(tok, where));
  if (rows.empty() || rows[0].empty())
    throw ConfigError("config: empty matrix in " + where);
  Eigen::MatrixXd M(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size())
      throw ConfigError("config: ragged matrix in " + where);
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return M;
}

BoxDomain make_domain(const ExperimentConfig& cfg) {
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(cfg.dim, cfg.lower);
  Eigen::VectorXd up = Eigen::VectorXd::Constant(cfg.dim, cfg.upper);
  return BoxDomain(lo, up);
}

BuildOptions make_build_options(const ExperimentConfig& cfg) {
  BuildOptions o;
  o.landmark_cap = cfg.landmark_cap;
  o.matrix_cap = cfg.matrix_cap;
  o.seed = cfg.seed;
  o.heldout_pairs = cfg.heldout_pairs;
  o.probe_pairs = cfg.probe_pairs;
  return o;
}

}  // namespace

ExperimentKind kind_from_string(const std::string& s) {
  if (s == "asym-approx") return ExperimentKind::AsymApprox;
  if (s == "sym-approx") return ExperimentKind::SymApprox;
  if (s == "feature-pair") return ExperimentKind::FeaturePairTrunc;
  if (s == "attention-verify") return ExperimentKind::AttentionVerify;
  if (s == "budget-report") return ExperimentKind::BudgetReport;
  throw ConfigError("config: unknown experiment kind '" + s +
                    "'; known: asym-approx, sym-approx, feature-pair, "
                    "attention-verify, budget-report");
}

std::string kind_to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::AsymApprox: return "asym-approx";
    case ExperimentKind::SymApprox: return "sym-approx";
    case ExperimentKind::FeaturePairTrunc: return "feature-pair";
    case ExperimentKind::AttentionVerify: return "attention-verify";
    case ExperimentKind::BudgetReport: return "budget-report";
  }
  return "?";
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    const std::string where = "[" + section + "] " + key;

    if (section == "experiment") {
      if (key == "kind") cfg.kind = kind_from_string(val);
      else if (key == "seed") cfg.seed = parse_u64(val, where);
      else throw ConfigError("config: unknown key " + where);
    } else if (section == "domain") {
      if (key == "dim") cfg.dim = parse_int(val, where);
      else if (key == "lower") cfg.lower = parse_double(val, where);
      else if (key == "upper") cfg.upper = parse_double(val, where);
      else throw ConfigError("config: unknown key " + where);
    } else if (section == "relation") {
      if (key == "id") cfg.relation_id = val;
      else if (key == "params") cfg.relation_params = parse_double_list(val, where);
      else throw ConfigError("config: unknown key " + where);
    } else if (section == "kernel") {
      if (key == "id") cfg.kernel_id = val;
      else if (key == "params") cfg.kernel_params = parse_double_list(val, where);
      else if (key == "landmarks") cfg.kernel_landmarks = parse_int(val, where);
      else throw ConfigError("config: unknown key " + where);
    } else if (section == "utility") {
      if (key == "id") cfg.utility_id = val;
      else if (key == "params") cfg.utility_params = parse_double_list(val, where);
      else if (key == "anchors") cfg.table_anchors = parse_point_list(val, where);
      else if (key == "table") cfg.table_values = parse_matrix(val, where);
      else throw ConfigError("config: unknown key " + where);
    } else if (section == "build") {
      if (key == "epsilon") cfg.epsilon = parse_double(val, where);
      else if (key == "landmark_cap") cfg.landmark_cap = parse_u64(val, where);
      else if (key == "matrix_cap") cfg.matrix_cap = parse_u64(val, where);
      else if (key == "heldout_pairs") cfg.heldout_pairs = parse_int(val, where);
      else if (key == "probe_pairs") cfg.probe_pairs = parse_int(val, where);
      else if (key == "eval_pairs") cfg.eval_pairs = parse_int(val, where);
      else throw ConfigError("config: unknown key " + where);
    } else if (section == "attention") {
      if (key == "context_size") cfg.context_size = parse_int(val, where);
      else if (key == "epsilon_prob") cfg.epsilon_prob = parse_double(val, where);
      else if (key == "epsilon_out") cfg.epsilon_out = parse_double(val, where);
      else if (key == "eta") cfg.eta = parse_double(val, where);
      else if (key == "beta") cfg.beta_override = parse_double(val, where);
      else if (key == "margin_trials") cfg.margin_trials = parse_int(val, where);
      else if (key == "verify_trials") cfg.verify_trials = parse_int(val, where);
      else throw ConfigError("config: unknown key " + where);
    } else if (section == "budget") {
      if (key == "kind") cfg.budget_kind = val;
      else if (key == "d_r") cfg.budget_d_r = parse_int(val, where);
      else if (key == "C") cfg.budget_C = parse_double(val, where);
      else if (key == "L") cfg.budget_L = parse_double(val, where);
      else if (key == "radius") cfg.budget_radius = parse_double(val, where);
      else if (key == "B") cfg.budget_B = parse_double(val, where);
      else if (key == "epsilon") cfg.budget_epsilon = parse_double(val, where);
      else if (key == "dim") cfg.budget_dim = parse_int(val, where);
      else throw ConfigError("config: unknown key " + where);
    } else if (section == "output") {
      if (key == "path") cfg.out_path = val;
      else if (key == "format") cfg.format = val;
      else if (key == "timings") cfg.timings = parse_bool(val, where);
      else throw ConfigError("config: unknown key " + where);
    } else if (section == "sweep") {
      if (key == "axis") cfg.sweep_axis = val;
      else if (key == "values") cfg.sweep_values = parse_double_list(val, where);
      else throw ConfigError("config: unknown key " + where);
    } else {
      throw ConfigError("config: unknown section [" + section + "]");
    }
  }
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.dim < 1 || cfg.dim > 16)
    throw ConfigError("config: domain dim must be in [1, 16]");
  if (!std::isfinite(cfg.lower) || !std::isfinite(cfg.upper) || !(cfg.lower < cfg.upper))
    throw ConfigError("config: domain needs finite lower < upper");
  if (!(cfg.epsilon > 0.0)) throw ConfigError("config: epsilon must be > 0");
  if (cfg.landmark_cap < 1 || cfg.matrix_cap < 1)
    throw ConfigError("config: budgets must be >= 1");
  if (cfg.heldout_pairs < 1 || cfg.probe_pairs < 1 || cfg.eval_pairs < 1)
    throw ConfigError("config: pair counts must be >= 1");
  if (cfg.format != "json" && cfg.format != "csv")
    throw ConfigError("config: format must be json or csv");

  switch (cfg.kind) {
    case ExperimentKind::AsymApprox:
      try {
        make_relation(cfg.relation_id, cfg.relation_params);
      } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
      break;
    case ExperimentKind::SymApprox:
      try {
        make_kernel(cfg.kernel_id, cfg.kernel_params);
      } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
      if (cfg.kernel_landmarks < 2)
        throw ConfigError("config: kernel landmarks must be >= 2");
      break;
    case ExperimentKind::FeaturePairTrunc:
      try {
        make_feature_pair(cfg.relation_id, cfg.relation_params);
      } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
      break;
    case ExperimentKind::AttentionVerify:
      if (cfg.utility_id == "custom-table") {
        if (cfg.table_anchors.empty())
          throw ConfigError("config: custom-table needs anchors");
        for (const Point& a : cfg.table_anchors)
          if (a.size() != cfg.dim)
            throw ConfigError("config: anchor dimension differs from the domain");
        if (cfg.table_values.rows() != static_cast<Eigen::Index>(cfg.table_anchors.size()) ||
            cfg.table_values.rows() != cfg.table_values.cols())
          throw ConfigError("config: table must be square with one row per anchor");
      } else {
        try {
          make_utility(cfg.utility_id, cfg.utility_params);
        } catch (const InvalidArgument& e) {
          throw ConfigError(std::string("config: ") + e.what());
        }
      }
      if (cfg.context_size < 2)
        throw ConfigError("config: context_size must be >= 2");
      if (cfg.margin_trials < 100 || cfg.verify_trials < 100)
        throw ConfigError("config: trial counts must be >= 100");
      if (!(cfg.epsilon_prob > 0.0 && cfg.epsilon_prob < 1.0))
        throw ConfigError("config: epsilon_prob must be in (0,1)");
      if (cfg.epsilon_out >= 0.0 && !(cfg.epsilon_out > 0.0))
        throw ConfigError("config: epsilon_out must be > 0");
      if (cfg.eta < 0.0) throw ConfigError("config: eta must be >= 0");
      break;
    case ExperimentKind::BudgetReport:
      if (cfg.budget_kind != "relu" && cfg.budget_kind != "barron")
        throw ConfigError("config: budget kind must be relu or barron");
      if (cfg.budget_d_r < 1 || cfg.budget_dim < 1 || !(cfg.budget_C > 0.0) ||
          !(cfg.budget_L > 0.0) || !(cfg.budget_radius > 0.0) ||
          !(cfg.budget_B > 0.0) || !(cfg.budget_epsilon > 0.0))
        throw ConfigError("config: budget inputs must all be positive");
      break;
  }
}

void ReportRow::set(const std::string& key, std::uint64_t v) {
  fields.emplace_back(key, ReportValue(v));
}
void ReportRow::set(const std::string& key, int v) {
  set(key, static_cast<std::uint64_t>(v));
}
void ReportRow::set(const std::string& key, double v) {
  fields.emplace_back(key, ReportValue(v));
}
void ReportRow::set(const std::string& key, const std::string& v) {
  fields.emplace_back(key, ReportValue(v));
}

const ReportValue* ReportRow::find(const std::string& key) const {
  for (const auto& [k, v] : fields)
    if (k == key) return &v;
  return nullptr;
}

bool ReportRow::operator==(const ReportRow& other) const {
  if (fields.size() != other.fields.size()) return false;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i].first != other.fields[i].first) return false;
    const ReportValue& a = fields[i].second;
    const ReportValue& b = other.fields[i].second;
    if (a.index() != b.index()) return false;
    if (std::holds_alternative<double>(a)) {
      const double x = std::get<double>(a), y = std::get<double>(b);
      // NaN compares equal to NaN here: rows survive a serialization round trip.
      if (!(x == y) && !(std::isnan(x) && std::isnan(y))) return false;
    } else if (a != b) {
      return false;
    }
  }
  return true;
}

double ReportRow::number(const std::string& key) const {
  const ReportValue* v = find(key);
  if (!v) throw InvalidArgument("ReportRow: no field '" + key + "'");
  if (std::holds_alternative<double>(*v)) return std::get<double>(*v);
  if (std::holds_alternative<std::uint64_t>(*v))
    return static_cast<double>(std::get<std::uint64_t>(*v));
  throw InvalidArgument("ReportRow: field '" + key + "' is not numeric");
}

namespace {

ReportRow run_asym(const ExperimentConfig& cfg) {
  const Relation r = make_relation(cfg.relation_id, cfg.relation_params);
  const BoxDomain dom = make_domain(cfg);
  const AsymmetricBuild b =
      build_asymmetric_approximator(r, dom, cfg.epsilon, make_build_options(cfg));
  ReportRow row;
  row.set("kind", kind_to_string(cfg.kind));
  row.set("seed", cfg.seed);
  row.set("relation", cfg.relation_id);
  row.set("dim", cfg.dim);
  row.set("epsilon", cfg.epsilon);
  row.set("delta", b.delta);
  row.set("n_landmarks", b.relation.cells());
  row.set("m_rank", b.relation.inner_dim());
  row.set("sup_error", b.sup_error_heldout);
  row.set("l2_error", b.l2_error_heldout);
  return row;
}

ReportRow run_sym(const ExperimentConfig& cfg) {
  const Kernel k = make_kernel(cfg.kernel_id, cfg.kernel_params);
  const BoxDomain dom = make_domain(cfg);
  SymmetricBuildOptions o;
  o.seed = cfg.seed;
  o.heldout_pairs = cfg.heldout_pairs;
  const SymmetricBuild b =
      build_symmetric_features(k, dom, cfg.epsilon, cfg.kernel_landmarks, o);
  const int d = b.map.truncation();
  const double bound = estimate_eigenfunction_bound(
      b.map, quasirandom_points(dom, 256, derive_seed(cfg.seed, 21)));
  ReportRow row;
  row.set("kind", kind_to_string(cfg.kind));
  row.set("seed", cfg.seed);
  row.set("kernel", cfg.kernel_id);
  row.set("dim", cfg.dim);
  row.set("epsilon", cfg.epsilon);
  row.set("m_landmarks", b.map.landmark_count());
  row.set("d_truncation", d);
  row.set("residual_at_d", landmark_residual(b.map, d));
  row.set("residual_below_d", landmark_residual(b.map, d - 1));
  row.set("eigenfunction_bound", bound);
  row.set("sup_error", b.sup_error_heldout);
  row.set("l2_error", b.l2_error_heldout);
  return row;
}

ReportRow run_pair(const ExperimentConfig& cfg) {
  const FeaturePair fp = make_feature_pair(cfg.relation_id, cfg.relation_params);
  const BoxDomain dom = make_domain(cfg);

  std::vector<PointPair> pairs;
  const Point lo = dom.lower(), up = dom.upper();
  pairs.emplace_back(lo, lo);
  pairs.emplace_back(up, up);
  pairs.emplace_back(lo, up);
  pairs.emplace_back(up, lo);
  for (auto& p : quasirandom_pairs(dom, cfg.eval_pairs, derive_seed(cfg.seed, 31)))
    pairs.push_back(std::move(p));

  const TruncatedFeaturePair t = truncate_feature_pair(fp, pairs, cfg.epsilon);
  double residual = 0.0;
  for (const auto& [x, y] : pairs) {
    double full = 0.0;
    for (int i = 0; i < fp.cap; ++i) full += fp.phi(i, x) * fp.phi_star(i, y);
    residual = std::max(residual, std::abs(full - t.evaluator(x, y)));
  }

  ReportRow row;
  row.set("kind", kind_to_string(cfg.kind));
  row.set("seed", cfg.seed);
  row.set("pair", cfg.relation_id);
  row.set("epsilon", cfg.epsilon);
  row.set("eval_pairs", static_cast<std::uint64_t>(pairs.size()));
  row.set("cap", fp.cap);
  row.set("d_truncation", t.d);
  row.set("residual", residual);
  if (fp.tail_bound) row.set("declared_tail_at_cap", fp.tail_bound(fp.cap));
  return row;
}

ReportRow run_attention(const ExperimentConfig& cfg) {
  const UtilityFn u = cfg.utility_id == "custom-table"
                          ? make_table_utility(cfg.table_anchors, cfg.table_values)
                          : make_utility(cfg.utility_id, cfg.utility_params);
  const BoxDomain dom = make_domain(cfg);

  const ContextSampler margin_sampler =
      uniform_context_sampler(dom, cfg.context_size, derive_seed(cfg.seed, 11));
  const double eta = cfg.eta > 0.0
                         ? cfg.eta
                         : estimate_margin(u, margin_sampler, cfg.epsilon_prob,
                                           cfg.margin_trials);

  AttentionBuild ab = build_attention_from_utility(u, dom, eta, make_build_options(cfg));
  const double eps_out = cfg.epsilon_out < 0.0 ? cfg.epsilon_prob : cfg.epsilon_out;
  ab.module.beta = cfg.beta_override >= 0.0
                       ? cfg.beta_override
                       : calibrate_beta(eta, cfg.context_size, dom.radius(), eps_out);

  VerifyOptions vo;
  vo.epsilon_prob = cfg.epsilon_prob;
  vo.epsilon_out = eps_out;
  vo.eta = eta;
  vo.trials = cfg.verify_trials;
  vo.seed = cfg.seed;
  const RetrievalReport rep = verify_retrieval(
      ab.module, u, uniform_context_sampler(dom, cfg.context_size, derive_seed(cfg.seed, 12)),
      vo);

  ReportRow row;
  row.set("kind", kind_to_string(cfg.kind));
  row.set("seed", cfg.seed);
  row.set("utility", cfg.utility_id);
  row.set("dim", cfg.dim);
  row.set("context_size", cfg.context_size);
  row.set("epsilon_prob", rep.epsilon_prob);
  row.set("epsilon_out", rep.epsilon_out);
  row.set("eta", eta);
  row.set("beta", ab.module.beta);
  row.set("margin_trials", cfg.margin_trials);
  row.set("verify_trials", cfg.verify_trials);
  row.set("n_landmarks", ab.approx.relation.cells());
  row.set("m_rank", ab.approx.relation.inner_dim());
  row.set("approx_sup_error", ab.approx.sup_error_heldout);
  row.set("success_rate", rep.success_rate);
  row.set("margin_hit_rate", rep.margin_hit_rate);
  row.set("conditional_success_rate", rep.conditional_success_rate);
  row.set("mean_error", rep.mean_error);
  row.set("max_error", rep.max_error);
  row.set("tie_draws", rep.tie_draws);
  return row;
}

ReportRow run_budget(const ExperimentConfig& cfg) {
  ReportRow row;
  row.set("kind", kind_to_string(cfg.kind));
  row.set("seed", cfg.seed);
  row.set("budget", cfg.budget_kind);
  row.set("d_r", cfg.budget_d_r);
  row.set("C", cfg.budget_C);
  NeuronBudget b;
  if (cfg.budget_kind == "relu") {
    row.set("L", cfg.budget_L);
    row.set("dim", cfg.budget_dim);
    row.set("epsilon", cfg.budget_epsilon);
    b = neuron_budget_relu(cfg.budget_d_r, cfg.budget_C, cfg.budget_L,
                           cfg.budget_epsilon, cfg.budget_dim);
  } else {
    row.set("radius", cfg.budget_radius);
    row.set("B", cfg.budget_B);
    row.set("epsilon", cfg.budget_epsilon);
    b = neuron_budget_barron(cfg.budget_d_r, cfg.budget_C, cfg.budget_radius,
                             cfg.budget_B, cfg.budget_epsilon);
  }
  row.set("value", b.value);
  row.set("log10_value", b.log10_value);
  row.set("overflow", static_cast<std::uint64_t>(b.overflow ? 1 : 0));
  return row;
}

}  // namespace

ReportRow run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  ReportRow row;
  switch (cfg.kind) {
    case ExperimentKind::AsymApprox: row = run_asym(cfg); break;
    case ExperimentKind::SymApprox: row = run_sym(cfg); break;
    case ExperimentKind::FeaturePairTrunc: row = run_pair(cfg); break;
    case ExperimentKind::AttentionVerify: row = run_attention(cfg); break;
    case ExperimentKind::BudgetReport: row = run_budget(cfg); break;
  }
  if (cfg.timings) {
    const auto t1 = std::chrono::steady_clock::now();
    row.set("wall_ms",
            std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(t1 - t0)
                .count());
  }
  return row;
}

std::vector<ReportRow> sweep(const ExperimentConfig& base, const std::string& axis,
                             const std::vector<double>& values) {
  using Setter = std::function<void(ExperimentConfig&, double)>;
  auto int_setter = [&axis](void (*apply)(ExperimentConfig&, int)) {
    return [apply, &axis](ExperimentConfig& c, double v) {
      if (v != std::floor(v))
        throw ConfigError("sweep: axis '" + axis + "' takes integer values");
      apply(c, static_cast<int>(v));
    };
  };

  std::vector<std::pair<std::string, Setter>> axes = {
      {"epsilon", [](ExperimentConfig& c, double v) { c.epsilon = v; }},
      {"eta", [](ExperimentConfig& c, double v) { c.eta = v; }},
      {"beta", [](ExperimentConfig& c, double v) { c.beta_override = v; }},
      {"epsilon_prob", [](ExperimentConfig& c, double v) { c.epsilon_prob = v; }},
      {"epsilon_out", [](ExperimentConfig& c, double v) { c.epsilon_out = v; }},
      {"budget_epsilon", [](ExperimentConfig& c, double v) { c.budget_epsilon = v; }},
      {"C", [](ExperimentConfig& c, double v) { c.budget_C = v; }},
      {"L", [](ExperimentConfig& c, double v) { c.budget_L = v; }},
      {"radius", [](ExperimentConfig& c, double v) { c.budget_radius = v; }},
      {"B", [](ExperimentConfig& c, double v) { c.budget_B = v; }},
      {"seed",
       [](ExperimentConfig& c, double v) {
         if (v != std::floor(v) || v < 0)
           throw ConfigError("sweep: seed values must be nonnegative integers");
         c.seed = static_cast<std::uint64_t>(v);
       }},
      {"dim", int_setter([](ExperimentConfig& c, int v) { c.dim = v; })},
      {"context_size", int_setter([](ExperimentConfig& c, int v) { c.context_size = v; })},
      {"landmarks", int_setter([](ExperimentConfig& c, int v) { c.kernel_landmarks = v; })},
      {"margin_trials", int_setter([](ExperimentConfig& c, int v) { c.margin_trials = v; })},
      {"verify_trials", int_setter([](ExperimentConfig& c, int v) { c.verify_trials = v; })},
      {"heldout_pairs", int_setter([](ExperimentConfig& c, int v) { c.heldout_pairs = v; })},
      {"probe_pairs", int_setter([](ExperimentConfig& c, int v) { c.probe_pairs = v; })},
      {"eval_pairs", int_setter([](ExperimentConfig& c, int v) { c.eval_pairs = v; })},
      {"d_r", int_setter([](ExperimentConfig& c, int v) { c.budget_d_r = v; })},
      {"budget_dim", int_setter([](ExperimentConfig& c, int v) { c.budget_dim = v; })},
  };

  const Setter* setter = nullptr;
  for (const auto& [name, fn] : axes)
    if (name == axis) setter = &fn;
  if (!setter) {
    std::string known;
    for (const auto& [name, fn] : axes) known += (known.empty() ? "" : ", ") + name;
    throw ConfigError("sweep: '" + axis + "' is not a numeric axis; known: " + known);
  }

  std::vector<ReportRow> rows;
  rows.reserve(values.size());
  for (const double v : values) {
    ExperimentConfig cfg = base;
    (*setter)(cfg, v);
    rows.push_back(run_experiment(cfg));
  }
  return rows;
}

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

std::string escape_json(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (static_cast<unsigned char>(c) < 0x20) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "\\u%04x", c);
      out += buf;
    } else {
      out += c;
    }
  }
  return out;
}

std::string json_value(const ReportValue& v) {
  if (std::holds_alternative<std::uint64_t>(v))
    return std::to_string(std::get<std::uint64_t>(v));
  if (std::holds_alternative<double>(v)) {
    const double d = std::get<double>(v);
    if (!std::isfinite(d)) return "\"" + format_double(d) + "\"";
    return format_double(d);
  }
  return "\"" + escape_json(std::get<std::string>(v)) + "\"";
}

std::string csv_value(const ReportValue& v) {
  if (std::holds_alternative<std::uint64_t>(v))
    return std::to_string(std::get<std::uint64_t>(v));
  if (std::holds_alternative<double>(v)) return format_double(std::get<double>(v));
  const std::string& s = std::get<std::string>(v);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string render_report(const std::vector<ReportRow>& rows, const std::string& format) {
  if (format == "json") {
    if (rows.empty()) return "[]\n";
    std::string out = "[\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
      out += "  {";
      for (std::size_t i = 0; i < rows[r].fields.size(); ++i) {
        const auto& [k, v] = rows[r].fields[i];
        out += (i ? ", " : "") + ("\"" + escape_json(k) + "\": ") + json_value(v);
      }
      out += r + 1 < rows.size() ? "},\n" : "}\n";
    }
    out += "]\n";
    return out;
  }
  if (format == "csv") {
    if (rows.empty()) return "";
    std::string out;
    for (std::size_t i = 0; i < rows[0].fields.size(); ++i)
      out += (i ? "," : "") + rows[0].fields[i].first;
    out += "\n";
    for (const ReportRow& row : rows) {
      if (row.fields.size() != rows[0].fields.size())
        throw InvalidArgument("render_report: rows disagree on columns");
      for (std::size_t i = 0; i < row.fields.size(); ++i) {
        if (row.fields[i].first != rows[0].fields[i].first)
          throw InvalidArgument("render_report: rows disagree on columns");
        out += (i ? "," : "") + csv_value(row.fields[i].second);
      }
      out += "\n";
    }
    return out;
  }
  throw InvalidArgument("render_report: format must be json or csv");
}

void emit_report(const std::vector<ReportRow>& rows, const std::string& format,
                 const std::string& path, bool allow_empty) {
  if (rows.empty() && !allow_empty)
    throw InvalidArgument("emit_report: refusing to write an empty report");
  const std::string text = render_report(rows, format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("emit_report: cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("emit_report: write to '" + path + "' failed");
}

std::vector<ReportRow> parse_report_json(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("parse_report_json: ") + e.what());
  }
  if (!j.is_array()) throw InvalidArgument("parse_report_json: expected an array");
  std::vector<ReportRow> rows;
  for (const auto& obj : j) {
    if (!obj.is_object())
      throw InvalidArgument("parse_report_json: expected an array of objects");
    ReportRow row;
    for (const auto& [k, v] : obj.items()) {
      if (v.is_number_unsigned()) {
        row.set(k, v.get<std::uint64_t>());
      } else if (v.is_number()) {
        row.set(k, v.get<double>());
      } else if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "inf")
          row.set(k, std::numeric_limits<double>::infinity());
        else if (s == "-inf")
          row.set(k, -std::numeric_limits<double>::infinity());
        else if (s == "nan")
          row.set(k, std::numeric_limits<double>::quiet_NaN());
        else
          row.set(k, s);
      } else {
        throw InvalidArgument("parse_report_json: unsupported value for '" + k + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace relkit
