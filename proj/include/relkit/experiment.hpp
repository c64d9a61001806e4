#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "relkit/domain.hpp"

namespace relkit {

enum class ExperimentKind {
  AsymApprox,      // "asym-approx"
  SymApprox,       // "sym-approx"
  FeaturePairTrunc,  // "feature-pair"
  AttentionVerify,   // "attention-verify"
  BudgetReport       // "budget-report"
};

ExperimentKind kind_from_string(const std::string& s);
std::string kind_to_string(ExperimentKind k);

// Parsed form of the sectioned key = value config file.  Every numeric field
// is range-checked at parse time.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::AsymApprox;
  std::uint64_t seed = 0;

  // [domain] — uniform box [lower, upper]^dim
  int dim = 1;
  double lower = 0.0;
  double upper = 1.0;

  // [relation] — also names the feature pair for the feature-pair kind
  std::string relation_id = "sin-diff";
  std::vector<double> relation_params;

  // [kernel]
  std::string kernel_id = "rbf";
  std::vector<double> kernel_params;
  int kernel_landmarks = 100;

  // [utility]
  std::string utility_id = "neg-sqdist";
  std::vector<double> utility_params;
  std::vector<Point> table_anchors;   // custom-table only
  Eigen::MatrixXd table_values;       // custom-table only

  // [build]
  double epsilon = 0.1;
  std::size_t landmark_cap = 100000;
  std::size_t matrix_cap = 16384;
  int heldout_pairs = 1000;
  int probe_pairs = 48;
  int eval_pairs = 256;

  // [attention]
  int context_size = 8;
  double epsilon_prob = 0.1;
  double epsilon_out = -1.0;   // < 0: same as epsilon_prob
  double eta = 0.0;            // 0: estimate empirically
  double beta_override = -1.0; // < 0: calibrate from eta
  int margin_trials = 10000;
  int verify_trials = 1000;

  // [budget]
  std::string budget_kind = "relu";  // or "barron"
  int budget_d_r = 1;
  double budget_C = 1.0;
  double budget_L = 1.0;
  double budget_radius = 1.0;
  double budget_B = 1.0;
  double budget_epsilon = 1.0;
  int budget_dim = 1;

  // [output]
  std::string out_path;  // empty: caller decides (CLI prints to stdout)
  std::string format = "json";
  bool timings = false;  // wall-clock column is opt-in; reports are otherwise
                         // byte-reproducible

  // [sweep]
  std::string sweep_axis;
  std::vector<double> sweep_values;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
void validate_config(const ExperimentConfig& cfg);

using ReportValue = std::variant<std::uint64_t, double, std::string>;

// Ordered field list; order is the CSV column order and the JSON key order.
struct ReportRow {
  std::vector<std::pair<std::string, ReportValue>> fields;

  void set(const std::string& key, std::uint64_t v);
  void set(const std::string& key, int v);
  void set(const std::string& key, double v);
  void set(const std::string& key, const std::string& v);
  const ReportValue* find(const std::string& key) const;
  double number(const std::string& key) const;  // numeric lookup, throws if absent

  // field-order-sensitive; NaN fields compare equal so round trips hold
  bool operator==(const ReportRow& other) const;
};

ReportRow run_experiment(const ExperimentConfig& cfg);

// One row per value, applied to the named numeric axis in input order; the
// seed base stays fixed unless the axis is the seed itself.
std::vector<ReportRow> sweep(const ExperimentConfig& base, const std::string& axis,
                             const std::vector<double>& values);

// format is "json" or "csv"; floats carry 17 significant digits, newlines are
// LF, non-finite values render as "inf"/"-inf"/"nan".
std::string render_report(const std::vector<ReportRow>& rows, const std::string& format);
void emit_report(const std::vector<ReportRow>& rows, const std::string& format,
                 const std::string& path, bool allow_empty = false);
std::vector<ReportRow> parse_report_json(const std::string& text);

}  // namespace relkit
