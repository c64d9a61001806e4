#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "relkit/errors.hpp"
#include "relkit/experiment.hpp"

using namespace relkit;

namespace {

ExperimentConfig budget_config() {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::BudgetReport;
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name)
      : path((std::filesystem::temp_directory_path() / name).string()) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("kind_from_string: round trips and rejects strangers") {
  for (const char* name : {"asym-approx", "sym-approx", "feature-pair",
                           "attention-verify", "budget-report"})
    CHECK(kind_to_string(kind_from_string(name)) == name);
  try {
    kind_from_string("frobnicate");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("asym-approx") != std::string::npos);
  }
}

TEST_CASE("parse_config: full file populates every section") {
  const std::string text = R"(
# comment line
[experiment]
kind = sym-approx   # trailing comment
seed = 99

[domain]
dim = 2
lower = -1
upper = 1

[relation]
id = order-sign
params = 4.0

[kernel]
id = rbf
params = 0.5
landmarks = 150

[utility]
id = dot

[build]
epsilon = 0.05
landmark_cap = 50000
matrix_cap = 8192
heldout_pairs = 500
probe_pairs = 32
eval_pairs = 128

[attention]
context_size = 4
epsilon_prob = 0.2
epsilon_out = 0.3
eta = 0.4
beta = 12.5
margin_trials = 200
verify_trials = 150

[budget]
kind = barron
d_r = 3
C = 2.0
radius = 1.5
B = 0.5
epsilon = 0.25

[output]
format = csv
timings = on

[sweep]
axis = epsilon
values = 0.4, 0.2, 0.1
)";
  const ExperimentConfig cfg = parse_config(text);
  CHECK(cfg.kind == ExperimentKind::SymApprox);
  CHECK(cfg.seed == 99u);
  CHECK(cfg.dim == 2);
  CHECK(cfg.lower == -1.0);
  CHECK(cfg.upper == 1.0);
  CHECK(cfg.relation_id == "order-sign");
  CHECK(cfg.relation_params == std::vector<double>{4.0});
  CHECK(cfg.kernel_id == "rbf");
  CHECK(cfg.kernel_params == std::vector<double>{0.5});
  CHECK(cfg.kernel_landmarks == 150);
  CHECK(cfg.utility_id == "dot");
  CHECK(cfg.epsilon == 0.05);
  CHECK(cfg.landmark_cap == 50000u);
  CHECK(cfg.matrix_cap == 8192u);
  CHECK(cfg.heldout_pairs == 500);
  CHECK(cfg.probe_pairs == 32);
  CHECK(cfg.eval_pairs == 128);
  CHECK(cfg.context_size == 4);
  CHECK(cfg.epsilon_prob == 0.2);
  CHECK(cfg.epsilon_out == 0.3);
  CHECK(cfg.eta == 0.4);
  CHECK(cfg.beta_override == 12.5);
  CHECK(cfg.margin_trials == 200);
  CHECK(cfg.verify_trials == 150);
  CHECK(cfg.budget_kind == "barron");
  CHECK(cfg.budget_d_r == 3);
  CHECK(cfg.budget_C == 2.0);
  CHECK(cfg.budget_radius == 1.5);
  CHECK(cfg.budget_B == 0.5);
  CHECK(cfg.budget_epsilon == 0.25);
  CHECK(cfg.format == "csv");
  CHECK(cfg.timings);
  CHECK(cfg.sweep_axis == "epsilon");
  CHECK(cfg.sweep_values == std::vector<double>{0.4, 0.2, 0.1});
}

TEST_CASE("parse_config: defaults survive an empty file") {
  const ExperimentConfig cfg = parse_config("");
  CHECK(cfg.kind == ExperimentKind::AsymApprox);
  CHECK(cfg.seed == 0u);
  CHECK(cfg.dim == 1);
  CHECK(cfg.epsilon == 0.1);
  CHECK(cfg.relation_id == "sin-diff");
  CHECK(cfg.format == "json");
  CHECK_FALSE(cfg.timings);
}

TEST_CASE("parse_config: malformed input names the line") {
  try {
    parse_config("[domain\ndim = 2\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
  try {
    parse_config("[domain]\ndim 2\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("[nosuch]\nx = 1\n"), ConfigError);
  try {
    parse_config("[domain]\nwidth = 2\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[domain]") != std::string::npos);
    CHECK(msg.find("width") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("[domain]\ndim = two\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[domain]\ndim = 2.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[experiment]\nseed = -3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[output]\ntimings = maybe\n"), ConfigError);
}

TEST_CASE("validate_config: range gates") {
  ExperimentConfig cfg;
  cfg.dim = 0;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  cfg.dim = 17;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  cfg = ExperimentConfig{};
  cfg.lower = 1.0;
  cfg.upper = 0.0;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  cfg = ExperimentConfig{};
  cfg.epsilon = 0.0;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  cfg = ExperimentConfig{};
  cfg.format = "xml";
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  cfg = ExperimentConfig{};
  cfg.relation_id = "no-such-relation";
  try {
    validate_config(cfg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("sin-diff") != std::string::npos);
  }
  cfg = ExperimentConfig{};
  cfg.kind = ExperimentKind::BudgetReport;
  cfg.budget_kind = "quantum";
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  cfg = budget_config();
  cfg.budget_epsilon = -1.0;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  cfg = ExperimentConfig{};
  cfg.kind = ExperimentKind::AttentionVerify;
  cfg.context_size = 1;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  cfg = ExperimentConfig{};
  cfg.kind = ExperimentKind::AttentionVerify;
  cfg.verify_trials = 50;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);
}

TEST_CASE("ReportRow: lookup and NaN-tolerant equality") {
  ReportRow a;
  a.set("name", std::string("x"));
  a.set("count", 3);
  a.set("value", 1.5);
  CHECK(a.find("name") != nullptr);
  CHECK(a.find("missing") == nullptr);
  CHECK(a.number("count") == 3.0);
  CHECK(a.number("value") == 1.5);
  CHECK_THROWS_AS(a.number("name"), InvalidArgument);
  CHECK_THROWS_AS(a.number("missing"), InvalidArgument);

  ReportRow b = a;
  CHECK(a == b);
  b.set("extra", 1.0);
  CHECK_FALSE(a == b);

  // NaN fields compare equal so serialization round trips hold
  ReportRow n1, n2;
  n1.set("v", std::numeric_limits<double>::quiet_NaN());
  n2.set("v", std::numeric_limits<double>::quiet_NaN());
  CHECK(n1 == n2);

  // same key, different variant type: not equal
  ReportRow t1, t2;
  t1.set("v", std::uint64_t{1});
  t2.set("v", 1.0);
  CHECK_FALSE(t1 == t2);
}

TEST_CASE("run_experiment: budget spot values") {
  ExperimentConfig cfg = budget_config();
  cfg.budget_epsilon = 4.0;
  const ReportRow row = run_experiment(cfg);
  CHECK(row.number("value") == 1.0);
  CHECK(row.number("overflow") == 0.0);
  // log10(value) consistent with value
  CHECK(row.number("log10_value") == doctest::Approx(0.0));

  cfg.budget_kind = "barron";
  cfg.budget_d_r = 2;
  cfg.budget_epsilon = 1.0;
  CHECK(run_experiment(cfg).number("value") == 8.0);
}

TEST_CASE("run_experiment: asymmetric build certifies its own epsilon") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::AsymApprox;
  cfg.seed = 7;
  cfg.epsilon = 0.1;
  const ReportRow row = run_experiment(cfg);
  CHECK(row.number("sup_error") <= 0.1);
  CHECK(row.number("l2_error") <= row.number("sup_error"));
  CHECK(row.number("n_landmarks") >= 1.0);
  CHECK(row.number("delta") > 0.0);
  const auto* kind = row.find("kind");
  REQUIRE(kind != nullptr);
  CHECK(std::get<std::string>(*kind) == "asym-approx");
}

TEST_CASE("run_experiment: attention rates live in [0,1] and beta drives success") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::AttentionVerify;
  cfg.eta = 0.4;  // pin the margin so the build stays small
  cfg.verify_trials = 400;
  cfg.margin_trials = 200;

  cfg.beta_override = 0.0;
  const ReportRow uniform = run_experiment(cfg);
  for (const char* key : {"success_rate", "margin_hit_rate"}) {
    CHECK(uniform.number(key) >= 0.0);
    CHECK(uniform.number(key) <= 1.0);
  }
  CHECK(uniform.number("beta") == 0.0);
  CHECK(uniform.number("eta") == 0.4);

  cfg.beta_override = 200.0;
  const ReportRow sharp = run_experiment(cfg);
  CHECK(sharp.number("success_rate") > uniform.number("success_rate"));
  CHECK(sharp.number("max_error") >= sharp.number("mean_error"));
}

TEST_CASE("run_experiment: rows are deterministic field for field") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::AsymApprox;
  cfg.seed = 3;
  cfg.epsilon = 0.2;
  const ReportRow a = run_experiment(cfg);
  const ReportRow b = run_experiment(cfg);
  CHECK(a == b);
  CHECK(render_report({a}, "json") == render_report({b}, "json"));

  // timings adds a wall-clock column and breaks byte equality by design
  cfg.timings = true;
  const ReportRow timed = run_experiment(cfg);
  CHECK(timed.find("wall_ms") != nullptr);
  CHECK_FALSE(a == timed);
}

TEST_CASE("sweep: epsilon ladder gives nonincreasing errors in input order") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::AsymApprox;
  const auto rows = sweep(cfg, "epsilon", {0.4, 0.2, 0.1});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].number("epsilon") == 0.4);
  CHECK(rows[1].number("epsilon") == 0.2);
  CHECK(rows[2].number("epsilon") == 0.1);
  CHECK(rows[0].number("sup_error") >= rows[1].number("sup_error"));
  CHECK(rows[1].number("sup_error") >= rows[2].number("sup_error"));

  // identical sweep twice: identical bytes
  CHECK(render_report(rows, "json") ==
        render_report(sweep(cfg, "epsilon", {0.4, 0.2, 0.1}), "json"));
}

TEST_CASE("sweep: beta ladder gives nondecreasing success rates") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::AttentionVerify;
  cfg.eta = 0.4;
  cfg.verify_trials = 300;
  cfg.margin_trials = 200;
  const auto rows = sweep(cfg, "beta", {1.0, 10.0, 100.0});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].number("success_rate") <= rows[1].number("success_rate"));
  CHECK(rows[1].number("success_rate") <= rows[2].number("success_rate"));
}

TEST_CASE("sweep: empty value list, unknown and non-numeric axes") {
  ExperimentConfig cfg = budget_config();
  CHECK(sweep(cfg, "budget_epsilon", {}).empty());
  try {
    sweep(cfg, "flux_capacitance", {1.0});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("epsilon") != std::string::npos);
  }
  // integer axes reject fractional values
  CHECK_THROWS_AS(sweep(cfg, "budget_dim", {1.5}), ConfigError);
  CHECK_THROWS_AS(sweep(cfg, "seed", {-1.0}), ConfigError);
  // values that break validation surface as ConfigError too
  CHECK_THROWS_AS(sweep(cfg, "budget_epsilon", {-2.0}), ConfigError);
}

TEST_CASE("sweep: seed axis varies the seed, others keep the base") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::AsymApprox;
  cfg.seed = 11;
  const auto rows = sweep(cfg, "seed", {1.0, 2.0});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].number("seed") == 1.0);
  CHECK(rows[1].number("seed") == 2.0);
  const auto eps_rows = sweep(cfg, "epsilon", {0.3, 0.2});
  CHECK(eps_rows[0].number("seed") == 11.0);
  CHECK(eps_rows[1].number("seed") == 11.0);
}

TEST_CASE("render_report: json array shape and 17-digit floats") {
  ReportRow row;
  row.set("kind", std::string("demo"));
  row.set("count", 2);
  row.set("value", 0.1);
  row.set("whole", 3.0);
  const std::string out = render_report({row}, "json");
  CHECK(out.front() == '[');
  CHECK(out.back() == '\n');
  CHECK(out.find("0.10000000000000001") != std::string::npos);  // 17 significant digits
  CHECK(out.find("\"whole\": 3.0") != std::string::npos);       // float marker kept
  CHECK(out.find("\"count\": 2") != std::string::npos);         // integers stay bare
  CHECK(out.find('\r') == std::string::npos);

  CHECK(render_report({}, "json") == "[]\n");

  // one row per line: 3 rows -> brackets plus 3 lines
  const std::string three = render_report({row, row, row}, "json");
  CHECK(std::count(three.begin(), three.end(), '\n') == 5);
}

TEST_CASE("render_report: non-finite values and round trip") {
  ReportRow row;
  row.set("kind", std::string("edge"));
  row.set("pos", std::numeric_limits<double>::infinity());
  row.set("neg", -std::numeric_limits<double>::infinity());
  row.set("gap", std::numeric_limits<double>::quiet_NaN());
  row.set("count", std::uint64_t{18446744073709551615ull});
  row.set("note", std::string("a \"quoted\" name"));
  const std::string out = render_report({row}, "json");
  CHECK(out.find("\"inf\"") != std::string::npos);
  CHECK(out.find("\"-inf\"") != std::string::npos);
  CHECK(out.find("\"nan\"") != std::string::npos);
  CHECK(out.find("18446744073709551615") != std::string::npos);

  const auto parsed = parse_report_json(out);
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0] == row);
}

TEST_CASE("render_report: csv header, quoting, and ragged rejection") {
  ReportRow row;
  row.set("kind", std::string("demo"));
  row.set("value", 0.5);
  row.set("label", std::string("x,y \"z\""));
  const std::string out = render_report({row}, "csv");
  CHECK(out == "kind,value,label\ndemo,0.5,\"x,y \"\"z\"\"\"\n");

  ReportRow other;
  other.set("kind", std::string("demo"));
  other.set("different", 1.0);
  CHECK_THROWS_AS(render_report({row, other}, "csv"), InvalidArgument);
  CHECK_THROWS_AS(render_report({row}, "yaml"), InvalidArgument);

  // 3 rows -> header + 3 lines
  const std::string three = render_report({row, row, row}, "csv");
  CHECK(std::count(three.begin(), three.end(), '\n') == 4);
}

TEST_CASE("emit_report: writes the rendered bytes, honors the empty flag") {
  ReportRow row;
  row.set("v", 1.25);
  TempFile tmp("relkit_emit_test.json");
  emit_report({row}, "json", tmp.path);
  CHECK(slurp(tmp.path) == render_report({row}, "json"));

  CHECK_THROWS_AS(emit_report({}, "json", tmp.path), InvalidArgument);
  emit_report({}, "json", tmp.path, /*allow_empty=*/true);
  CHECK(slurp(tmp.path) == "[]\n");

  CHECK_THROWS_AS(emit_report({row}, "json", "/nonexistent-dir/report.json"), IoError);
}

TEST_CASE("parse_report_json: value classes survive a round trip") {
  ExperimentConfig cfg = budget_config();
  const ReportRow row = run_experiment(cfg);
  const auto parsed = parse_report_json(render_report({row}, "json"));
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0] == row);
  CHECK(parse_report_json("[]\n").empty());
  CHECK_THROWS_AS(parse_report_json("{not json"), InvalidArgument);
}

TEST_CASE("run_experiment: feature-pair row records truncation against the cap") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::FeaturePairTrunc;
  cfg.relation_id = "geom-pair";
  cfg.epsilon = 0.1;
  const ReportRow row = run_experiment(cfg);
  CHECK(row.number("d_truncation") >= 1.0);
  CHECK(row.number("d_truncation") < row.number("cap"));
  CHECK(row.number("residual") <= 0.05);
  CHECK(row.number("declared_tail_at_cap") > 0.0);
}

TEST_CASE("run_experiment: symmetric kernel row brackets the truncation") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::SymApprox;
  cfg.epsilon = 0.1;
  cfg.kernel_landmarks = 60;
  const ReportRow row = run_experiment(cfg);
  CHECK(row.number("sup_error") <= 0.1);
  CHECK(row.number("residual_at_d") <= 0.05);
  CHECK(row.number("residual_below_d") > 0.05);
  CHECK(row.number("d_truncation") >= 1.0);
  CHECK(row.number("eigenfunction_bound") > 0.0);
}
