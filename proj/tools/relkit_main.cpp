#include <array>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relkit/errors.hpp"
#include "relkit/experiment.hpp"

namespace {

struct SubSpec {
  CLI::App* cmd = nullptr;
  std::string kind;  // empty for `sweep`: the config names the kind
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_path;
  std::string format;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "build, certify, and report on inner-product approximations of relation "
      "functions"};
  app.require_subcommand(1);

  const std::array<std::array<const char*, 3>, 6> defs = {{
      {"approx-asym", "asym-approx",
       "factor a continuous relation into two feature maps over a quantization lattice"},
      {"approx-sym", "sym-approx",
       "truncated spectral features for a symmetric positive-definite kernel"},
      {"feature-pair", "feature-pair",
       "truncate a declared feature-pair series to a target accuracy"},
      {"attention-verify", "attention-verify",
       "calibrate softmax temperature and verify argmax retrieval empirically"},
      {"budget", "budget-report", "evaluate closed-form neuron-count budgets"},
      {"sweep", "", "run the configured experiment once per value of a numeric axis"},
  }};

  std::vector<std::unique_ptr<SubSpec>> subs;
  for (const auto& [name, kind, desc] : defs) {
    auto spec = std::make_unique<SubSpec>();
    spec->kind = kind;
    spec->cmd = app.add_subcommand(name, desc);
    spec->cmd->add_option("--config", spec->config_path,
                          "experiment config file (key = value in named sections)");
    spec->cmd->add_option("--seed", spec->seed, "seed override; wins over the config");
    spec->cmd->add_option("--out", spec->out_path,
                          "report path override; stdout when neither flag nor config names one");
    spec->cmd->add_option("--format", spec->format, "report format override")
        ->check(CLI::IsMember({"json", "csv"}));
    subs.push_back(std::move(spec));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help text or the usage error
    return code == 0 ? 0 : 2;
  }

  SubSpec* active = nullptr;
  for (const auto& s : subs)
    if (s->cmd->parsed()) active = s.get();
  if (!active) {
    std::cerr << "error: no subcommand parsed\n";
    return 2;
  }

  try {
    relkit::ExperimentConfig cfg;
    if (!active->config_path.empty()) cfg = relkit::load_config(active->config_path);
    const bool is_sweep = active->kind.empty();
    if (!is_sweep) cfg.kind = relkit::kind_from_string(active->kind);
    if (active->cmd->count("--seed")) cfg.seed = active->seed;
    if (active->cmd->count("--out")) cfg.out_path = active->out_path;
    if (active->cmd->count("--format")) cfg.format = active->format;

    std::vector<relkit::ReportRow> rows;
    if (is_sweep) {
      if (cfg.sweep_axis.empty())
        throw relkit::ConfigError("sweep: config must set [sweep] axis and values");
      rows = relkit::sweep(cfg, cfg.sweep_axis, cfg.sweep_values);
    } else {
      rows.push_back(relkit::run_experiment(cfg));
    }

    if (cfg.out_path.empty())
      std::cout << relkit::render_report(rows, cfg.format);
    else
      relkit::emit_report(rows, cfg.format, cfg.out_path, /*allow_empty=*/is_sweep);
    return 0;
  } catch (const relkit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const relkit::BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return 4;
  } catch (const relkit::CertificationFailure& e) {
    std::cerr << "certification failure: " << e.what() << '\n';
    return 3;
  } catch (const relkit::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
