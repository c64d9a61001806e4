#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "relkit/attention.hpp"
#include "relkit/domain.hpp"
#include "relkit/errors.hpp"
#include "relkit/experiment.hpp"
#include "relkit/factored.hpp"
#include "relkit/indicator.hpp"
#include "relkit/nystrom.hpp"
#include "relkit/registry.hpp"
#include "relkit/relation.hpp"

namespace py = pybind11;
using namespace relkit;

namespace {

void register_errors(py::module_& m) {
  // base first: translators run newest-first, so subclasses must come after
  auto base = py::register_exception<Error>(m, "RelkitError");
  py::register_exception<InvalidArgument>(m, "InvalidArgumentError", base.ptr());
  py::register_exception<BudgetExceeded>(m, "BudgetExceededError", base.ptr());
  py::register_exception<CertificationFailure>(m, "CertificationFailureError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigurationError", base.ptr());
  py::register_exception<NotPsd>(m, "NotPsdError", base.ptr());
  py::register_exception<ZeroMargin>(m, "ZeroMarginError", base.ptr());
}

void register_domain(py::module_& m) {
  py::class_<BoxDomain>(m, "BoxDomain", "axis-aligned box in R^dim")
      .def(py::init<Eigen::VectorXd, Eigen::VectorXd>(), py::arg("lower"), py::arg("upper"))
      .def_property_readonly("dim", &BoxDomain::dim)
      .def_property_readonly("lower", &BoxDomain::lower)
      .def_property_readonly("upper", &BoxDomain::upper)
      .def("radius", &BoxDomain::radius)
      .def("diameter", &BoxDomain::diameter)
      .def("center", &BoxDomain::center)
      .def("contains", &BoxDomain::contains, py::arg("x"), py::arg("tol") = 0.0)
      .def("clamp", &BoxDomain::clamp, py::arg("x"));

  m.def("quasirandom_points", &quasirandom_points, py::arg("domain"), py::arg("count"),
        py::arg("seed"), "deterministic low-discrepancy points inside the box");
  m.def("quasirandom_pairs", &quasirandom_pairs, py::arg("domain"), py::arg("count"),
        py::arg("seed"));
}

void register_relations(py::module_& m) {
  py::class_<Relation>(m, "Relation", "relation function r(x, y)")
      .def("__call__", &Relation::operator(), py::arg("x"), py::arg("y"));

  py::class_<FeaturePair>(m, "FeaturePair", "explicit series sum_i phi_i(x) phi*_i(y)")
      .def_readonly("cap", &FeaturePair::cap)
      .def("phi", [](const FeaturePair& fp, int i, const Point& x) { return fp.phi(i, x); },
           py::arg("i"), py::arg("x"))
      .def("phi_star",
           [](const FeaturePair& fp, int i, const Point& y) { return fp.phi_star(i, y); },
           py::arg("i"), py::arg("y"));

  m.def("make_relation", &make_relation, py::arg("id"),
        py::arg("params") = std::vector<double>{});
  m.def("make_feature_pair", &make_feature_pair, py::arg("id"),
        py::arg("params") = std::vector<double>{});
  m.def("relation_ids", [] { return relation_ids(); });
  m.def("feature_pair_ids", [] { return feature_pair_ids(); });
  m.def("utility_ids", [] { return utility_ids(); });
  m.def("sup_error", &sup_error, py::arg("r"), py::arg("r_hat"), py::arg("pairs"));
  m.def("l2_error", &l2_error, py::arg("r"), py::arg("r_hat"), py::arg("pairs"));
  m.def("black_box_relation",
        [](RelationFn f) { return Relation::black_box(std::move(f)); }, py::arg("f"),
        "wrap a python callable (x, y) -> float as a Relation");
}

void register_quantizer(py::module_& m) {
  py::class_<IndicatorNetwork>(m, "IndicatorNetwork",
                               "two-layer threshold net one-hot encoding Voronoi cells")
      .def_property_readonly("size", &IndicatorNetwork::size)
      .def_property_readonly("dim", &IndicatorNetwork::dim)
      .def_property_readonly("landmarks",
                             [](const IndicatorNetwork& n) { return n.landmarks(); });

  m.def("place_landmarks", &place_landmarks, py::arg("domain"), py::arg("delta"),
        py::arg("cap") = std::size_t{100000},
        "lattice whose Voronoi cells have diameter <= delta");
  m.def("build_indicator_network",
        [](const std::vector<Point>& landmarks) {
          return build_indicator_network(landmarks, Activation::hard());
        },
        py::arg("landmarks"));
  m.def("eval_indicator", &eval_indicator, py::arg("net"), py::arg("x"));
  m.def("cell_index", &cell_index, py::arg("net"), py::arg("x"));
  m.def("quantize", &quantize, py::arg("landmarks"), py::arg("x"),
        "brute-force nearest-landmark index, ties to the lowest index");
}

BuildOptions build_options(std::size_t landmark_cap, std::size_t matrix_cap,
                           std::uint64_t seed, int heldout_pairs, int probe_pairs,
                           bool certify) {
  BuildOptions o;
  o.landmark_cap = landmark_cap;
  o.matrix_cap = matrix_cap;
  o.seed = seed;
  o.heldout_pairs = heldout_pairs;
  o.probe_pairs = probe_pairs;
  o.certify = certify;
  return o;
}

void register_factored(py::module_& m) {
  py::class_<Factorization>(m, "Factorization")
      .def_readonly("P", &Factorization::P)
      .def_readonly("Q", &Factorization::Q)
      .def_readonly("m", &Factorization::m);

  m.def("decompose_relation_matrix", &decompose_relation_matrix, py::arg("R"),
        py::arg("tol"), "truncated SVD factorization R ~= P^T Q");

  py::class_<FactoredRelation>(m, "FactoredRelation",
                               "pair scorer <P eta(x), Q eta(y)> over a Voronoi code")
      .def("__call__", &eval_factored, py::arg("x"), py::arg("y"))
      .def_property_readonly("inner_dim", &FactoredRelation::inner_dim)
      .def_property_readonly("cells", &FactoredRelation::cells)
      .def_property_readonly("P", [](const FactoredRelation& fr) { return fr.P(); })
      .def_property_readonly("Q", [](const FactoredRelation& fr) { return fr.Q(); })
      .def("phi", &FactoredRelation::phi, py::arg("x"))
      .def("psi", &FactoredRelation::psi, py::arg("y"));

  py::class_<AsymmetricBuild>(m, "AsymmetricBuild")
      .def_readonly("relation", &AsymmetricBuild::relation)
      .def_readonly("delta", &AsymmetricBuild::delta)
      .def_readonly("sup_error_heldout", &AsymmetricBuild::sup_error_heldout)
      .def_readonly("l2_error_heldout", &AsymmetricBuild::l2_error_heldout)
      .def_readonly("heldout", &AsymmetricBuild::heldout);

  m.def(
      "build_asymmetric_approximator",
      [](const Relation& r, const BoxDomain& domain, double epsilon,
         std::size_t landmark_cap, std::size_t matrix_cap, std::uint64_t seed,
         int heldout_pairs, int probe_pairs, bool certify) {
        return build_asymmetric_approximator(
            r, domain, epsilon,
            build_options(landmark_cap, matrix_cap, seed, heldout_pairs, probe_pairs,
                          certify));
      },
      py::arg("relation"), py::arg("domain"), py::arg("epsilon"),
      py::arg("landmark_cap") = std::size_t{100000},
      py::arg("matrix_cap") = std::size_t{16384}, py::arg("seed") = std::uint64_t{0},
      py::arg("heldout_pairs") = 1000, py::arg("probe_pairs") = 48,
      py::arg("certify") = true,
      "quantize-then-factor construction certified on held-out pairs");

  m.def("factored_to_json",
        [](const FactoredRelation& fr) { return factored_to_json(fr).dump(); },
        py::arg("relation"));
  m.def("factored_from_json",
        [](const std::string& text) {
          return factored_from_json(nlohmann::json::parse(text));
        },
        py::arg("text"));
}

void register_spectral(py::module_& m) {
  py::class_<Kernel>(m, "Kernel")
      .def_readonly("id", &Kernel::id)
      .def_readonly("params", &Kernel::params)
      .def("__call__", &Kernel::operator(), py::arg("x"), py::arg("y"));

  m.def("make_kernel", &make_kernel, py::arg("id"),
        py::arg("params") = std::vector<double>{});

  py::class_<NystromFeatureMap>(m, "FeatureMap",
                                "truncated spectral features phi with <phi(x), phi(y)> ~= k")
      .def_property_readonly("landmark_count", &NystromFeatureMap::landmark_count)
      .def_property_readonly("truncation", &NystromFeatureMap::truncation)
      .def("features", &NystromFeatureMap::features, py::arg("x"))
      .def("reconstruct", &NystromFeatureMap::reconstruct, py::arg("x"), py::arg("y"));

  py::class_<SymmetricBuild>(m, "SymmetricBuild")
      .def_readonly("map", &SymmetricBuild::map)
      .def_readonly("sup_error_heldout", &SymmetricBuild::sup_error_heldout)
      .def_readonly("l2_error_heldout", &SymmetricBuild::l2_error_heldout)
      .def_readonly("heldout", &SymmetricBuild::heldout);

  m.def(
      "build_symmetric_features",
      [](const Kernel& kernel, const BoxDomain& domain, double epsilon, int m_landmarks,
         std::uint64_t seed, int heldout_pairs, bool certify) {
        SymmetricBuildOptions o;
        o.seed = seed;
        o.heldout_pairs = heldout_pairs;
        o.certify = certify;
        return build_symmetric_features(kernel, domain, epsilon, m_landmarks, o);
      },
      py::arg("kernel"), py::arg("domain"), py::arg("epsilon"), py::arg("landmarks"),
      py::arg("seed") = std::uint64_t{0}, py::arg("heldout_pairs") = 1000,
      py::arg("certify") = true);

  m.def("landmark_residual", &landmark_residual, py::arg("map"), py::arg("d"));
  m.def("psd_check", &psd_check, py::arg("gram"), py::arg("tol"));
  m.def("default_landmarks", &default_landmarks, py::arg("domain"), py::arg("m"));
  m.def("estimate_eigenfunction_bound", &estimate_eigenfunction_bound, py::arg("map"),
        py::arg("eval_points"));

  py::class_<NeuronBudget>(m, "NeuronBudget")
      .def_readonly("value", &NeuronBudget::value)
      .def_readonly("log10_value", &NeuronBudget::log10_value)
      .def_readonly("overflow", &NeuronBudget::overflow);
  m.def("neuron_budget_relu", &neuron_budget_relu, py::arg("d_r"), py::arg("C"),
        py::arg("L"), py::arg("epsilon"), py::arg("dim"));
  m.def("neuron_budget_barron", &neuron_budget_barron, py::arg("d_r"), py::arg("C"),
        py::arg("radius"), py::arg("B"), py::arg("epsilon"));

  py::class_<TruncatedFeaturePair>(m, "TruncatedFeaturePair")
      .def_readonly("d", &TruncatedFeaturePair::d)
      .def("__call__",
           [](const TruncatedFeaturePair& t, const Point& x, const Point& y) {
             return t.evaluator(x, y);
           },
           py::arg("x"), py::arg("y"));
  m.def("truncate_feature_pair", &truncate_feature_pair, py::arg("pair"),
        py::arg("eval_pairs"), py::arg("epsilon"));
}

void register_attention(py::module_& m) {
  py::class_<ContextDraw>(m, "ContextDraw")
      .def(py::init([](Point q, std::vector<Point> context) {
             return ContextDraw{std::move(q), std::move(context)};
           }),
           py::arg("q"), py::arg("context"))
      .def_readonly("q", &ContextDraw::q)
      .def_readonly("context", &ContextDraw::context);

  py::class_<AttentionModule>(m, "AttentionModule")
      .def_readwrite("beta", &AttentionModule::beta)
      .def("score", &AttentionModule::score, py::arg("q"), py::arg("x"))
      .def_static("from_scores", &AttentionModule::from_scores, py::arg("scores"),
                  py::arg("beta"));

  py::class_<SelectResult>(m, "SelectResult")
      .def_readonly("index", &SelectResult::index)
      .def_readonly("element", &SelectResult::element);

  py::class_<RetrievalReport>(m, "RetrievalReport")
      .def_readonly("seed", &RetrievalReport::seed)
      .def_readonly("trials", &RetrievalReport::trials)
      .def_readonly("epsilon_prob", &RetrievalReport::epsilon_prob)
      .def_readonly("epsilon_out", &RetrievalReport::epsilon_out)
      .def_readonly("beta", &RetrievalReport::beta)
      .def_readonly("eta", &RetrievalReport::eta)
      .def_readonly("success_rate", &RetrievalReport::success_rate)
      .def_readonly("margin_hit_rate", &RetrievalReport::margin_hit_rate)
      .def_readonly("conditional_success_rate", &RetrievalReport::conditional_success_rate)
      .def_readonly("mean_error", &RetrievalReport::mean_error)
      .def_readonly("max_error", &RetrievalReport::max_error)
      .def_readonly("tie_draws", &RetrievalReport::tie_draws)
      .def("to_json", [](const RetrievalReport& r) { return report_to_json(r).dump(2); });

  py::class_<AttentionBuild>(m, "AttentionBuild")
      .def_readonly("module", &AttentionBuild::module)
      .def_readonly("approx", &AttentionBuild::approx);

  m.def("make_utility", &make_utility, py::arg("id"),
        py::arg("params") = std::vector<double>{});
  m.def("make_table_utility", &make_table_utility, py::arg("anchors"), py::arg("table"));
  m.def("select", &relkit::select, py::arg("u"), py::arg("q"), py::arg("context"),
        "argmax of u(q, .) over the context, ties to the lowest index");
  m.def("attention_weights", &attention_weights, py::arg("module"), py::arg("q"),
        py::arg("context"));
  m.def("attention", &attention, py::arg("module"), py::arg("q"), py::arg("context"));
  m.def("calibrate_beta", &calibrate_beta, py::arg("eta"), py::arg("n"),
        py::arg("max_norm"), py::arg("epsilon"));
  m.def("uniform_context_sampler", &uniform_context_sampler, py::arg("domain"),
        py::arg("context_size"), py::arg("seed_base"));
  m.def("estimate_margin", &estimate_margin, py::arg("u"), py::arg("sampler"),
        py::arg("epsilon"), py::arg("trials"));

  m.def(
      "build_attention_from_utility",
      [](const UtilityFn& u, const BoxDomain& domain, double eta,
         std::size_t landmark_cap, std::size_t matrix_cap, std::uint64_t seed,
         int heldout_pairs, int probe_pairs, bool certify) {
        return build_attention_from_utility(
            u, domain, eta,
            build_options(landmark_cap, matrix_cap, seed, heldout_pairs, probe_pairs,
                          certify));
      },
      py::arg("u"), py::arg("domain"), py::arg("eta"),
      py::arg("landmark_cap") = std::size_t{100000},
      py::arg("matrix_cap") = std::size_t{16384}, py::arg("seed") = std::uint64_t{0},
      py::arg("heldout_pairs") = 1000, py::arg("probe_pairs") = 48,
      py::arg("certify") = true);

  m.def(
      "verify_retrieval",
      [](const AttentionModule& module, const UtilityFn& u, const ContextSampler& sampler,
         double epsilon_prob, double epsilon_out, double eta, int trials,
         std::uint64_t seed) {
        VerifyOptions o;
        o.epsilon_prob = epsilon_prob;
        o.epsilon_out = epsilon_out;
        o.eta = eta;
        o.trials = trials;
        o.seed = seed;
        return verify_retrieval(module, u, sampler, o);
      },
      py::arg("module"), py::arg("u"), py::arg("sampler"), py::arg("epsilon_prob") = 0.1,
      py::arg("epsilon_out") = -1.0, py::arg("eta") = 0.0, py::arg("trials") = 1000,
      py::arg("seed") = std::uint64_t{0});
}

py::dict row_to_dict(const ReportRow& row) {
  py::dict d;
  for (const auto& [key, value] : row.fields) {
    py::str k(key);
    if (std::holds_alternative<std::uint64_t>(value))
      d[k] = std::get<std::uint64_t>(value);
    else if (std::holds_alternative<double>(value))
      d[k] = std::get<double>(value);
    else
      d[k] = std::get<std::string>(value);
  }
  return d;
}

void register_experiment(py::module_& m) {
  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("epsilon", &ExperimentConfig::epsilon)
      .def_readwrite("format", &ExperimentConfig::format)
      .def_readwrite("out_path", &ExperimentConfig::out_path);

  m.def("parse_config", &parse_config, py::arg("text"),
        "parse a sectioned key = value experiment config");
  m.def("load_config", &load_config, py::arg("path"));
  m.def("run_experiment", [](const ExperimentConfig& cfg) {
    return row_to_dict(run_experiment(cfg));
  });
  m.def(
      "sweep",
      [](const ExperimentConfig& base, const std::string& axis,
         const std::vector<double>& values) {
        py::list rows;
        for (const ReportRow& row : sweep(base, axis, values)) rows.append(row_to_dict(row));
        return rows;
      },
      py::arg("config"), py::arg("axis"), py::arg("values"));
  m.def(
      "run_config_text",
      [](const std::string& text) {
        const ExperimentConfig cfg = parse_config(text);
        std::vector<ReportRow> rows;
        if (!cfg.sweep_axis.empty())
          rows = sweep(cfg, cfg.sweep_axis, cfg.sweep_values);
        else
          rows.push_back(run_experiment(cfg));
        return render_report(rows, cfg.format);
      },
      py::arg("text"),
      "parse, run (or sweep), and render a config; returns the report text");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "inner-product approximation of relation functions: quantized "
            "factorizations, spectral features, and softmax retrieval checks";

  register_errors(m);
  register_domain(m);
  register_relations(m);
  register_quantizer(m);
  register_factored(m);
  register_spectral(m);
  register_attention(m);
  register_experiment(m);
}
