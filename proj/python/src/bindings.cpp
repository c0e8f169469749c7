#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rashomon/couple.hpp"
#include "rashomon/dataset.hpp"
#include "rashomon/error.hpp"
#include "rashomon/eval.hpp"
#include "rashomon/explain.hpp"
#include "rashomon/forge.hpp"
#include "rashomon/model.hpp"
#include "rashomon/model_io.hpp"
#include "rashomon/plot.hpp"
#include "rashomon/synth.hpp"

namespace py = pybind11;
using namespace rashomon;

namespace {

Dataset make_dataset(const std::vector<std::string>& columns, const std::string& target,
                     const Eigen::MatrixXd& values) {
  return Dataset(columns, target, values);
}

py::dict run_dict(const forge::QuartetRun& run) {
  return py::module_::import("json").attr("loads")(forge::run_to_json(run).dump());
}

}  // namespace

PYBIND11_MODULE(_rashomon, m) {
  m.doc() = "Rashomon quartet core";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
  py::register_exception<SingularError>(m, "SingularError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());

  py::class_<GenConfig>(m, "GenConfig")
      .def(py::init<>())
      .def_readwrite("theta1", &GenConfig::theta1)
      .def_readwrite("theta2", &GenConfig::theta2)
      .def_readwrite("rho", &GenConfig::rho)
      .def_readwrite("sigma_eps", &GenConfig::sigma_eps)
      .def_readwrite("n_features", &GenConfig::n_features)
      .def_readwrite("n_train", &GenConfig::n_train)
      .def_readwrite("n_test", &GenConfig::n_test)
      .def_readwrite("seed", &GenConfig::seed)
      .def("validate", &GenConfig::validate);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init(&make_dataset), py::arg("columns"), py::arg("target"), py::arg("values"))
      .def_property_readonly("column_names", &Dataset::column_names)
      .def_property_readonly("target_name", &Dataset::target_name)
      .def_property_readonly("feature_names", &Dataset::feature_names)
      .def_property_readonly("values", &Dataset::values)
      .def_property_readonly("features", &Dataset::features)
      .def_property_readonly("target", &Dataset::target)
      .def("__len__", [](const Dataset& d) { return d.rows(); })
      .def("__eq__", [](const Dataset& a, const Dataset& b) { return a == b; })
      .def("to_csv", [](const Dataset& d) { return to_csv(d); });

  m.def("from_csv", &from_csv, py::arg("text"), py::arg("target") = "");
  m.def("read_csv", &read_csv, py::arg("path"), py::arg("target") = "");
  m.def("write_csv", &write_csv, py::arg("data"), py::arg("path"));
  m.def("generate", &generate, py::arg("config") = GenConfig{},
        "Returns (train, test) datasets.");
  m.def("analytic_target_variance", &analytic_target_variance, py::arg("config"));

  py::class_<Model>(m, "Model")
      .def_property_readonly("family", [](const Model& mod) { return to_string(mod.family); })
      .def_readwrite("label", &Model::label)
      .def_readonly("feature_names", &Model::feature_names)
      .def_readonly("target_name", &Model::target_name)
      .def_readonly("seed", &Model::seed)
      .def("predict",
           [](const Model& mod, const Eigen::MatrixXd& x) { return predict(mod, x); },
           py::arg("x"))
      .def("predict_dataset",
           [](const Model& mod, const Dataset& d) { return predict(mod, d); }, py::arg("data"))
      .def("to_json", [](const Model& mod) { return model_to_json(mod).dump(); })
      .def_property_readonly("coefficients",
                             [](const Model& mod) -> py::object {
                               if (mod.family != Family::linear) return py::none();
                               return py::cast(mod.as<LinearFit>().coefficients);
                             })
      .def_property_readonly("split_features", [](const Model& mod) -> py::object {
        if (mod.family != Family::tree) return py::none();
        return py::cast(mod.as<TreeFit>().split_features());
      });

  m.def("fit_linear", &fit_linear, py::arg("train"));
  m.def(
      "fit_tree",
      [](const Dataset& train, int max_depth, int min_split) {
        return fit_tree(train, TreeParams{max_depth, min_split});
      },
      py::arg("train"), py::arg("max_depth") = 3, py::arg("min_split") = 250);
  m.def(
      "fit_forest",
      [](const Dataset& train, int n_trees, int mtry, int min_node, std::uint64_t seed,
         std::size_t threads) {
        ForestParams p;
        p.n_trees = n_trees;
        p.mtry = mtry;
        p.min_node = min_node;
        p.seed = seed;
        p.threads = threads;
        py::gil_scoped_release release;
        return fit_forest(train, p);
      },
      py::arg("train"), py::arg("n_trees") = 100, py::arg("mtry") = 0,
      py::arg("min_node") = 5, py::arg("seed") = 1568, py::arg("threads") = 0);
  m.def(
      "fit_network",
      [](const Dataset& train, std::vector<int> hidden, double grad_threshold,
         long max_epochs, std::uint64_t seed) {
        NetworkParams p;
        p.hidden = std::move(hidden);
        p.grad_threshold = grad_threshold;
        p.max_epochs = max_epochs;
        p.seed = seed;
        py::gil_scoped_release release;
        return fit_network(train, p);
      },
      py::arg("train"), py::arg("hidden") = std::vector<int>{8, 4},
      py::arg("grad_threshold") = 0.05, py::arg("max_epochs") = 100000,
      py::arg("seed") = 1568);
  m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
  m.def("load_model", &load_model, py::arg("path"));

  py::class_<Metrics>(m, "Metrics")
      .def_readonly("label", &Metrics::label)
      .def_readonly("r2", &Metrics::r2)
      .def_readonly("rmse", &Metrics::rmse)
      .def_readonly("mse", &Metrics::mse);
  py::class_<PerfReport>(m, "PerfReport")
      .def_readonly("models", &PerfReport::models)
      .def_readonly("n_test", &PerfReport::n_test)
      .def("at", &PerfReport::at, py::return_value_policy::copy)
      .def("r2_spread", &PerfReport::r2_spread)
      .def("to_json", [](const PerfReport& r) { return perf_report_json(r); });
  m.def("score", &score, py::arg("predictions"), py::arg("y"), py::arg("label") = "");
  m.def(
      "evaluate",
      [](const std::vector<Model>& models, const Dataset& test) {
        return evaluate(models, test);
      },
      py::arg("models"), py::arg("test"));

  py::class_<PDProfile>(m, "PDProfile")
      .def_readonly("model_label", &PDProfile::model_label)
      .def_readonly("feature", &PDProfile::feature)
      .def_readonly("grid", &PDProfile::grid)
      .def_readonly("pd", &PDProfile::pd)
      .def_readonly("ci_lo", &PDProfile::ci_lo)
      .def_readonly("ci_hi", &PDProfile::ci_hi);
  m.def("pdp", &pdp, py::arg("model"), py::arg("data"), py::arg("feature"),
        py::arg("grid_size") = 101);
  m.def(
      "pdp_ci",
      [](const Model& model, const Dataset& data, const std::string& feature, int grid_size,
         int n_boot, double ci_level, std::uint64_t seed, std::size_t threads) {
        PdpCiOptions o;
        o.grid_size = grid_size;
        o.n_boot = n_boot;
        o.ci_level = ci_level;
        o.seed = seed;
        o.threads = threads;
        py::gil_scoped_release release;
        return pdp_ci(model, data, feature, o);
      },
      py::arg("model"), py::arg("data"), py::arg("feature"), py::arg("grid_size") = 101,
      py::arg("n_boot") = 100, py::arg("ci_level") = 0.95, py::arg("seed") = 1568,
      py::arg("threads") = 0);
  m.def(
      "permutation_importance",
      [](const Model& model, const Dataset& test, int n_permutations, std::uint64_t seed) {
        ImportanceOptions o;
        o.n_permutations = n_permutations;
        o.seed = seed;
        const ImportanceReport r = permutation_importance(model, test, o);
        py::dict out;
        for (const auto& f : r.features) out[py::str(f.feature)] = f.importance;
        return out;
      },
      py::arg("model"), py::arg("test"), py::arg("n_permutations") = 1,
      py::arg("seed") = 1568);
  m.def(
      "residual_correlation",
      [](const std::vector<Model>& models, const Dataset& test) {
        return residual_correlation(residual_table(models, test)).values;
      },
      py::arg("models"), py::arg("test"));
  m.def(
      "is_non_monotonic",
      [](const std::vector<double>& v, double tol) { return is_non_monotonic(v, tol); },
      py::arg("values"), py::arg("tol") = 1e-6);

  auto c = m.def_submodule("couple", "Linear fit versus sign stump on x^alpha");
  c.def("best_linear", [](double a) {
    const auto f = couple::best_linear(couple::CoupleSpec{a});
    return py::make_tuple(f.coefficient, f.mse);
  });
  c.def("best_stump", [](double a) {
    const auto f = couple::best_stump(couple::CoupleSpec{a});
    return py::make_tuple(f.coefficient, f.mse);
  });
  c.def("best_linear_quadrature", [](double a) {
    const auto f = couple::best_linear_quadrature(couple::CoupleSpec{a});
    return py::make_tuple(f.coefficient, f.mse);
  });
  c.def("best_stump_quadrature", [](double a) {
    const auto f = couple::best_stump_quadrature(couple::CoupleSpec{a});
    return py::make_tuple(f.coefficient, f.mse);
  });
  c.def("mse_gap", &couple::mse_gap, py::arg("alpha"));
  c.def("find_couple_exponent", &couple::find_couple_exponent, py::arg("tol") = 1e-12);

  auto f = m.def_submodule("forge", "Quartet search");
  f.def(
      "evaluate_candidate",
      [](const GenConfig& config, std::uint64_t seed, int network_inits, long max_epochs,
         double prune_spread, bool require_stories) {
        forge::CandidateOptions o;
        o.network_inits = network_inits;
        o.network.max_epochs = max_epochs;
        o.prune_spread = prune_spread;
        o.require_stories = require_stories;
        forge::QuartetRun run;
        {
          py::gil_scoped_release release;
          run = forge::evaluate_candidate(config, seed, o);
        }
        return run_dict(run);
      },
      py::arg("config"), py::arg("seed"), py::arg("network_inits") = 5,
      py::arg("max_epochs") = 100000,
      py::arg("prune_spread") = std::numeric_limits<double>::infinity(),
      py::arg("require_stories") = false);

  auto p = m.def_submodule("plot", "SVG charts");
  p.def("pdp_grid",
        [](const std::vector<PDProfile>& profiles) { return plot::pdp_grid(profiles); });
  p.def(
      "residual_parcoord",
      [](const std::vector<Model>& models, const Dataset& test, int max_lines) {
        return plot::residual_parcoord(residual_table(models, test), max_lines);
      },
      py::arg("models"), py::arg("test"), py::arg("max_lines") = 1000);
  p.def("pairs_matrix", &plot::pairs_matrix, py::arg("train"), py::arg("test"),
        py::arg("max_points") = 1000);
  p.def("couple_curves", &plot::couple_curves, py::arg("alpha"));
}
