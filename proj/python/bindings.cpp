#include <adaptmg/benchmark.h>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace adaptmg;

PYBIND11_MODULE(_core, m)
{
  m.doc() = "Adaptive geometric multigrid benchmarks";

  py::enum_<Variant>(m, "Variant")
    .value("LS", Variant::local_smoothing)
    .value("GC", Variant::global_coarsening)
    .value("PC", Variant::polynomial);
  py::enum_<PartitionPolicy>(m, "PartitionPolicy")
    .value("first_child", PartitionPolicy::first_child)
    .value("sfc", PartitionPolicy::sfc_per_level);
  py::enum_<Precision>(m, "Precision")
    .value("double", Precision::double_precision)
    .value("single", Precision::single_precision);

  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);

  py::class_<BenchmarkConfig>(m, "BenchmarkConfig")
    .def(py::init<>())
    .def_readwrite("case", &BenchmarkConfig::case_name)
    .def_readwrite("L", &BenchmarkConfig::L)
    .def_readwrite("p", &BenchmarkConfig::p)
    .def_readwrite("variant", &BenchmarkConfig::variant)
    .def_readwrite("pc_continuation", &BenchmarkConfig::pc_continuation)
    .def_readwrite("ranks", &BenchmarkConfig::ranks)
    .def_readwrite("policy", &BenchmarkConfig::policy)
    .def_readwrite("smoother_degree", &BenchmarkConfig::smoother_degree)
    .def_readwrite("rtol", &BenchmarkConfig::rtol)
    .def_readwrite("max_iterations", &BenchmarkConfig::max_iterations)
    .def_readwrite("precision", &BenchmarkConfig::precision)
    .def_readwrite("hanging_weight", &BenchmarkConfig::hanging_weight)
    .def("validate", &BenchmarkConfig::validate);

  py::class_<ResultRow>(m, "ResultRow")
    .def_readonly("config", &ResultRow::config)
    .def_readonly("diverged", &ResultRow::diverged)
    .def_readonly("iterations", &ResultRow::iterations)
    .def_readonly("n_dofs", &ResultRow::n_dofs)
    .def_readonly("level_cells", &ResultRow::level_cells)
    .def_readonly("l2_error", &ResultRow::l2_error)
    .def_readonly("linf_error", &ResultRow::linf_error)
    .def_property_readonly("workload_efficiency",
                           [](const ResultRow &r) { return r.metrics.workload_efficiency; })
    .def_property_readonly("vertical_efficiency",
                           [](const ResultRow &r) { return r.metrics.vertical_efficiency; })
    .def_property_readonly("horizontal_efficiency",
                           [](const ResultRow &r) { return r.metrics.horizontal_efficiency; })
    .def_static("csv_header", &ResultRow::csv_header)
    .def("to_csv_row", &ResultRow::to_csv_row)
    .def("to_json", &ResultRow::to_json);

  py::class_<ConvergenceRow>(m, "ConvergenceRow")
    .def_readonly("L", &ConvergenceRow::L)
    .def_readonly("n_dofs", &ConvergenceRow::n_dofs)
    .def_readonly("iterations", &ConvergenceRow::iterations)
    .def_readonly("l2_error", &ConvergenceRow::l2_error)
    .def_readonly("order", &ConvergenceRow::order);

  m.def("run_benchmark", &run_benchmark, py::arg("config"), py::call_guard<py::gil_scoped_release>());
  m.def("run_convergence_study", &run_convergence_study, py::arg("p"), py::arg("L_min"), py::arg("L_max"),
        py::arg("variant") = Variant::global_coarsening, py::call_guard<py::gil_scoped_release>());
  m.def(
    "metrics_sweep_json",
    [](const std::string &case_name, int L, const std::vector<int> &ranks,
       const std::vector<PartitionPolicy> &policies, const std::vector<Variant> &variants, double hw) {
      return metrics_json(run_metrics_sweep(case_name, L, ranks, policies, variants, hw));
    },
    py::arg("case"), py::arg("L"), py::arg("ranks"),
    py::arg("policies") = std::vector<PartitionPolicy>{PartitionPolicy::first_child, PartitionPolicy::sfc_per_level},
    py::arg("variants") = std::vector<Variant>{Variant::local_smoothing, Variant::global_coarsening},
    py::arg("hanging_weight") = 2.0);
  m.def("mesh_statistics_json", &mesh_statistics_json, py::arg("case"), py::arg("L"),
        py::arg("degrees") = std::vector<int>{1, 4});
  m.def("preset_names", &preset_names);
  m.def("preset", &preset, py::arg("name"));
  m.attr("result_schema_version") = result_schema_version;
}
