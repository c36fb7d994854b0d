#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "staticdeps/analysis.hpp"
#include "staticdeps/kernel.hpp"
#include "staticdeps/liftstats.hpp"
#include "staticdeps/oracle.hpp"

namespace py = pybind11;
using namespace staticdeps;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Memory-carried dependency analysis for assembly basic blocks";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<EmptyKernelError>(m, "EmptyKernelError", PyExc_ValueError);
    py::register_exception<UndefinedCoverageError>(m, "UndefinedCoverageError", PyExc_ValueError);
    py::register_exception<UndefinedStatisticError>(m, "UndefinedStatisticError", PyExc_ValueError);

    py::class_<Instruction>(m, "Instruction")
        .def_readonly("index", &Instruction::index)
        .def_readonly("mnemonic", &Instruction::mnemonic)
        .def_property_readonly("opaque",
                               [](const Instruction& i) { return i.sem_class == SemClass::Opaque; })
        .def_property_readonly("has_memory_read", &Instruction::has_memory_read)
        .def_property_readonly("has_memory_write", &Instruction::has_memory_write)
        .def("__repr__", [](const Instruction& i) {
            return "<Instruction " + std::to_string(i.index) + ": " + to_string(i) + ">";
        });

    py::class_<Kernel>(m, "Kernel")
        .def_readonly("instructions", &Kernel::instructions)
        .def_readonly("synthetic_base_address", &Kernel::synthetic_base_address)
        .def("__len__", &Kernel::size)
        .def("to_text", [](const Kernel& k) { return to_string(k); })
        .def("__repr__", [](const Kernel& k) {
            return "<Kernel of " + std::to_string(k.size()) + " instructions>";
        });

    m.def("parse_kernel", &parse_kernel, py::arg("text"),
          py::arg("base_address") = kDefaultBaseAddress);
    m.def("unroll_count", &unroll_count, py::arg("kernel_len"), py::arg("rob_size"));
    m.def("kernel_sha256", &kernel_sha256);

    py::class_<DepConfig>(m, "DepConfig")
        .def(py::init([](uint32_t rob_size, double spurious_threshold,
                         std::vector<uint64_t> seeds, uint64_t base) {
                 return DepConfig{rob_size, spurious_threshold, std::move(seeds), base};
             }),
             py::arg("rob_size") = 224, py::arg("spurious_threshold") = 0.80,
             py::arg("seeds") = std::vector<uint64_t>{1, 2, 3},
             py::arg("synthetic_base_address") = kDefaultBaseAddress)
        .def_readwrite("rob_size", &DepConfig::rob_size)
        .def_readwrite("spurious_threshold", &DepConfig::spurious_threshold)
        .def_readwrite("seeds", &DepConfig::seeds)
        .def_readwrite("synthetic_base_address", &DepConfig::synthetic_base_address);

    py::class_<Dependency>(m, "Dependency")
        .def(py::init([](uint32_t src, uint32_t dst, uint32_t delta_k, uint64_t hits,
                         uint64_t eligible) {
                 return Dependency{src, dst, delta_k, hits, eligible};
             }),
             py::arg("src"), py::arg("dst"), py::arg("delta_k"), py::arg("hits") = 0,
             py::arg("eligible") = 0)
        .def_readonly("src", &Dependency::src)
        .def_readonly("dst", &Dependency::dst)
        .def_readonly("delta_k", &Dependency::delta_k)
        .def_readonly("hits", &Dependency::hits)
        .def_readonly("eligible", &Dependency::eligible)
        .def("__repr__", [](const Dependency& d) {
            return "<Dependency " + std::to_string(d.src) + "->" + std::to_string(d.dst) +
                   " dk=" + std::to_string(d.delta_k) + ">";
        });

    py::class_<DepReport>(m, "DepReport")
        .def_readonly("kernel_sha256", &DepReport::kernel_sha256)
        .def_readonly("rob_size", &DepReport::rob_size)
        .def_readonly("seeds", &DepReport::seeds)
        .def_readonly("copies", &DepReport::copies)
        .def_readonly("deps", &DepReport::deps)
        .def_readonly("dropped_bottom_stores", &DepReport::dropped_bottom_stores)
        .def("to_json", [](const DepReport& r) { return to_json(r); });

    m.def("analyze", &analyze, py::arg("kernel"), py::arg("config"), py::arg("seed"));
    m.def("analyze_amplified", &analyze_amplified, py::arg("kernel"), py::arg("config"));
    m.def(
        "filter_spurious",
        [](std::vector<Dependency> deps, double threshold) {
            filter_spurious(deps, threshold);
            return deps;
        },
        py::arg("deps"), py::arg("threshold"));

    py::class_<RegInit>(m, "RegInit")
        .def_static("uniform", &RegInit::uniform, py::arg("constant") = kDefaultUniformConstant)
        .def_static("distinct", &RegInit::distinct, py::arg("seed") = 42)
        .def("__repr__", [](const RegInit& r) { return "<RegInit " + to_string(r) + ">"; });

    py::class_<OracleConfig>(m, "OracleConfig")
        .def(py::init([](uint64_t iterations, RegInit reg_init, uint8_t mem_fill,
                         std::optional<uint64_t> lifetime) {
                 return OracleConfig{iterations, reg_init, mem_fill, lifetime};
             }),
             py::arg("iterations") = 64, py::arg("reg_init") = RegInit::distinct(42),
             py::arg("mem_fill") = 0, py::arg("lifetime") = std::nullopt)
        .def_readwrite("iterations", &OracleConfig::iterations)
        .def_readwrite("reg_init", &OracleConfig::reg_init)
        .def_readwrite("mem_fill", &OracleConfig::mem_fill)
        .def_readwrite("lifetime", &OracleConfig::lifetime);

    py::class_<DynDependency>(m, "DynDependency")
        .def_readonly("src", &DynDependency::src)
        .def_readonly("dst", &DynDependency::dst)
        .def_readonly("occurrences", &DynDependency::occurrences)
        .def_readonly("example_write_ts", &DynDependency::example_write_ts)
        .def_readonly("example_read_ts", &DynDependency::example_read_ts)
        .def("__repr__", [](const DynDependency& d) {
            return "<DynDependency " + std::to_string(d.src) + "->" + std::to_string(d.dst) +
                   " rho=" + std::to_string(d.occurrences) + ">";
        });

    py::class_<OracleTrace>(m, "OracleTrace")
        .def_readonly("iterations", &OracleTrace::iterations)
        .def_readonly("deps", &OracleTrace::deps)
        .def_readonly("suspicious_addresses", &OracleTrace::suspicious_addresses)
        .def("to_json", [](const OracleTrace& t) { return to_json(t); });

    m.def("run_concrete", &run_concrete, py::arg("kernel"), py::arg("config"));

    py::class_<CoverageReport>(m, "CoverageReport")
        .def_readonly("found", &CoverageReport::found)
        .def_readonly("missed", &CoverageReport::missed)
        .def_readonly("cov_u", &CoverageReport::cov_u)
        .def_readonly("cov_w", &CoverageReport::cov_w);

    m.def(
        "coverage",
        [](const DepReport& statics, const OracleTrace& trace) {
            return coverage(statics, trace.deps);
        },
        py::arg("static_report"), py::arg("trace"));

    py::class_<BlockPrediction>(m, "BlockPrediction")
        .def(py::init([](std::string block, uint64_t occurrences, std::optional<double> pred) {
                 return BlockPrediction{std::move(block), occurrences, pred};
             }),
             py::arg("block"), py::arg("occurrences"), py::arg("predicted_cycles") = std::nullopt)
        .def_readonly("block", &BlockPrediction::block)
        .def_readonly("occurrences", &BlockPrediction::occurrences)
        .def_readonly("predicted_cycles", &BlockPrediction::predicted_cycles);

    py::class_<BenchmarkRecord>(m, "BenchmarkRecord")
        .def(py::init([](std::string benchmark, double baseline,
                         std::map<std::string, std::vector<BlockPrediction>> per_tool) {
                 return BenchmarkRecord{std::move(benchmark), baseline, std::move(per_tool)};
             }),
             py::arg("benchmark"), py::arg("baseline_cycles") = 0.0,
             py::arg("per_tool") = std::map<std::string, std::vector<BlockPrediction>>{})
        .def_readonly("benchmark", &BenchmarkRecord::benchmark)
        .def_readonly("baseline_cycles", &BenchmarkRecord::baseline_cycles);

    m.def("lift", &lift, py::arg("record"), py::arg("tool"));
    m.def("relative_error", &relative_error, py::arg("pred"), py::arg("baseline"));

    py::class_<ErrorStats>(m, "ErrorStats")
        .def_readonly("datapoints", &ErrorStats::datapoints)
        .def_readonly("failures", &ErrorStats::failures)
        .def_readonly("failure_pct", &ErrorStats::failure_pct)
        .def_readonly("mape", &ErrorStats::mape)
        .def_readonly("median", &ErrorStats::median)
        .def_readonly("q1", &ErrorStats::q1)
        .def_readonly("q3", &ErrorStats::q3)
        .def_readonly("kendall_tau", &ErrorStats::kendall_tau);

    m.def(
        "summarize",
        [](const std::vector<double>& errors, uint64_t failures) {
            return summarize(errors, failures);
        },
        py::arg("errors"), py::arg("failures") = 0);
    m.def(
        "kendall_tau",
        [](const std::vector<double>& xs, const std::vector<double>& ys) {
            return kendall_tau(xs, ys);
        },
        py::arg("xs"), py::arg("ys"));
    m.def("relevance_filter", &relevance_filter, py::arg("blocks"));
}
