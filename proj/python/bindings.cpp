#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "mcprioq/bench.hpp"
#include "mcprioq/errors.hpp"
#include "mcprioq/graph.hpp"
#include "mcprioq/io.hpp"

namespace py = pybind11;
using namespace mcprioq;

namespace {

Rational factor_from(const py::object& value) {
  if (py::isinstance<py::str>(value)) return Rational::parse(value.cast<std::string>());
  if (py::isinstance<py::int_>(value)) return Rational(value.cast<std::uint64_t>(), 1);
  if (py::hasattr(value, "numerator") && py::hasattr(value, "denominator")) {
    return Rational(value.attr("numerator").cast<std::uint64_t>(),
                    value.attr("denominator").cast<std::uint64_t>());
  }
  throw InputError("decay factor must be a string like '1/2', an int, or a Fraction");
}

std::unique_ptr<Graph> make_graph(const py::object& factor) {
  DecayConfig config;
  if (!factor.is_none()) config.factor = factor_from(factor);
  config.validate();
  return std::make_unique<Graph>(config);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Concurrent sparse Markov chain with count-sorted edge queues";

  auto input_error = py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", input_error.ptr());
  py::register_exception<InvariantError>(m, "InvariantError", PyExc_RuntimeError);

  py::class_<GraphStats>(m, "GraphStats")
      .def_readonly("sources", &GraphStats::sources)
      .def_readonly("edges", &GraphStats::edges)
      .def_readonly("transitions", &GraphStats::transitions)
      .def("__repr__", [](const GraphStats& s) {
        std::ostringstream o;
        o << "GraphStats(sources=" << s.sources << ", edges=" << s.edges
          << ", transitions=" << s.transitions << ")";
        return o.str();
      });

  py::class_<Recommendation>(m, "Recommendation")
      .def_readonly("found", &Recommendation::found)
      .def_readonly("cumulative", &Recommendation::cumulative)
      .def_property_readonly("items", [](const Recommendation& r) {
        py::list items;
        for (const auto& i : r.items) items.append(py::make_tuple(i.dst, i.probability));
        return items;
      });

  py::class_<Graph>(m, "Graph")
      .def(py::init(&make_graph), py::arg("decay_factor") = py::none())
      .def(
          "record",
          [](Graph& g, std::string_view src, std::string_view dst) {
            return g.record_transition(src, dst).created;
          },
          py::arg("src"), py::arg("dst"), py::call_guard<py::gil_scoped_release>())
      .def(
          "top_n",
          [](const Graph& g, const std::string& src, std::size_t n) {
            return g.recommend_top_n(NodeId(src), n);
          },
          py::arg("src"), py::arg("n"), py::call_guard<py::gil_scoped_release>())
      .def(
          "cumulative",
          [](const Graph& g, const std::string& src, double threshold) {
            return g.recommend_cumulative(NodeId(src), threshold);
          },
          py::arg("src"), py::arg("threshold"), py::call_guard<py::gil_scoped_release>())
      .def(
          "decay",
          [](Graph& g, const py::object& factor) {
            const DecayResult r =
                factor.is_none() ? g.decay() : g.decay(factor_from(factor));
            return py::make_tuple(r.edges_removed, r.sources_emptied);
          },
          py::arg("factor") = py::none())
      .def("stabilize", [](Graph& g) { return g.stabilize_all().swaps; })
      .def("stats", &Graph::stats)
      .def("check_invariants", &Graph::check_invariants)
      .def("image",
           [](const Graph& g) {
             py::dict out;
             for (const SourceImage& s : g.image()) {
               out[py::str(s.src)] = py::make_tuple(s.total, s.edges);
             }
             return out;
           })
      .def("snapshot", [](const Graph& g) { return snapshot_string(g); })
      .def_static(
          "from_snapshot",
          [](const std::string& text) { return snapshot_from_string(text); },
          py::arg("text"));

  m.def(
      "parse_transitions",
      [](const std::string& text, bool lenient) {
        std::istringstream in(text);
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& r : parse_stream(in, ParseOptions{lenient})) {
          out.emplace_back(r.src.str(), r.dst.str());
        }
        return out;
      },
      py::arg("text"), py::arg("lenient") = false);

  py::class_<WorkloadConfig>(m, "WorkloadConfig")
      .def(py::init<>())
      .def_readwrite("nodes", &WorkloadConfig::nodes)
      .def_readwrite("zipf_s", &WorkloadConfig::zipf_s)
      .def_readwrite("writers", &WorkloadConfig::writers)
      .def_readwrite("readers", &WorkloadConfig::readers)
      .def_readwrite("duration_secs", &WorkloadConfig::duration_secs)
      .def_readwrite("seed", &WorkloadConfig::seed)
      .def_readwrite("sources", &WorkloadConfig::sources)
      .def_readwrite("ops_per_writer", &WorkloadConfig::ops_per_writer)
      .def_readwrite("top_n", &WorkloadConfig::top_n)
      .def_readwrite("thresholds", &WorkloadConfig::thresholds);

  py::class_<BenchReport>(m, "BenchReport")
      .def_readonly("update_ops", &BenchReport::update_ops)
      .def_readonly("update_throughput", &BenchReport::update_throughput)
      .def_readonly("update_latency_p50", &BenchReport::update_latency_p50)
      .def_readonly("update_latency_p99", &BenchReport::update_latency_p99)
      .def_readonly("inference_ops", &BenchReport::inference_ops)
      .def_readonly("inference_latency_p50", &BenchReport::inference_latency_p50)
      .def_readonly("inference_latency_p99", &BenchReport::inference_latency_p99)
      .def_readonly("items_for_threshold", &BenchReport::items_for_threshold)
      .def_readonly("anomalies_detected", &BenchReport::anomalies_detected)
      .def_readonly("edge_count_sum", &BenchReport::edge_count_sum)
      .def_readonly("conservation_ok", &BenchReport::conservation_ok)
      .def_readonly("violations", &BenchReport::violations)
      .def_property_readonly("passed", &BenchReport::passed)
      .def("to_json", &BenchReport::to_json);

  m.def(
      "run_bench",
      [](const WorkloadConfig& config) { return run_bench(config); },
      py::arg("config"), py::call_guard<py::gil_scoped_release>());
}
