#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "fascai/config.hpp"
#include "fascai/errors.hpp"
#include "fascai/event_log.hpp"
#include "fascai/harness.hpp"
#include "fascai/service.hpp"

namespace py = pybind11;
using namespace fascai;

namespace {

// Dicts cross the boundary as JSON text.
Json from_py(const py::object& o)
{
    const auto text = py::module_::import("json").attr("dumps")(o).cast<std::string>();
    return Json::parse(text);
}

py::object to_py(const Json& j)
{
    return py::module_::import("json").attr("loads")(j.dump());
}

py::dict simulate(const py::dict& config, std::optional<std::uint64_t> seed)
{
    AppConfig cfg = parse_config(from_py(config));
    if (seed)
        cfg.experiment.seed = *seed;
    ExperimentResult result;
    {
        py::gil_scoped_release release;
        result = run_experiment(cfg.experiment);
    }
    std::string log;
    for (const auto& arm : result.arms)
        for (const auto& t : arm.transcripts)
            for (const auto& r : records_of(simulation_session_id(arm.arm), t))
                log += to_line(r);
    py::dict out;
    out["metrics"] = to_py(metrics_json(result.report));
    out["metrics_csv"] = metrics_csv(result.report);
    out["summary"] = metrics_summary(result.report);
    out["events"] = log;
    return out;
}

std::string report(const std::string& events_path, const py::object& config)
{
    MetricsParams params;
    if (!config.is_none())
        params = parse_config(from_py(config)).experiment.metrics_params();
    const LogReplay replay = replay_log(events_path);
    if (!replay.errors.empty())
        throw ValidationError(replay.errors.front());
    return metrics_csv(compute_metrics(replay.complete, params));
}

py::dict validate(const std::string& events_path)
{
    const LogReplay replay = replay_log(events_path);
    py::dict out;
    out["complete"] = replay.complete.size();
    out["incomplete"] = replay.incomplete;
    out["errors"] = replay.errors;
    out["torn_lines"] = replay.torn_lines;
    return out;
}

std::string allocate(const std::string& comparison, const std::string& bin, const std::string& preset)
{
    const AllocationTable table = AllocationTable::preset(preset);
    return std::string(to_string(table.at({parse_comparison(comparison), parse_confidence_bin(bin)})));
}

py::dict compare_props(std::size_t a_successes, std::size_t a_trials, std::size_t b_successes,
                       std::size_t b_trials, double alpha)
{
    const DifferenceTest d =
        compare_proportions({a_successes, a_trials}, {b_successes, b_trials}, alpha);
    py::dict out;
    out["difference"] = d.difference;
    out["ci"] = py::make_tuple(d.ci.low, d.ci.high);
    out["z"] = d.z;
    out["p_value"] = d.p_value;
    out["significant"] = d.significant;
    return out;
}

class PyService {
public:
    PyService(const py::dict& config, const std::string& events_path)
    {
        const AppConfig cfg = parse_config(from_py(config));
        auto log = std::make_shared<EventLog>(events_path, false);
        service_ = std::make_unique<Service>(cfg.experiment, cfg.service, log);
    }

    py::tuple request(const std::string& method, const std::string& path, const py::object& body)
    {
        const std::string raw = body.is_none() ? std::string() : from_py(body).dump();
        const ApiResponse r = service_->dispatch(method, path, raw);
        return py::make_tuple(r.status, to_py(r.body));
    }

private:
    std::unique_ptr<Service> service_;
};

} // namespace

PYBIND11_MODULE(_fascai, m)
{
    m.doc() = "FASCAI nudging controller, protocol and experiment harness";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<ProtocolError>(m, "ProtocolError", PyExc_RuntimeError);
    py::register_exception<StorageError>(m, "StorageError", PyExc_OSError);

    m.def("simulate", &simulate, py::arg("config"), py::arg("seed") = py::none(),
          "Run the experiment harness; returns metrics, CSV, summary and the event log text.");
    m.def("report", &report, py::arg("events_path"), py::arg("config") = py::none(),
          "Recompute the metrics CSV from an event log.");
    m.def("validate", &validate, py::arg("events_path"),
          "Replay an event log through the protocol validator.");
    m.def("allocate", &allocate, py::arg("comparison"), py::arg("confidence_bin"),
          py::arg("preset") = "standard", "Modality the preset table assigns to a cell.");
    m.def("bin_confidence",
          [](double c, double lo, double hi) { return std::string(to_string(bin_confidence(c, lo, hi))); },
          py::arg("confidence"), py::arg("t_low") = 1.0 / 3.0, py::arg("t_high") = 2.0 / 3.0);
    m.def("two_proportion_z", &two_proportion_z, py::arg("human_correct"), py::arg("human_n"),
          py::arg("machine_correct"), py::arg("machine_n"));
    m.def("compare_proportions", &compare_props, py::arg("a_successes"), py::arg("a_trials"),
          py::arg("b_successes"), py::arg("b_trials"), py::arg("alpha") = 0.05);
    m.def("generate_instance",
          [](std::uint64_t seed, std::size_t k, std::size_t d, double gap) {
              return to_py(Json(generate_instance(seed, k, d, gap)));
          },
          py::arg("seed"), py::arg("k") = 2, py::arg("d") = 3, py::arg("gap") = 0.0);

    py::class_<PyService>(m, "Service")
        .def(py::init<const py::dict&, const std::string&>(), py::arg("config"),
             py::arg("events_path"))
        .def("request", &PyService::request, py::arg("method"), py::arg("path"),
             py::arg("body") = py::none(), "Send one API request; returns (status, body).");

#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "dev";
#endif
}
