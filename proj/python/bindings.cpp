/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <filesystem>
#include <optional>
#include <string>
#include <variant>

#include "cwlmpi/cmdline.hpp"
#include "cwlmpi/cwl_model.hpp"
#include "cwlmpi/mpi_config.hpp"
#include "cwlmpi/perfstats.hpp"
#include "cwlmpi/software_resolver.hpp"
#include "cwlmpi/version.hpp"
#include "cwlmpi/workflow_engine.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace cwlmpi;

namespace {

nlohmann::json to_json_value(const py::handle& obj) {
  // bool is a subclass of int in Python.
  if (obj.is_none()) return nullptr;
  if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
  if (py::isinstance<py::int_>(obj)) return obj.cast<std::int64_t>();
  if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
  if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
  if (py::isinstance<py::dict>(obj)) {
    nlohmann::json j = nlohmann::json::object();
    for (auto kv : obj.cast<py::dict>())
      j[py::str(kv.first).cast<std::string>()] = to_json_value(kv.second);
    return j;
  }
  if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj)) {
    nlohmann::json j = nlohmann::json::array();
    for (auto item : obj) j.push_back(to_json_value(item));
    return j;
  }
  if (py::isinstance(obj, py::module_::import("os").attr("PathLike")))
    return py::str(obj).cast<std::string>();
  throw py::type_error("unsupported value of type " +
                       py::str(py::type::of(obj)).cast<std::string>());
}

py::object from_json_value(const nlohmann::json& j) {
  if (j.is_null()) return py::none();
  if (j.is_boolean()) return py::bool_(j.get<bool>());
  if (j.is_number_integer()) return py::int_(j.get<std::int64_t>());
  if (j.is_number()) return py::float_(j.get<double>());
  if (j.is_string()) return py::str(j.get<std::string>());
  if (j.is_array()) {
    py::list out;
    for (const auto& e : j) out.append(from_json_value(e));
    return std::move(out);
  }
  py::dict out;
  for (const auto& [k, v] : j.items()) out[py::str(k)] = from_json_value(v);
  return std::move(out);
}

JobOrder job_for(const std::vector<InputParameter>& inputs, const py::object& job) {
  py::object j = job.is_none() ? py::dict() : job;
  return parse_job_order(to_json_value(j).dump(), inputs, fs::current_path(),
                         "<python>");
}

py::dict plan_dict(const CommandPlan& plan) {
  py::dict d;
  d["argv"] = plan.argv;
  d["env"] = plan.env;
  d["workdir"] = plan.workdir.string();
  d["stdout_capture"] = plan.stdout_capture;
  d["mpi_active"] = plan.mpi_active;
  d["nproc"] = plan.nproc;
  return d;
}

std::vector<std::string> input_ids(const std::vector<InputParameter>& inputs) {
  std::vector<std::string> ids;
  for (const auto& p : inputs) ids.push_back(p.id);
  return ids;
}

py::object wrap(Document doc) {
  if (auto* t = std::get_if<ToolDescription>(&doc)) return py::cast(std::move(*t));
  return py::cast(std::get<WorkflowDescription>(std::move(doc)));
}

Environment env_or_current(const std::optional<Environment>& env) {
  return env ? *env : current_environment();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bindings for the cwlmpi runner library.";
  m.attr("__version__") = kVersion;

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ValidationError>(m, "ValidationError", base);
  auto exec = py::register_exception<ExecutionError>(m, "ExecutionError", base);
  py::register_exception<WorkflowFailed>(m, "WorkflowFailed", exec);
  py::register_exception<perf::PerfError>(m, "PerfError", base);

  py::class_<MpiPlatformConfig>(m, "MpiPlatformConfig")
      .def(py::init<>())
      .def_readwrite("runner", &MpiPlatformConfig::runner)
      .def_readwrite("nproc_flag", &MpiPlatformConfig::nproc_flag)
      .def_readwrite("default_nproc", &MpiPlatformConfig::default_nproc)
      .def_readwrite("extra_flags", &MpiPlatformConfig::extra_flags)
      .def_readwrite("env_pass", &MpiPlatformConfig::env_pass)
      .def_readwrite("env_pass_regex", &MpiPlatformConfig::env_pass_regex)
      .def_readwrite("env_set", &MpiPlatformConfig::env_set)
      .def("__eq__", [](const MpiPlatformConfig& a, const MpiPlatformConfig& b) { return a == b; })
      .def("__repr__", [](const MpiPlatformConfig& c) {
        return "<MpiPlatformConfig runner='" + c.runner + "'>";
      });

  m.def("load_config", &load_config, py::arg("path") = py::none());
  m.def("parse_config", &parse_config, py::arg("text"), py::arg("source_name") = "<config>");
  m.def("serialize_config", &serialize_config);
  m.def("validate_config", &validate_config);
  m.def("env_name_matches", &env_name_matches, py::arg("pattern"), py::arg("name"));

  py::class_<ToolDescription>(m, "Tool")
      .def_readonly("id", &ToolDescription::id)
      .def_readonly("source", &ToolDescription::source)
      .def_readonly("base_command", &ToolDescription::base_command)
      .def_property_readonly("inputs", [](const ToolDescription& t) { return input_ids(t.inputs); })
      .def("serialize", [](const ToolDescription& t) { return serialize(t); })
      .def(
          "bind_arguments",
          [](const ToolDescription& t, const py::object& job) {
            return bind_arguments(t, job_for(t.inputs, job));
          },
          py::arg("job") = py::none())
      .def(
          "build_command",
          [](const ToolDescription& t, const py::object& job, const MpiPlatformConfig& cfg,
             const std::optional<Environment>& env, const fs::path& workdir) {
            return plan_dict(
                build_command(t, job_for(t.inputs, job), cfg, env_or_current(env), workdir));
          },
          py::arg("job") = py::none(), py::arg("config") = MpiPlatformConfig{},
          py::arg("env") = py::none(), py::arg("workdir") = fs::path{})
      .def("__eq__", [](const ToolDescription& a, const ToolDescription& b) { return a == b; });

  py::class_<WorkflowDescription>(m, "Workflow")
      .def_readonly("id", &WorkflowDescription::id)
      .def_readonly("source", &WorkflowDescription::source)
      .def_property_readonly("inputs",
                             [](const WorkflowDescription& w) { return input_ids(w.inputs); })
      .def_property_readonly("steps",
                             [](const WorkflowDescription& w) {
                               std::vector<std::string> ids;
                               for (const auto& s : w.steps) ids.push_back(s.id);
                               return ids;
                             })
      .def("plan", [](const WorkflowDescription& w) { return plan(w); });

  m.def(
      "parse_document",
      [](const std::string& text, const fs::path& base_path, const std::string& source_name) {
        ParsedDocument parsed = parse_document(text, base_path, source_name);
        std::vector<std::string> warnings;
        for (const auto& w : parsed.warnings) warnings.push_back(w.str());
        return py::make_tuple(wrap(std::move(parsed.document)), warnings);
      },
      py::arg("text"), py::arg("base_path") = fs::path("."),
      py::arg("source_name") = "<input>");
  m.def(
      "load_document",
      [](const fs::path& path) { return wrap(load_document(path).document); },
      py::arg("path"));

  m.def(
      "run",
      [](const py::object& document, const py::object& job, const MpiPlatformConfig& cfg,
         const fs::path& outdir, bool parallel_steps,
         const std::optional<fs::path>& catalog_path) {
        std::optional<SiteCatalog> catalog;
        if (catalog_path) catalog = load_catalog(*catalog_path);
        RunOptions options;
        options.outdir = outdir;
        options.parallel_steps = parallel_steps;
        options.host_env = current_environment();
        options.catalog = catalog ? &*catalog : nullptr;
        OutputMap outputs;
        if (py::isinstance<ToolDescription>(document)) {
          const auto& tool = document.cast<const ToolDescription&>();
          JobOrder j = job_for(tool.inputs, job);
          std::string name = tool.source.empty() ? "tool" : fs::path(tool.source).stem().string();
          py::gil_scoped_release release;
          outputs = run_tool_document(tool, j, cfg, options, name);
        } else {
          const auto& wf = document.cast<const WorkflowDescription&>();
          JobOrder j = job_for(wf.inputs, job);
          py::gil_scoped_release release;
          outputs = run_workflow(wf, j, cfg, options).outputs;
        }
        return from_json_value(to_json(outputs));
      },
      py::arg("document"), py::arg("job") = py::none(),
      py::arg("config") = MpiPlatformConfig{}, py::arg("outdir") = fs::path("out"),
      py::arg("parallel_steps") = false, py::arg("catalog") = py::none());

  py::class_<perf::RankPerfRecord>(m, "RankPerfRecord")
      .def(py::init([](std::int64_t rank, double flops, double scalar, double vector,
                       double runtime) {
             return perf::RankPerfRecord{rank, flops, scalar, vector, runtime};
           }),
           py::arg("rank"), py::arg("flops"), py::arg("scalar_uops_rate") = 0.0,
           py::arg("vector_uops_rate") = 0.0, py::arg("runtime") = 0.0)
      .def_readwrite("rank", &perf::RankPerfRecord::rank)
      .def_readwrite("flops", &perf::RankPerfRecord::flops)
      .def_readwrite("scalar_uops_rate", &perf::RankPerfRecord::scalar_uops_rate)
      .def_readwrite("vector_uops_rate", &perf::RankPerfRecord::vector_uops_rate)
      .def_readwrite("runtime", &perf::RankPerfRecord::runtime);

  py::class_<perf::AggregateStats>(m, "AggregateStats")
      .def(py::init<>())
      .def_readwrite("nranks", &perf::AggregateStats::nranks)
      .def_readwrite("total_flops", &perf::AggregateStats::total_flops)
      .def_readwrite("mean_flops", &perf::AggregateStats::mean_flops)
      .def_readwrite("sd_flops", &perf::AggregateStats::sd_flops)
      .def_readwrite("total_scalar", &perf::AggregateStats::total_scalar)
      .def_readwrite("total_vector", &perf::AggregateStats::total_vector)
      .def("to_dict",
           [](const perf::AggregateStats& s) { return from_json_value(perf::to_json(s)); })
      .def("__eq__",
           [](const perf::AggregateStats& a, const perf::AggregateStats& b) { return a == b; });

  m.def("rank_from_filename", &perf::rank_from_filename);
  m.def("parse_rank_file", &perf::parse_rank_file);
  m.def("aggregate", &perf::aggregate, py::arg("records"));
  m.def(
      "render_report",
      [](const perf::AggregateStats& s, const std::string& format) {
        if (format == "text") return perf::render_report(s, perf::ReportFormat::kText);
        if (format == "json") return perf::render_report(s, perf::ReportFormat::kJson);
        throw py::value_error("format must be 'text' or 'json'");
      },
      py::arg("stats"), py::arg("format") = "text");
  m.def("expand_glob", &perf::expand_glob, py::arg("pattern"));
}
