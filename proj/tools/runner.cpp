/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

// runner: execute a CommandLineTool or Workflow document.
//
//   runner [options] <document> [job]
//   runner perfstats <glob> [--format text|json]
//
// Exit status: 0 success, 1 execution failure, 2 usage or validation error.
// Only the outputs JSON (or the perfstats report) is written to stdout.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cwlmpi/cmdline.hpp"
#include "cwlmpi/cwl_model.hpp"
#include "cwlmpi/diagnostics.hpp"
#include "cwlmpi/expr.hpp"
#include "cwlmpi/mpi_config.hpp"
#include "cwlmpi/perfstats.hpp"
#include "cwlmpi/software_resolver.hpp"
#include "cwlmpi/version.hpp"
#include "cwlmpi/workflow_engine.hpp"

namespace fs = std::filesystem;
using namespace cwlmpi;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

struct Invocation {
  std::string document;
  std::optional<std::string> job;
  std::optional<std::string> mpi_config;
  std::optional<std::string> software_catalog;
  std::string outdir = "./out";
  std::vector<std::string> inputs;
  bool parallel_steps = false;
  bool quiet = false;
  bool verbose = false;
};

JobOrder build_job(const Invocation& inv,
                   const std::vector<InputParameter>& params) {
  JobOrder job;
  for (const auto& kv : inv.inputs) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ValidationError("--input", 0, "expected key=value, got '" + kv + "'");
    std::string key = kv.substr(0, eq);
    auto it = std::find_if(params.begin(), params.end(),
                           [&](const auto& p) { return p.id == key; });
    if (it == params.end())
      throw ValidationError("--input", 0, "no input named '" + key + "'");
    job[key] = coerce_input(*it, kv.substr(eq + 1));
  }
  if (inv.job) {
    std::ifstream in(*inv.job);
    if (!in) throw ValidationError(*inv.job, 0, "cannot read job order");
    std::stringstream buf;
    buf << in.rdbuf();
    fs::path base = fs::absolute(*inv.job).parent_path();
    for (auto& [k, v] : parse_job_order(buf.str(), params, base, *inv.job))
      job[k] = std::move(v);
  }
  return job;
}

int run_document(const Invocation& inv) {
  if (inv.quiet) log::set_min_severity(Severity::kError);

  MpiPlatformConfig cfg = load_config(
      inv.mpi_config ? std::optional<fs::path>(*inv.mpi_config) : std::nullopt);
  std::optional<SiteCatalog> catalog;
  if (inv.software_catalog) catalog = load_catalog(*inv.software_catalog);

  ParsedDocument parsed = load_document(inv.document);
  for (const auto& w : parsed.warnings) log::emit(w);

  RunOptions options;
  options.outdir = inv.outdir;
  options.parallel_steps = inv.parallel_steps;
  options.host_env = current_environment();
  options.catalog = catalog ? &*catalog : nullptr;

  OutputMap outputs;
  if (const auto* tool = std::get_if<ToolDescription>(&parsed.document)) {
    JobOrder job = build_job(inv, tool->inputs);
    outputs = run_tool_document(*tool, job, cfg, options,
                                fs::path(inv.document).stem().string());
  } else {
    const auto& wf = std::get<WorkflowDescription>(parsed.document);
    JobOrder job = build_job(inv, wf.inputs);
    WorkflowRun run = run_workflow(wf, job, cfg, options);
    if (inv.verbose)
      for (const auto& step : run.steps)
        log::info("step '" + step.id + "' finished" +
                  (step.plan.mpi_active
                       ? " (MPI, " + std::to_string(step.plan.nproc) + " processes)"
                       : ""));
    outputs = std::move(run.outputs);
  }
  std::cout << to_json(outputs).dump(2) << std::endl;
  return kOk;
}

int run_perfstats(const std::string& pattern, const std::string& format) {
  auto files = perf::expand_glob(pattern);
  if (files.empty()) throw perf::PerfError("no files match '" + pattern + "'");
  std::vector<perf::RankPerfRecord> records;
  for (const auto& f : files) records.push_back(perf::parse_rank_file(f));
  auto stats = perf::aggregate(std::move(records));
  std::cout << perf::render_report(
      stats, format == "json" ? perf::ReportFormat::kJson : perf::ReportFormat::kText);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Run CWL CommandLineTool and Workflow documents, with MPI launch support"};
  app.set_version_flag("--version", std::string(kVersion));

  Invocation inv;
  app.add_option("document", inv.document, "Tool or workflow document");
  app.add_option("job", inv.job, "Job order file (YAML or JSON)");
  app.add_option("--mpi-config-file", inv.mpi_config,
                 "MPI platform configuration (YAML)");
  app.add_option("--software-catalog", inv.software_catalog,
                 "Site catalog mapping software packages to environment setup");
  app.add_option("--outdir", inv.outdir, "Output directory")->capture_default_str();
  app.add_option("--input", inv.inputs, "Inline input as key=value (repeatable)");
  app.add_flag("--parallel-steps", inv.parallel_steps,
               "Run independent workflow steps concurrently");
  app.add_flag("--quiet", inv.quiet, "Only report errors");
  app.add_flag("--verbose", inv.verbose, "Report per-step details");

  std::string pattern;
  std::string format = "text";
  auto* perfstats = app.add_subcommand(
      "perfstats", "Aggregate per-rank performance counter files");
  perfstats->add_option("glob", pattern, "Rank files, e.g. 'out/likwid_*.json'")
      ->required();
  perfstats->add_option("--format", format, "Report format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*perfstats) return run_perfstats(pattern, format);
    if (inv.document.empty()) {
      std::cerr << app.help();
      return kUsage;
    }
    return run_document(inv);
  } catch (const ValidationError& e) {
    std::cerr << e.diagnostic().str() << "\n";
    return kUsage;
  } catch (const ExprError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const perf::PerfError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << inv.document << ": " << e.what() << "\n";
    return kFailed;
  }
}
