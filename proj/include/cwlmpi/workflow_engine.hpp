/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cwlmpi/cmdline.hpp"
#include "cwlmpi/cwl_model.hpp"
#include "cwlmpi/executor.hpp"
#include "cwlmpi/mpi_config.hpp"
#include "cwlmpi/software_resolver.hpp"

namespace cwlmpi {

struct StepGraph {
  std::vector<std::string> nodes;
  std::vector<std::pair<std::string, std::string>> edges;  // producer -> consumer

  static StepGraph from(const WorkflowDescription& wf);
};

/// Ready-sets in execution order; ids within a set are sorted.
using Schedule = std::vector<std::vector<std::string>>;

/// Kahn levelling. Throws ValidationError on a cycle or an edge to an
/// unknown node.
Schedule plan(const StepGraph& graph);
Schedule plan(const WorkflowDescription& wf);

struct RunOptions {
  std::filesystem::path outdir = "out";
  bool parallel_steps = false;
  Environment host_env;
  const SiteCatalog* catalog = nullptr;
};

struct ToolRun {
  CommandPlan plan;
  ExecutionResult result;
  OutputMap outputs;
};

/// Stage -> plan -> software resolve -> run -> collect, inside `workdir`
/// (recreated empty). `inherited` supplies requirements from an enclosing
/// workflow for classes the tool does not declare itself.
ToolRun run_tool(const ToolDescription& tool, const JobOrder& job,
                 const MpiPlatformConfig& cfg, const RunOptions& options,
                 const std::filesystem::path& workdir,
                 const std::vector<EffectiveRequirement>& inherited = {});

struct StepRecord {
  std::string id;
  std::uint64_t start_seq = 0;
  std::uint64_t end_seq = 0;
  bool ok = false;
  bool skipped = false;
  std::string error;
  CommandPlan plan;
};

struct WorkflowRun {
  OutputMap outputs;
  std::vector<StepRecord> steps;  // ordered by start_seq; skipped ones last
};

/// At least one step failed. Dependents of failed steps were skipped;
/// independent steps still ran.
class WorkflowFailed : public ExecutionError {
 public:
  WorkflowFailed(std::vector<std::pair<std::string, std::string>> failures,
                 WorkflowRun partial);

  const std::vector<std::pair<std::string, std::string>>& failures() const {
    return failures_;
  }
  const WorkflowRun& partial() const { return partial_; }

 private:
  std::vector<std::pair<std::string, std::string>> failures_;
  WorkflowRun partial_;
};

/// Executes each step in <outdir>/<step id>/ and copies the workflow's File
/// outputs into outdir.
WorkflowRun run_workflow(const WorkflowDescription& wf, const JobOrder& job,
                         const MpiPlatformConfig& cfg, const RunOptions& options);

/// Single-tool convenience used by the CLI: runs in <outdir>/<name>/ and
/// copies File outputs into outdir.
OutputMap run_tool_document(const ToolDescription& tool, const JobOrder& job,
                            const MpiPlatformConfig& cfg,
                            const RunOptions& options, const std::string& name);

}  // namespace cwlmpi
