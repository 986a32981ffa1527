/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "cwlmpi/cmdline.hpp"
#include "cwlmpi/cwl_model.hpp"
#include "cwlmpi/value.hpp"

namespace cwlmpi {

struct ExecutionResult {
  int exit_code = 0;
  std::filesystem::path stdout_path;
  std::filesystem::path stderr_path;
  double duration = 0.0;  // seconds
  OutputMap outputs;
};

/// argv[0] could not be resolved or the child could not be started.
class LaunchError : public ExecutionError {
 public:
  using ExecutionError::ExecutionError;
};

/// The child exited non-zero (or was killed; code is then 128 + signal).
class ProcessFailed : public ExecutionError {
 public:
  ProcessFailed(ExecutionResult result, std::string stderr_tail);

  const ExecutionResult& result() const { return result_; }
  int exit_code() const { return result_.exit_code; }
  const std::string& stderr_tail() const { return stderr_tail_; }

 private:
  ExecutionResult result_;
  std::string stderr_tail_;
};

inline constexpr const char* kStdoutLog = "step.stdout";
inline constexpr const char* kStderrLog = "step.stderr";

/// Copies File inputs into `workdir` (created if missing) and rewrites
/// their paths. Other values pass through unchanged.
JobOrder stage(const JobOrder& job, const std::filesystem::path& workdir);

/// Spawns plan.argv with exactly plan.env in plan.workdir; no shell is
/// involved. stdout goes to plan.stdout_capture (or step.stdout), stderr to
/// step.stderr, both inside the workdir. Throws LaunchError or
/// ProcessFailed.
ExecutionResult run(const CommandPlan& plan);

/// Matches each output's glob inside `workdir`. Array outputs are sorted
/// lexicographically; a scalar File needs exactly one match.
OutputMap collect_outputs(const ToolDescription& tool,
                          const std::filesystem::path& workdir,
                          const ExecutionResult& result);

/// Looks `name` up in a colon-separated search path. Names containing '/'
/// are checked as paths.
std::optional<std::filesystem::path> find_executable(
    const std::string& name, const std::string& search_path);

/// File record with size and "sha1$..." checksum.
File describe_file(const std::filesystem::path& path);

}  // namespace cwlmpi
