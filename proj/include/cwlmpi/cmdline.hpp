/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cwlmpi/cwl_model.hpp"
#include "cwlmpi/mpi_config.hpp"
#include "cwlmpi/value.hpp"

namespace cwlmpi {

using Environment = std::map<std::string, std::string>;

/// Everything needed to start one step. When `mpi_active`, argv is
/// [runner, nproc_flag, nproc, extra_flags..., tool command...].
struct CommandPlan {
  std::vector<std::string> argv;
  Environment env;
  std::filesystem::path workdir;
  std::optional<std::string> stdout_capture;
  bool mpi_active = false;
  std::int64_t nproc = 0;
  /// Names fixed by the platform env_set; later layers must not touch them.
  std::set<std::string> pinned_env;

  bool operator==(const CommandPlan&) const = default;
};

/// Host variables carried into every child.
inline const std::vector<std::string> kBaseEnvironment = {"HOME", "PATH",
                                                          "TMPDIR"};

/// baseCommand, then arguments and bound inputs ordered by position. Ties
/// go to arguments (in declaration order), then inputs by id.
std::vector<std::string> bind_arguments(const ToolDescription& tool,
                                        const JobOrder& job);

Environment build_environment(const MpiPlatformConfig& cfg,
                              const Environment& host_env, bool mpi_active);

/// Zero processes disables the requirement: the plan is then identical to
/// the serial one.
CommandPlan build_command(const ToolDescription& tool, const JobOrder& job,
                          const MpiPlatformConfig& cfg,
                          const Environment& host_env,
                          const std::filesystem::path& workdir = {});

/// Snapshot of this process's environment.
Environment current_environment();

}  // namespace cwlmpi
