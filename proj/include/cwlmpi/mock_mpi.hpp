/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cwlmpi::mock {

inline constexpr const char* kTraceFile = "mock-mpi.trace.json";
inline constexpr int kUsageError = 2;
inline constexpr int kNotFound = 127;

/// Parsed "mock-mpiexec [flags...] -n <k> [flags...] cmd args...".
/// Flags are tokens starting with '-' seen before the command; they are
/// recorded but otherwise ignored.
struct MockLaunchSpec {
  std::int64_t nproc = 0;
  std::vector<std::string> flags;
  std::vector<std::string> command;

  bool operator==(const MockLaunchSpec&) const = default;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `args` excludes the program name. Throws UsageError.
MockLaunchSpec parse_launch_args(const std::vector<std::string>& args);

/// Trace document: keys argv (full invocation including program name),
/// command, env (sorted names passed to children), flags, nproc.
nlohmann::json make_trace(const std::vector<std::string>& full_argv,
                          const MockLaunchSpec& spec,
                          const std::map<std::string, std::string>& env);

/// Serialized trace: sorted keys, two-space indent, trailing newline.
std::string dump_trace(const nlohmann::json& trace);

/// Runs k copies of the command concurrently with MOCK_MPI_RANK and
/// MOCK_MPI_SIZE added to `env`, then writes the trace into `trace_dir`.
/// Returns the largest child exit code, kUsageError or kNotFound.
int mock_launch(const std::vector<std::string>& full_argv,
                const std::map<std::string, std::string>& env,
                const std::filesystem::path& trace_dir);

}  // namespace cwlmpi::mock
