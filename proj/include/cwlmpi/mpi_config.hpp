/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cwlmpi {

/// Platform description of how to start an MPI job. Every key is optional
/// in the file; the defaults give a plain `mpirun -n <N>` launch.
struct MpiPlatformConfig {
  std::string runner = "mpirun";
  std::string nproc_flag = "-n";
  std::int64_t default_nproc = 1;
  /// Inserted after the process-count pair, before the tool command.
  std::vector<std::string> extra_flags;
  std::vector<std::string> env_pass;
  /// POSIX extended regular expressions, matched against the whole name.
  std::vector<std::string> env_pass_regex;
  std::map<std::string, std::string> env_set;

  bool operator==(const MpiPlatformConfig&) const = default;
};

/// Defaults when `path` is nullopt. Throws ValidationError on unreadable
/// files, unknown keys, mistyped values and failed validation.
MpiPlatformConfig load_config(const std::optional<std::filesystem::path>& path);

MpiPlatformConfig parse_config(std::string_view text,
                               const std::string& source_name = "<config>");

/// Empty iff all invariants hold.
std::vector<std::string> validate_config(const MpiPlatformConfig& cfg);

/// YAML text carrying all seven keys; parse_config(serialize_config(c)) == c.
std::string serialize_config(const MpiPlatformConfig& cfg);

/// True when `name` fully matches `pattern` (POSIX extended syntax).
/// Throws std::regex_error for an invalid pattern.
bool env_name_matches(const std::string& pattern, const std::string& name);

}  // namespace cwlmpi
