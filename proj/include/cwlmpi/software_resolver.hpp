/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cwlmpi/cmdline.hpp"
#include "cwlmpi/cwl_model.hpp"

namespace cwlmpi {

/// Site-local setup for one package, written as environment deltas rather
/// than `module load` commands.
struct CatalogEntry {
  std::vector<std::string> versions;  // empty: any version satisfies
  std::map<std::string, std::string> env_set;
  std::vector<std::string> path_prepend;  // absolute directories

  bool operator==(const CatalogEntry&) const = default;
};

struct SiteCatalog {
  std::map<std::string, CatalogEntry> entries;

  bool operator==(const SiteCatalog&) const = default;
};

SiteCatalog load_catalog(const std::filesystem::path& path);
SiteCatalog parse_catalog(std::string_view text,
                          const std::string& source_name = "<catalog>");

/// Applies every package of `req` to `plan`. Names in plan.pinned_env are
/// never overwritten; path_prepend directories move to the front of PATH
/// in order, so applying twice equals applying once. With `optional` set
/// (a hint), unresolved packages only warn.
CommandPlan resolve(const SoftwareRequirementDecl& req,
                    const SiteCatalog& catalog, CommandPlan plan,
                    bool optional = false);

}  // namespace cwlmpi
