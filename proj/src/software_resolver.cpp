/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "cwlmpi/software_resolver.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace cwlmpi {
namespace {

int line_of(const YAML::Node& n) { return n.Mark().is_null() ? 0 : n.Mark().line + 1; }

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::stringstream ss(path);
  std::string item;
  while (std::getline(ss, item, ':')) out.push_back(item);
  return out;
}

}  // namespace

SiteCatalog parse_catalog(std::string_view text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ValidationError(source, e.mark.line + 1, "syntax error: " + e.msg);
  }
  SiteCatalog catalog;
  if (root.IsNull()) return catalog;
  if (!root.IsMap())
    throw ValidationError(source, line_of(root), "catalog must be a mapping");

  auto strings = [&](const YAML::Node& n, const std::string& what) {
    std::vector<std::string> out;
    if (n.IsNull()) return out;
    if (!n.IsSequence())
      throw ValidationError(source, line_of(n), what + " must be a list");
    for (const auto& s : n) {
      if (!s.IsScalar())
        throw ValidationError(source, line_of(s), what + " items must be strings");
      out.push_back(s.as<std::string>());
    }
    return out;
  };

  for (const auto& kv : root) {
    auto name = kv.first.as<std::string>();
    if (name.empty())
      throw ValidationError(source, line_of(kv.first), "package name must be non-empty");
    CatalogEntry entry;
    const YAML::Node& body = kv.second;
    if (!body.IsNull() && !body.IsMap())
      throw ValidationError(source, line_of(body),
                            "entry '" + name + "' must be a mapping");
    if (body.IsMap()) {
      for (const auto& f : body) {
        auto key = f.first.as<std::string>();
        const YAML::Node& v = f.second;
        if (key == "versions") {
          entry.versions = strings(v, name + ".versions");
        } else if (key == "path_prepend") {
          entry.path_prepend = strings(v, name + ".path_prepend");
          for (const auto& dir : entry.path_prepend)
            if (dir.empty() || dir.front() != '/')
              throw ValidationError(source, line_of(v),
                                    name + ".path_prepend: '" + dir +
                                        "' is not an absolute path");
        } else if (key == "env_set") {
          if (v.IsNull()) continue;
          if (!v.IsMap())
            throw ValidationError(source, line_of(v), name + ".env_set must be a mapping");
          for (const auto& e : v) {
            if (!e.second.IsScalar())
              throw ValidationError(source, line_of(e.second),
                                    name + ".env_set values must be strings");
            entry.env_set[e.first.as<std::string>()] = e.second.as<std::string>();
          }
        } else {
          throw ValidationError(source, line_of(f.first),
                                "unknown key '" + key + "' in entry '" + name + "'");
        }
      }
    }
    catalog.entries[name] = std::move(entry);
  }
  return catalog;
}

SiteCatalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path.string(), 0, "cannot read catalog");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_catalog(buf.str(), path.string());
}

CommandPlan resolve(const SoftwareRequirementDecl& req,
                    const SiteCatalog& catalog, CommandPlan plan,
                    bool optional) {
  for (const auto& pkg : req.packages) {
    auto it = catalog.entries.find(pkg.name);
    std::string problem;
    if (it == catalog.entries.end()) {
      problem = "software package '" + pkg.name + "' not found in site catalog";
    } else if (!pkg.versions.empty() && !it->second.versions.empty()) {
      const auto& have = it->second.versions;
      bool ok = std::any_of(pkg.versions.begin(), pkg.versions.end(),
                            [&](const std::string& v) {
                              return std::find(have.begin(), have.end(), v) != have.end();
                            });
      if (!ok) problem = "no catalog version of '" + pkg.name + "' satisfies the request";
    }
    if (!problem.empty()) {
      if (optional) {
        log::warn(problem + " (hint; ignored)");
        continue;
      }
      throw ValidationError("", 0, problem);
    }

    const CatalogEntry& entry = it->second;
    for (const auto& [name, value] : entry.env_set)
      if (!plan.pinned_env.count(name)) plan.env[name] = value;

    if (!entry.path_prepend.empty() && !plan.pinned_env.count("PATH")) {
      auto existing = plan.env.count("PATH") ? split_path(plan.env["PATH"])
                                             : std::vector<std::string>{};
      std::vector<std::string> merged = entry.path_prepend;
      for (const auto& dir : existing)
        if (std::find(entry.path_prepend.begin(), entry.path_prepend.end(), dir) ==
            entry.path_prepend.end())
          merged.push_back(dir);
      std::string joined;
      for (std::size_t i = 0; i < merged.size(); ++i) {
        if (i) joined += ':';
        joined += merged[i];
      }
      plan.env["PATH"] = joined;
    }
  }
  return plan;
}

}  // namespace cwlmpi
