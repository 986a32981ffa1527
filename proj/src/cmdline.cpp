/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "cwlmpi/cmdline.hpp"

#include <algorithm>
#include <regex>

#include "cwlmpi/expr.hpp"

extern char** environ;

namespace cwlmpi {
namespace {

struct Bound {
  std::int64_t position;
  int kind;         // 0 = argument, 1 = input
  std::string key;  // input id; empty for arguments
  std::size_t order;
  std::vector<std::string> tokens;
};

void append_tokens(const Value& v, std::vector<std::string>& out) {
  if (v.is<Value::Array>()) {
    for (const auto& item : v.as<Value::Array>()) append_tokens(item, out);
  } else {
    out.push_back(stringify(v));
  }
}

}  // namespace

std::vector<std::string> bind_arguments(const ToolDescription& tool,
                                        const JobOrder& job) {
  JobOrder resolved = resolve_job(tool.inputs, job, tool.source);

  std::vector<Bound> bound;
  for (std::size_t i = 0; i < tool.arguments.size(); ++i) {
    const auto& arg = tool.arguments[i];
    Bound b{arg.position, 0, {}, i, {}};
    if (auto ref = parse_ref(arg.value)) {
      append_tokens(evaluate(*ref, resolved), b.tokens);
    } else {
      b.tokens.push_back(arg.value);
    }
    bound.push_back(std::move(b));
  }
  for (const auto& in : tool.inputs) {
    if (!in.binding) continue;
    Bound b{in.binding->position, 1, in.id, 0, {}};
    append_tokens(resolved.at(in.id), b.tokens);
    bound.push_back(std::move(b));
  }
  std::stable_sort(bound.begin(), bound.end(), [](const Bound& a, const Bound& b) {
    if (a.position != b.position) return a.position < b.position;
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.key != b.key) return a.key < b.key;
    return a.order < b.order;
  });

  std::vector<std::string> argv = tool.base_command;
  for (auto& b : bound)
    argv.insert(argv.end(), b.tokens.begin(), b.tokens.end());
  return argv;
}

Environment build_environment(const MpiPlatformConfig& cfg,
                              const Environment& host_env, bool mpi_active) {
  Environment env;
  for (const auto& name : kBaseEnvironment) {
    auto it = host_env.find(name);
    if (it != host_env.end()) env[name] = it->second;
  }
  if (!mpi_active) return env;

  for (const auto& name : cfg.env_pass) {
    auto it = host_env.find(name);
    if (it != host_env.end()) env[name] = it->second;
  }
  if (!cfg.env_pass_regex.empty()) {
    std::vector<std::regex> patterns;
    for (const auto& p : cfg.env_pass_regex)
      patterns.emplace_back(p, std::regex::extended);
    for (const auto& [name, value] : host_env) {
      bool hit = std::any_of(patterns.begin(), patterns.end(),
                             [&](const std::regex& re) {
                               return std::regex_match(name, re);
                             });
      if (hit) env[name] = value;
    }
  }
  for (const auto& [name, value] : cfg.env_set) env[name] = value;
  return env;
}

CommandPlan build_command(const ToolDescription& tool, const JobOrder& job,
                          const MpiPlatformConfig& cfg,
                          const Environment& host_env,
                          const std::filesystem::path& workdir) {
  JobOrder resolved = resolve_job(tool.inputs, job, tool.source);

  CommandPlan plan;
  plan.workdir = workdir;
  plan.stdout_capture = tool.stdout_file;

  if (auto eff = effective_requirement(tool, kMpiRequirement)) {
    if (eff->optional)
      log::warn(tool.source, 0, "MPIRequirement given as a hint; honoring it");
    const auto& decl = std::get<MpiRequirementDecl>(eff->requirement.body);
    try {
      plan.nproc = resolve_processes(decl, resolved, cfg.default_nproc);
    } catch (const ExprError& e) {
      throw ValidationError(tool.source, 0,
                            std::string("MPIRequirement.processes: ") + e.what());
    }
  }
  plan.mpi_active = plan.nproc > 0;

  std::vector<std::string> tool_argv = bind_arguments(tool, resolved);
  if (tool_argv.empty())
    throw ValidationError(tool.source, 0, "empty command line");
  if (plan.mpi_active) {
    plan.argv = {cfg.runner, cfg.nproc_flag, std::to_string(plan.nproc)};
    plan.argv.insert(plan.argv.end(), cfg.extra_flags.begin(),
                     cfg.extra_flags.end());
    for (const auto& [name, value] : cfg.env_set) plan.pinned_env.insert(name);
  }
  plan.argv.insert(plan.argv.end(), tool_argv.begin(), tool_argv.end());
  plan.env = build_environment(cfg, host_env, plan.mpi_active);
  return plan;
}

Environment current_environment() {
  Environment env;
  for (char** e = environ; e && *e; ++e) {
    std::string entry(*e);
    auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    env.emplace(entry.substr(0, eq), entry.substr(eq + 1));
  }
  return env;
}

}  // namespace cwlmpi
