/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "cwlmpi/mock_mpi.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>

#include "cwlmpi/executor.hpp"

namespace cwlmpi::mock {
namespace fs = std::filesystem;

MockLaunchSpec parse_launch_args(const std::vector<std::string>& args) {
  MockLaunchSpec spec;
  bool have_n = false;
  std::size_t i = 0;
  while (i < args.size()) {
    const std::string& a = args[i];
    if (a == "-n" || a == "-np") {
      if (i + 1 >= args.size()) throw UsageError("missing value after " + a);
      const std::string& v = args[i + 1];
      std::int64_t n = 0;
      auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
      if (ec != std::errc() || end != v.data() + v.size())
        throw UsageError("invalid process count '" + v + "'");
      if (n < 1) throw UsageError("process count must be >= 1, got " + v);
      spec.nproc = n;
      have_n = true;
      i += 2;
      continue;
    }
    if (!a.empty() && a[0] == '-') {
      spec.flags.push_back(a);
      ++i;
      continue;
    }
    break;
  }
  if (!have_n) throw UsageError("missing -n <nproc>");
  spec.command.assign(args.begin() + static_cast<std::ptrdiff_t>(i), args.end());
  if (spec.command.empty()) throw UsageError("missing command");
  return spec;
}

nlohmann::json make_trace(const std::vector<std::string>& full_argv,
                          const MockLaunchSpec& spec,
                          const std::map<std::string, std::string>& env) {
  nlohmann::json trace;
  trace["argv"] = full_argv;
  trace["command"] = spec.command;
  auto names = nlohmann::json::array();
  for (const auto& [name, value] : env) names.push_back(name);
  trace["env"] = names;
  trace["flags"] = spec.flags;
  trace["nproc"] = spec.nproc;
  return trace;
}

std::string dump_trace(const nlohmann::json& trace) { return trace.dump(2) + "\n"; }

int mock_launch(const std::vector<std::string>& full_argv,
                const std::map<std::string, std::string>& env,
                const fs::path& trace_dir) {
  std::vector<std::string> args(full_argv.begin() + (full_argv.empty() ? 0 : 1),
                                full_argv.end());
  MockLaunchSpec spec;
  try {
    spec = parse_launch_args(args);
  } catch (const UsageError& e) {
    std::cerr << "mock-mpiexec: " << e.what() << "\n"
              << "usage: mock-mpiexec [flags] -n <nproc> command [args...]\n";
    return kUsageError;
  }

  auto path_it = env.find("PATH");
  auto exe = find_executable(spec.command[0],
                             path_it != env.end() ? path_it->second : "/usr/bin:/bin");
  if (!exe) {
    std::cerr << "mock-mpiexec: command not found: " << spec.command[0] << "\n";
    return kNotFound;
  }

  std::vector<std::string> args_copy = spec.command;
  std::vector<char*> argv;
  for (auto& s : args_copy) argv.push_back(s.data());
  argv.push_back(nullptr);

  std::vector<pid_t> children;
  for (std::int64_t rank = 0; rank < spec.nproc; ++rank) {
    auto child_env = env;
    child_env["MOCK_MPI_RANK"] = std::to_string(rank);
    child_env["MOCK_MPI_SIZE"] = std::to_string(spec.nproc);
    std::vector<std::string> env_strings;
    for (const auto& [k, v] : child_env) env_strings.push_back(k + "=" + v);
    std::vector<char*> envp;
    for (auto& s : env_strings) envp.push_back(s.data());
    envp.push_back(nullptr);

    std::cout.flush();
    pid_t pid = ::fork();
    if (pid < 0) {
      std::perror("mock-mpiexec: fork");
      break;
    }
    if (pid == 0) {
      ::execve(exe->c_str(), argv.data(), envp.data());
      ::_exit(kNotFound);
    }
    children.push_back(pid);
  }

  int worst = children.size() == static_cast<std::size_t>(spec.nproc) ? 0 : 1;
  for (pid_t pid : children) {
    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    int code = WIFEXITED(status) ? WEXITSTATUS(status)
                                 : 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
    worst = std::max(worst, code);
  }

  std::ofstream trace(trace_dir / kTraceFile, std::ios::binary | std::ios::trunc);
  trace << dump_trace(make_trace(full_argv, spec, env));
  if (!trace) {
    std::cerr << "mock-mpiexec: cannot write " << kTraceFile << "\n";
    worst = std::max(worst, 1);
  }
  return worst;
}

}  // namespace cwlmpi::mock
