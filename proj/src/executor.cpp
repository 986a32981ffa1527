/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "cwlmpi/executor.hpp"

#include <fcntl.h>
#include <glob.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

namespace cwlmpi {
namespace fs = std::filesystem;

ProcessFailed::ProcessFailed(ExecutionResult result, std::string stderr_tail)
    : ExecutionError("command exited with code " +
                     std::to_string(result.exit_code) +
                     (stderr_tail.empty() ? "" : ": " + stderr_tail)),
      result_(std::move(result)),
      stderr_tail_(std::move(stderr_tail)) {}

namespace {

class Fd {
 public:
  explicit Fd(int fd = -1) : fd_(fd) {}
  ~Fd() { reset(); }
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    reset();
    fd_ = std::exchange(o.fd_, -1);
    return *this;
  }
  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_;
};

Fd open_or_throw(const fs::path& path, int flags) {
  int fd = ::open(path.c_str(), flags | O_CLOEXEC, 0644);
  if (fd < 0)
    throw LaunchError("cannot open '" + path.string() + "': " + std::strerror(errno));
  return Fd(fd);
}

std::string tail_of(const fs::path& path, std::size_t max_bytes = 2048) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::string data((std::istreambuf_iterator<char>(in)), {});
  if (data.size() > max_bytes) data = data.substr(data.size() - max_bytes);
  while (!data.empty() && (data.back() == '\n' || data.back() == '\r'))
    data.pop_back();
  return data;
}

std::string glob_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '*' || c == '?' || c == '[' || c == ']' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

std::vector<fs::path> glob_in(const fs::path& dir, const std::string& pattern) {
  std::string full = glob_escape(fs::absolute(dir).string()) + "/" + pattern;
  glob_t g{};
  int rc = ::glob(full.c_str(), 0, nullptr, &g);
  std::vector<fs::path> out;
  if (rc == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) {
      std::error_code ec;
      if (fs::is_regular_file(g.gl_pathv[i], ec)) out.emplace_back(g.gl_pathv[i]);
    }
  }
  ::globfree(&g);
  std::sort(out.begin(), out.end());
  return out;
}

Value stage_value(const Value& v, const fs::path& workdir) {
  if (v.is<Value::Array>()) {
    Value::Array out;
    for (const auto& item : v.as<Value::Array>())
      out.push_back(stage_value(item, workdir));
    return out;
  }
  if (!v.is<File>()) return v;
  const File& f = v.as<File>();
  fs::path src(f.path);
  std::error_code ec;
  if (!fs::is_regular_file(src, ec))
    throw ExecutionError("input file '" + f.path + "' does not exist");
  fs::path dest = workdir / src.filename();
  for (int n = 1; fs::exists(dest, ec); ++n)
    dest = workdir / ("_stage" + std::to_string(n)) / src.filename();
  fs::create_directories(dest.parent_path(), ec);
  fs::copy_file(src, dest, ec);
  if (ec)
    throw ExecutionError("cannot stage '" + f.path + "' into '" +
                         workdir.string() + "': " + ec.message());
  File staged = File::at(dest.string());
  staged.size = f.size;
  staged.checksum = f.checksum;
  return staged;
}

}  // namespace

File describe_file(const fs::path& path) {
  File f = File::at(fs::absolute(path).lexically_normal().string());
  f.size = fs::file_size(path);

  std::ifstream in(path, std::ios::binary);
  if (!in) throw ExecutionError("cannot read '" + path.string() + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i)
    hex << std::hex << std::setw(2) << std::setfill('0')
        << static_cast<int>(digest[i]);
  f.checksum = "sha1$" + hex.str();
  return f;
}

std::optional<fs::path> find_executable(const std::string& name,
                                        const std::string& search_path) {
  if (name.empty()) return std::nullopt;
  if (name.find('/') != std::string::npos) {
    fs::path p = fs::absolute(name);
    if (::access(p.c_str(), X_OK) == 0 && !fs::is_directory(p)) return p;
    return std::nullopt;
  }
  std::stringstream dirs(search_path);
  std::string dir;
  while (std::getline(dirs, dir, ':')) {
    if (dir.empty()) continue;
    fs::path p = fs::path(dir) / name;
    std::error_code ec;
    if (::access(p.c_str(), X_OK) == 0 && !fs::is_directory(p, ec)) return p;
  }
  return std::nullopt;
}

JobOrder stage(const JobOrder& job, const fs::path& workdir) {
  std::error_code ec;
  fs::create_directories(workdir, ec);
  if (ec || ::access(workdir.c_str(), W_OK) != 0)
    throw ExecutionError("working directory '" + workdir.string() +
                         "' is not writable");
  JobOrder out;
  for (const auto& [id, v] : job) out[id] = stage_value(v, workdir);
  return out;
}

ExecutionResult run(const CommandPlan& plan) {
  if (plan.argv.empty()) throw LaunchError("empty argv");
  fs::path workdir = plan.workdir.empty() ? fs::current_path() : plan.workdir;
  if (!fs::is_directory(workdir))
    throw LaunchError("working directory '" + workdir.string() + "' does not exist");

  auto path_it = plan.env.find("PATH");
  std::string search = path_it != plan.env.end() ? path_it->second
                                                 : "/usr/local/bin:/usr/bin:/bin";
  auto exe = find_executable(plan.argv[0], search);
  if (!exe) throw LaunchError("command not found: " + plan.argv[0]);

  ExecutionResult result;
  result.stdout_path = workdir / plan.stdout_capture.value_or(kStdoutLog);
  result.stderr_path = workdir / kStderrLog;

  Fd in = open_or_throw("/dev/null", O_RDONLY);
  Fd out = open_or_throw(result.stdout_path, O_WRONLY | O_CREAT | O_TRUNC);
  Fd err = open_or_throw(result.stderr_path, O_WRONLY | O_CREAT | O_TRUNC);

  // Everything the child touches is prepared before fork().
  std::vector<std::string> env_strings;
  for (const auto& [k, v] : plan.env) env_strings.push_back(k + "=" + v);
  std::vector<char*> envp;
  for (auto& s : env_strings) envp.push_back(s.data());
  envp.push_back(nullptr);
  std::vector<std::string> args = plan.argv;
  std::vector<char*> argv;
  for (auto& s : args) argv.push_back(s.data());
  argv.push_back(nullptr);
  std::string exe_path = exe->string();
  std::string wd = workdir.string();

  int pipefd[2];
  if (::pipe2(pipefd, O_CLOEXEC) != 0)
    throw LaunchError(std::string("pipe: ") + std::strerror(errno));
  Fd report_read(pipefd[0]);
  Fd report_write(pipefd[1]);

  auto start = std::chrono::steady_clock::now();
  pid_t pid = ::fork();
  if (pid < 0) throw LaunchError(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    if (::dup2(in.get(), 0) < 0 || ::dup2(out.get(), 1) < 0 ||
        ::dup2(err.get(), 2) < 0 || ::chdir(wd.c_str()) != 0) {
      int e = errno;
      (void)!::write(report_write.get(), &e, sizeof(e));
      ::_exit(127);
    }
    ::execve(exe_path.c_str(), argv.data(), envp.data());
    int e = errno;
    (void)!::write(report_write.get(), &e, sizeof(e));
    ::_exit(127);
  }
  report_write.reset();
  in.reset();
  out.reset();
  err.reset();

  int child_errno = 0;
  ssize_t n;
  do {
    n = ::read(report_read.get(), &child_errno, sizeof(child_errno));
  } while (n < 0 && errno == EINTR);

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  result.duration =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (n == static_cast<ssize_t>(sizeof(child_errno)))
    throw LaunchError("cannot execute '" + plan.argv[0] + "': " +
                      std::strerror(child_errno));

  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.exit_code = 128 + WTERMSIG(status);
  } else {
    result.exit_code = 1;
  }
  if (result.exit_code != 0)
    throw ProcessFailed(result, tail_of(result.stderr_path));
  return result;
}

OutputMap collect_outputs(const ToolDescription& tool, const fs::path& workdir,
                          const ExecutionResult& result) {
  if (result.exit_code != 0)
    throw ExecutionError("cannot collect outputs of a failed run");
  OutputMap outputs;
  for (const auto& out : tool.outputs) {
    if (out.kind == OutputKind::kStdout) {
      outputs[out.id] = describe_file(result.stdout_path);
      continue;
    }
    auto matches = glob_in(workdir, *out.glob);
    if (out.kind == OutputKind::kFileArray) {
      Value::Array files;
      for (const auto& m : matches) files.push_back(describe_file(m));
      outputs[out.id] = std::move(files);
      continue;
    }
    if (matches.empty())
      throw ExecutionError("output '" + out.id + "': glob '" + *out.glob +
                           "' matched no files in " + workdir.string());
    if (matches.size() > 1)
      throw ExecutionError("output '" + out.id + "': glob '" + *out.glob +
                           "' matched " + std::to_string(matches.size()) +
                           " files, expected one");
    outputs[out.id] = describe_file(matches.front());
  }
  return outputs;
}

}  // namespace cwlmpi
