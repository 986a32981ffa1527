/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace cwlmpi {

enum class Severity { kInfo, kWarning, kError };

const char* to_string(Severity s);

/// One located message. Rendered as "severity: file:line: message"; the
/// location part is omitted when unknown.
struct Diagnostic {
  Severity severity = Severity::kError;
  std::string file;
  int line = 0;  // 1-based, 0 when unknown
  std::string message;

  std::string str() const;
  bool operator==(const Diagnostic&) const = default;
};

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Document, job order, config or catalog is invalid. Maps to CLI exit 2.
class ValidationError : public Error {
 public:
  explicit ValidationError(Diagnostic d);
  ValidationError(std::string file, int line, std::string message);

  const Diagnostic& diagnostic() const { return diag_; }

 private:
  Diagnostic diag_;
};

/// Runtime failure while staging, launching or collecting. Maps to CLI exit 1.
class ExecutionError : public Error {
 public:
  using Error::Error;
};

namespace log {

using Sink = std::function<void(const Diagnostic&)>;

/// Replaces the process-wide sink; returns the previous one. The default
/// sink writes str() lines to stderr.
Sink set_sink(Sink sink);
void set_min_severity(Severity s);

void emit(const Diagnostic& d);
void info(const std::string& message);
void warn(const std::string& message);
void warn(const std::string& file, int line, const std::string& message);

/// Collects diagnostics for the lifetime of the object (tests).
class Capture {
 public:
  Capture();
  ~Capture();
  Capture(const Capture&) = delete;
  Capture& operator=(const Capture&) = delete;

  std::vector<Diagnostic> messages() const;
  bool contains(const std::string& needle) const;

 private:
  Sink previous_;
  struct State;
  std::shared_ptr<State> state_;
};

}  // namespace log
}  // namespace cwlmpi
