/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "cwlmpi/diagnostics.hpp"

#include <algorithm>
#include <iostream>
#include <mutex>

namespace cwlmpi {

const char* to_string(Severity s) {
  switch (s) {
    case Severity::kInfo:
      return "info";
    case Severity::kWarning:
      return "warning";
    case Severity::kError:
      return "error";
  }
  return "error";
}

std::string Diagnostic::str() const {
  std::string out = to_string(severity);
  out += ": ";
  if (!file.empty()) {
    out += file;
    if (line > 0) out += ":" + std::to_string(line);
    out += ": ";
  }
  out += message;
  return out;
}

ValidationError::ValidationError(Diagnostic d)
    : Error(d.str()), diag_(std::move(d)) {}

ValidationError::ValidationError(std::string file, int line,
                                 std::string message)
    : ValidationError(Diagnostic{Severity::kError, std::move(file), line,
                                 std::move(message)}) {}

namespace log {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

Sink& current_sink() {
  static Sink sink = [](const Diagnostic& d) { std::cerr << d.str() << "\n"; };
  return sink;
}

Severity& min_severity() {
  static Severity s = Severity::kInfo;
  return s;
}

}  // namespace

Sink set_sink(Sink sink) {
  std::lock_guard lock(sink_mutex());
  std::swap(current_sink(), sink);
  return sink;
}

void set_min_severity(Severity s) {
  std::lock_guard lock(sink_mutex());
  min_severity() = s;
}

void emit(const Diagnostic& d) {
  std::lock_guard lock(sink_mutex());
  if (d.severity < min_severity()) return;
  if (current_sink()) current_sink()(d);
}

void info(const std::string& message) {
  emit({Severity::kInfo, "", 0, message});
}

void warn(const std::string& message) {
  emit({Severity::kWarning, "", 0, message});
}

void warn(const std::string& file, int line, const std::string& message) {
  emit({Severity::kWarning, file, line, message});
}

struct Capture::State {
  std::mutex mutex;
  std::vector<Diagnostic> messages;
};

Capture::Capture() : state_(std::make_shared<State>()) {
  previous_ = set_sink([state = state_](const Diagnostic& d) {
    std::lock_guard lock(state->mutex);
    state->messages.push_back(d);
  });
}

Capture::~Capture() { set_sink(std::move(previous_)); }

std::vector<Diagnostic> Capture::messages() const {
  std::lock_guard lock(state_->mutex);
  return state_->messages;
}

bool Capture::contains(const std::string& needle) const {
  auto all = messages();
  return std::any_of(all.begin(), all.end(), [&](const Diagnostic& d) {
    return d.str().find(needle) != std::string::npos;
  });
}

}  // namespace log
}  // namespace cwlmpi
