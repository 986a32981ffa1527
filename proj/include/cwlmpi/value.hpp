/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace cwlmpi {

/// A File record as seen by tools and emitted in output objects.
struct File {
  std::string path;
  std::string basename;
  std::optional<std::uint64_t> size;
  std::optional<std::string> checksum;  // "sha1$<hex>"

  /// Record for `path` with basename filled in; size/checksum left empty.
  static File at(const std::string& path);

  bool operator==(const File&) const = default;
};

/// A concrete input or output value.
struct Value {
  using Array = std::vector<Value>;
  using Storage =
      std::variant<std::string, std::int64_t, double, bool, File, Array>;

  Storage data;

  Value() = default;
  Value(std::string s) : data(std::move(s)) {}
  Value(const char* s) : data(std::string(s)) {}
  Value(std::int64_t i) : data(i) {}
  Value(int i) : data(static_cast<std::int64_t>(i)) {}
  Value(double d) : data(d) {}
  Value(bool b) : data(b) {}
  Value(File f) : data(std::move(f)) {}
  Value(Array a) : data(std::move(a)) {}

  template <typename T>
  bool is() const {
    return std::holds_alternative<T>(data);
  }
  template <typename T>
  const T& as() const {
    return std::get<T>(data);
  }

  /// "string", "int", "float", "boolean", "File" or "array".
  std::string kind() const;

  bool operator==(const Value&) const = default;
};

/// Concrete input values keyed by input id.
using JobOrder = std::map<std::string, Value>;
/// Output values keyed by output id.
using OutputMap = std::map<std::string, Value>;

/// Command-line rendering: File -> path, bool -> "true"/"false", floats in
/// shortest round-trip form. Arrays are flattened by the caller.
std::string stringify(const Value& v);

nlohmann::json to_json(const Value& v);
nlohmann::json to_json(const JobOrder& values);
Value value_from_json(const nlohmann::json& j);

}  // namespace cwlmpi
