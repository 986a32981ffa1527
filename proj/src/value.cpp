/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "cwlmpi/value.hpp"

#include <charconv>
#include <filesystem>

#include "cwlmpi/diagnostics.hpp"

namespace cwlmpi {

File File::at(const std::string& path) {
  File f;
  f.path = path;
  f.basename = std::filesystem::path(path).filename().string();
  return f;
}

std::string Value::kind() const {
  struct {
    std::string operator()(const std::string&) const { return "string"; }
    std::string operator()(std::int64_t) const { return "int"; }
    std::string operator()(double) const { return "float"; }
    std::string operator()(bool) const { return "boolean"; }
    std::string operator()(const File&) const { return "File"; }
    std::string operator()(const Array&) const { return "array"; }
  } visitor;
  return std::visit(visitor, data);
}

std::string stringify(const Value& v) {
  if (v.is<std::string>()) return v.as<std::string>();
  if (v.is<std::int64_t>()) return std::to_string(v.as<std::int64_t>());
  if (v.is<double>()) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v.as<double>());
    return std::string(buf, end);
  }
  if (v.is<bool>()) return v.as<bool>() ? "true" : "false";
  if (v.is<File>()) return v.as<File>().path;
  std::string joined;
  for (const auto& item : v.as<Value::Array>()) {
    if (!joined.empty()) joined += ' ';
    joined += stringify(item);
  }
  return joined;
}

nlohmann::json to_json(const Value& v) {
  if (v.is<std::string>()) return v.as<std::string>();
  if (v.is<std::int64_t>()) return v.as<std::int64_t>();
  if (v.is<double>()) return v.as<double>();
  if (v.is<bool>()) return v.as<bool>();
  if (v.is<File>()) {
    const auto& f = v.as<File>();
    nlohmann::json j = {{"class", "File"},
                        {"path", f.path},
                        {"location", "file://" + f.path},
                        {"basename", f.basename}};
    if (f.size) j["size"] = *f.size;
    if (f.checksum) j["checksum"] = *f.checksum;
    return j;
  }
  auto arr = nlohmann::json::array();
  for (const auto& item : v.as<Value::Array>()) arr.push_back(to_json(item));
  return arr;
}

nlohmann::json to_json(const JobOrder& values) {
  auto j = nlohmann::json::object();
  for (const auto& [k, v] : values) j[k] = to_json(v);
  return j;
}

Value value_from_json(const nlohmann::json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  if (j.is_array()) {
    Value::Array items;
    for (const auto& e : j) items.push_back(value_from_json(e));
    return items;
  }
  if (j.is_object() && j.value("class", "") == "File") {
    std::string path = j.value("path", "");
    if (path.empty()) {
      std::string loc = j.value("location", "");
      if (loc.rfind("file://", 0) == 0) loc = loc.substr(7);
      path = loc;
    }
    File f = File::at(path);
    if (j.contains("size")) f.size = j["size"].get<std::uint64_t>();
    if (j.contains("checksum")) f.checksum = j["checksum"].get<std::string>();
    return f;
  }
  throw ValidationError("", 0, "unsupported value: " + j.dump());
}

}  // namespace cwlmpi
