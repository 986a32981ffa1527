/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "cwlmpi/mpi_config.hpp"

#include <fstream>
#include <regex>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "cwlmpi/diagnostics.hpp"

namespace cwlmpi {
namespace {

int line_of(const YAML::Node& n) { return n.Mark().is_null() ? 0 : n.Mark().line + 1; }

std::string as_string(const YAML::Node& n, const std::string& key,
                      const std::string& source) {
  if (!n.IsScalar())
    throw ValidationError(source, line_of(n), "'" + key + "' must be a string");
  return n.as<std::string>();
}

std::vector<std::string> as_string_list(const YAML::Node& n,
                                        const std::string& key,
                                        const std::string& source) {
  if (n.IsNull()) return {};
  if (!n.IsSequence())
    throw ValidationError(source, line_of(n),
                          "'" + key + "' must be a list of strings");
  std::vector<std::string> out;
  for (const auto& item : n) out.push_back(as_string(item, key + " item", source));
  return out;
}

}  // namespace

bool env_name_matches(const std::string& pattern, const std::string& name) {
  std::regex re(pattern, std::regex::extended);
  return std::regex_match(name, re);
}

std::vector<std::string> validate_config(const MpiPlatformConfig& cfg) {
  std::vector<std::string> diags;
  if (cfg.runner.empty()) diags.push_back("runner must be non-empty");
  if (cfg.nproc_flag.empty()) diags.push_back("nproc_flag must be non-empty");
  if (cfg.default_nproc < 1) diags.push_back("default_nproc must be >= 1");
  for (const auto& pattern : cfg.env_pass_regex) {
    try {
      std::regex re(pattern, std::regex::extended);
    } catch (const std::regex_error& e) {
      diags.push_back("invalid pattern '" + pattern + "' in env_pass_regex: " +
                      e.what());
    }
  }
  for (const auto& name : cfg.env_pass)
    if (name.empty()) diags.push_back("env_pass entries must be non-empty");
  for (const auto& [name, value] : cfg.env_set)
    if (name.empty() || name.find('=') != std::string::npos)
      diags.push_back("invalid env_set variable name '" + name + "'");
  return diags;
}

MpiPlatformConfig parse_config(std::string_view text,
                               const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ValidationError(source, e.mark.line + 1, "syntax error: " + e.msg);
  }
  MpiPlatformConfig cfg;
  if (root.IsNull()) return cfg;
  if (!root.IsMap())
    throw ValidationError(source, line_of(root), "config must be a mapping");

  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    const YAML::Node& v = kv.second;
    if (key == "runner") {
      cfg.runner = as_string(v, key, source);
    } else if (key == "nproc_flag") {
      cfg.nproc_flag = as_string(v, key, source);
    } else if (key == "default_nproc") {
      std::int64_t n = 0;
      if (!v.IsScalar() || v.Tag() == "!" || !YAML::convert<std::int64_t>::decode(v, n))
        throw ValidationError(source, line_of(v), "'default_nproc' must be an integer");
      cfg.default_nproc = n;
    } else if (key == "extra_flags") {
      cfg.extra_flags = as_string_list(v, key, source);
    } else if (key == "env_pass") {
      cfg.env_pass = as_string_list(v, key, source);
    } else if (key == "env_pass_regex") {
      cfg.env_pass_regex = as_string_list(v, key, source);
    } else if (key == "env_set") {
      if (v.IsNull()) continue;
      if (!v.IsMap())
        throw ValidationError(source, line_of(v), "'env_set' must be a mapping");
      for (const auto& e : v)
        cfg.env_set[e.first.as<std::string>()] =
            as_string(e.second, "env_set value", source);
    } else {
      throw ValidationError(source, line_of(kv.first),
                            "unknown key \"" + key + "\"");
    }
  }
  auto diags = validate_config(cfg);
  if (!diags.empty()) throw ValidationError(source, 0, diags.front());
  return cfg;
}

MpiPlatformConfig load_config(const std::optional<std::filesystem::path>& path) {
  if (!path) return {};
  std::ifstream in(*path);
  if (!in) throw ValidationError(path->string(), 0, "cannot read config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path->string());
}

std::string serialize_config(const MpiPlatformConfig& cfg) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "runner" << YAML::Value << YAML::DoubleQuoted << cfg.runner;
  out << YAML::Key << "nproc_flag" << YAML::Value << YAML::DoubleQuoted
      << cfg.nproc_flag;
  out << YAML::Key << "default_nproc" << YAML::Value << cfg.default_nproc;
  auto list = [&](const char* key, const std::vector<std::string>& items) {
    out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto& s : items) out << YAML::DoubleQuoted << s;
    out << YAML::EndSeq;
  };
  list("extra_flags", cfg.extra_flags);
  list("env_pass", cfg.env_pass);
  list("env_pass_regex", cfg.env_pass_regex);
  out << YAML::Key << "env_set" << YAML::Value << YAML::BeginMap;
  for (const auto& [k, v] : cfg.env_set)
    out << YAML::Key << YAML::DoubleQuoted << k << YAML::Value
        << YAML::DoubleQuoted << v;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace cwlmpi
