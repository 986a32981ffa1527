/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "cwlmpi/cwl_model.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <regex>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "cwlmpi/expr.hpp"

namespace cwlmpi {
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// ParamType

std::optional<ParamType> ParamType::parse(std::string_view text) {
  ParamType t;
  if (text.size() > 2 && text.substr(text.size() - 2) == "[]") {
    t.array = true;
    text.remove_suffix(2);
  }
  if (text == "string") {
    t.base = BaseType::kString;
  } else if (text == "int") {
    t.base = BaseType::kInt;
  } else if (text == "float") {
    t.base = BaseType::kFloat;
  } else if (text == "boolean") {
    t.base = BaseType::kBoolean;
  } else if (text == "File") {
    t.base = BaseType::kFile;
  } else {
    return std::nullopt;
  }
  return t;
}

std::string ParamType::str() const {
  std::string s;
  switch (base) {
    case BaseType::kString:
      s = "string";
      break;
    case BaseType::kInt:
      s = "int";
      break;
    case BaseType::kFloat:
      s = "float";
      break;
    case BaseType::kBoolean:
      s = "boolean";
      break;
    case BaseType::kFile:
      s = "File";
      break;
  }
  return array ? s + "[]" : s;
}

std::optional<Value> conform(const ParamType& type, const Value& v) {
  if (type.array) {
    if (!v.is<Value::Array>()) return std::nullopt;
    ParamType item{type.base, false};
    Value::Array out;
    for (const auto& e : v.as<Value::Array>()) {
      auto c = conform(item, e);
      if (!c) return std::nullopt;
      out.push_back(std::move(*c));
    }
    return Value(std::move(out));
  }
  switch (type.base) {
    case BaseType::kString:
      if (v.is<std::string>()) return v;
      break;
    case BaseType::kInt:
      if (v.is<std::int64_t>()) return v;
      break;
    case BaseType::kFloat:
      if (v.is<double>()) return v;
      if (v.is<std::int64_t>())
        return Value(static_cast<double>(v.as<std::int64_t>()));
      break;
    case BaseType::kBoolean:
      if (v.is<bool>()) return v;
      break;
    case BaseType::kFile:
      if (v.is<File>()) return v;
      break;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Lookup helpers

const InputParameter* ToolDescription::find_input(std::string_view id) const {
  for (const auto& in : inputs)
    if (in.id == id) return &in;
  return nullptr;
}

const OutputParameter* ToolDescription::find_output(
    std::string_view id) const {
  for (const auto& out : outputs)
    if (out.id == id) return &out;
  return nullptr;
}

std::vector<std::string> WorkflowStep::upstream() const {
  std::set<std::string> producers;
  for (const auto& in : this->in) {
    auto slash = in.source.find('/');
    if (slash != std::string::npos) producers.insert(in.source.substr(0, slash));
  }
  return {producers.begin(), producers.end()};
}

bool WorkflowStep::operator==(const WorkflowStep& other) const {
  if (id != other.id || in != other.in || out != other.out) return false;
  if (!run || !other.run) return run == other.run;
  return *run == *other.run;
}

const WorkflowStep* WorkflowDescription::find_step(std::string_view id) const {
  for (const auto& s : steps)
    if (s.id == id) return &s;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class ScalarKind { kNull, kBool, kInt, kFloat, kString };

ScalarKind classify(const YAML::Node& n) {
  if (n.IsNull()) return ScalarKind::kNull;
  // Quoted scalars carry the non-specific "!" tag and are always strings.
  if (n.Tag() == "!") return ScalarKind::kString;
  static const std::regex kBool("true|True|TRUE|false|False|FALSE");
  static const std::regex kInt("[-+]?[0-9]+|0x[0-9a-fA-F]+");
  static const std::regex kFloat(
      "[-+]?([0-9]+\\.[0-9]*|\\.[0-9]+|[0-9]+)([eE][-+]?[0-9]+)?|"
      "[-+]?\\.(inf|Inf|INF)|\\.(nan|NaN|NAN)");
  const std::string& s = n.Scalar();
  if (std::regex_match(s, kBool)) return ScalarKind::kBool;
  if (std::regex_match(s, kInt)) return ScalarKind::kInt;
  if (std::regex_match(s, kFloat)) return ScalarKind::kFloat;
  return ScalarKind::kString;
}

const std::set<std::string, std::less<>>& unsupported_requirement_classes() {
  static const std::set<std::string, std::less<>> classes = {
      "InlineJavascriptRequirement",   "SchemaDefRequirement",
      "DockerRequirement",             "InitialWorkDirRequirement",
      "EnvVarRequirement",             "ShellCommandRequirement",
      "ResourceRequirement",           "ScatterFeatureRequirement",
      "SubworkflowFeatureRequirement", "MultipleInputFeatureRequirement",
      "StepInputExpressionRequirement", "LoadListingRequirement",
      "WorkReuse",                     "NetworkAccess",
      "InplaceUpdateRequirement",      "ToolTimeLimit"};
  return classes;
}

/// Requirement class with any cwltool namespace prefix removed.
struct ClassName {
  std::string name;
  bool cwltool_ns = false;
};

class Parser {
 public:
  Parser(std::string source, fs::path base)
      : source_(std::move(source)), base_(std::move(base)) {}

  ParsedDocument parse_text(std::string_view text) {
    YAML::Node root;
    try {
      root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
      fail(e.mark.line + 1, "syntax error: " + e.msg);
    }
    if (!root.IsMap()) fail(root, "document must be a mapping");
    reject_imports(root);
    read_namespaces(root);

    std::string cls = scalar_field(root, "class");
    ParsedDocument out;
    if (cls == "CommandLineTool") {
      out.document = parse_tool(root);
    } else if (cls == "Workflow") {
      out.document = parse_workflow(root);
    } else if (cls.empty()) {
      fail(root, "missing 'class'");
    } else {
      fail(root["class"], "unknown class '" + cls + "'");
    }
    out.warnings = std::move(warnings_);
    return out;
  }

 private:
  [[noreturn]] void fail(int line, const std::string& message) const {
    throw ValidationError(source_, line, message);
  }
  [[noreturn]] void fail(const YAML::Node& n, const std::string& message) const {
    fail(line_of(n), message);
  }
  static int line_of(const YAML::Node& n) {
    if (!n.IsDefined()) return 0;
    const auto m = n.Mark();
    return m.is_null() ? 0 : m.line + 1;
  }
  void warn(const YAML::Node& n, const std::string& message) {
    warnings_.push_back({Severity::kWarning, source_, line_of(n), message});
  }

  void reject_imports(const YAML::Node& n) {
    if (n.IsMap()) {
      for (const auto& kv : n) {
        auto key = kv.first.as<std::string>();
        if (key == "$import" || key == "$include" || key == "$mixin")
          fail(kv.first, "unsupported feature: " + key);
        reject_imports(kv.second);
      }
    } else if (n.IsSequence()) {
      for (const auto& e : n) reject_imports(e);
    }
  }

  void read_namespaces(const YAML::Node& root) {
    auto ns = root["$namespaces"];
    if (!ns) return;
    if (!ns.IsMap()) fail(ns, "$namespaces must be a mapping");
    for (const auto& kv : ns) {
      if (!kv.second.IsScalar())
        fail(kv.second, "namespace URI must be a string");
      namespaces_[kv.first.as<std::string>()] = kv.second.as<std::string>();
    }
  }

  ClassName resolve_class(const YAML::Node& where, const std::string& raw) {
    const std::string uri(kCwltoolNamespace);
    if (raw.rfind(uri, 0) == 0) return {raw.substr(uri.size()), true};
    auto colon = raw.find(':');
    if (colon == std::string::npos) return {raw, false};
    std::string prefix = raw.substr(0, colon);
    auto it = namespaces_.find(prefix);
    if (it == namespaces_.end())
      fail(where, "undeclared namespace prefix '" + prefix + "' in '" + raw +
                      "'");
    ClassName cn{raw.substr(colon + 1), it->second == uri};
    if (!cn.cwltool_ns) cn.name = it->second + cn.name;
    return cn;
  }

  std::string scalar_field(const YAML::Node& map, const char* key) {
    auto n = map[key];
    if (!n) return {};
    if (!n.IsScalar()) fail(n, std::string("'") + key + "' must be a string");
    return n.as<std::string>();
  }

  std::string string_scalar(const YAML::Node& n, const std::string& what) {
    if (!n.IsScalar()) fail(n, what + " must be a string");
    return n.as<std::string>();
  }

  std::int64_t int_scalar(const YAML::Node& n, const std::string& what) {
    if (!n.IsScalar() || classify(n) != ScalarKind::kInt)
      fail(n, what + " must be an integer");
    return n.as<std::int64_t>();
  }

  void check_version(const YAML::Node& root) {
    auto v = root["cwlVersion"];
    if (!v) fail(root, "missing 'cwlVersion'");
    std::string s = string_scalar(v, "cwlVersion");
    if (s != "v1.0" && s != "v1.1" && s != "v1.2")
      fail(v, "unsupported cwlVersion '" + s + "'");
  }

  void check_top_keys(const YAML::Node& root,
                      const std::set<std::string, std::less<>>& known,
                      const std::set<std::string, std::less<>>& unsupported) {
    for (const auto& kv : root) {
      auto key = kv.first.as<std::string>();
      if (known.count(key)) continue;
      if (unsupported.count(key))
        fail(kv.first, "unsupported feature: '" + key + "'");
      warn(kv.first, "ignoring unknown key '" + key + "'");
    }
  }

  // -- values ---------------------------------------------------------------

  Value read_file(const YAML::Node& n, const std::string& what) {
    if (!n.IsMap() || !n["class"] || n["class"].as<std::string>() != "File")
      fail(n, what + ": expected a File record {class: File, path: ...}");
    std::string path;
    if (n["path"]) {
      path = string_scalar(n["path"], what + ".path");
    } else if (n["location"]) {
      path = string_scalar(n["location"], what + ".location");
      if (path.rfind("file://", 0) == 0) {
        path = path.substr(7);
      } else if (path.find("://") != std::string::npos) {
        fail(n["location"], what + ": remote locations are not supported");
      }
    } else {
      fail(n, what + ": File record needs 'path' or 'location'");
    }
    fs::path p(path);
    if (p.is_relative()) p = base_ / p;
    return File::at(p.lexically_normal().string());
  }

  Value read_value(const ParamType& type, const YAML::Node& n,
                   const std::string& what) {
    if (type.array) {
      if (!n.IsSequence()) fail(n, what + ": expected a list");
      ParamType item{type.base, false};
      Value::Array out;
      for (std::size_t i = 0; i < n.size(); ++i)
        out.push_back(read_value(item, n[i], what + "[" + std::to_string(i) + "]"));
      return out;
    }
    if (type.base == BaseType::kFile) return read_file(n, what);
    if (!n.IsScalar()) fail(n, what + ": expected " + type.str());
    ScalarKind k = classify(n);
    switch (type.base) {
      case BaseType::kString:
        if (k == ScalarKind::kString) return n.as<std::string>();
        break;
      case BaseType::kInt:
        if (k == ScalarKind::kInt) return n.as<std::int64_t>();
        break;
      case BaseType::kFloat:
        if (k == ScalarKind::kInt || k == ScalarKind::kFloat)
          return n.as<double>();
        break;
      case BaseType::kBoolean:
        if (k == ScalarKind::kBool) return n.as<bool>();
        break;
      case BaseType::kFile:
        break;
    }
    fail(n, what + ": expected " + type.str() + ", got '" + n.Scalar() + "'");
  }

 public:
  Value read_typed(const ParamType& type, const YAML::Node& n,
                   const std::string& what) {
    return read_value(type, n, what);
  }

 private:
  ParamType read_type(const YAML::Node& n, const std::string& what,
                      bool allow_stdout = false, bool* is_stdout = nullptr) {
    if (n.IsScalar()) {
      std::string s = n.as<std::string>();
      if (allow_stdout && s == "stdout") {
        *is_stdout = true;
        return ParamType{BaseType::kFile, false};
      }
      if (!s.empty() && s.back() == '?')
        fail(n, "unsupported feature: optional type '" + s + "' for " + what);
      auto t = ParamType::parse(s);
      if (!t) fail(n, "unsupported type '" + s + "' for " + what);
      return *t;
    }
    if (n.IsMap() && n["type"] && n["type"].IsScalar() &&
        n["type"].as<std::string>() == "array" && n["items"]) {
      for (const auto& kv : n) {
        auto key = kv.first.as<std::string>();
        if (key != "type" && key != "items")
          fail(kv.first, "unsupported feature: '" + key + "' in array type of " + what);
      }
      ParamType item = read_type(n["items"], what);
      if (item.array) fail(n, "nested arrays are not supported for " + what);
      item.array = true;
      return item;
    }
    fail(n, "unsupported type for " + what);
  }

  /// Map form {id: body} or list form [{id: ..., ...}] -> (id, body, key node).
  struct Entry {
    std::string id;
    YAML::Node body;
    YAML::Node key;
  };

  std::vector<Entry> entries(const YAML::Node& n, const std::string& what) {
    std::vector<Entry> out;
    if (!n || n.IsNull()) return out;
    if (n.IsMap()) {
      for (const auto& kv : n)
        out.push_back({kv.first.as<std::string>(), kv.second, kv.first});
    } else if (n.IsSequence()) {
      for (const auto& item : n) {
        if (!item.IsMap() || !item["id"])
          fail(item, what + " entries need an 'id'");
        out.push_back({string_scalar(item["id"], what + ".id"), item, item["id"]});
      }
    } else {
      fail(n, what + " must be a mapping or a list");
    }
    std::set<std::string> seen;
    for (const auto& e : out) {
      std::string id = e.id;
      if (!id.empty() && id[0] == '#') id = id.substr(1);
      if (id.empty()) fail(e.key, what + " id must be non-empty");
      if (!seen.insert(id).second)
        fail(e.key, "duplicate " + what + " id '" + id + "'");
    }
    for (auto& e : out)
      if (e.id[0] == '#') e.id = e.id.substr(1);
    return out;
  }

  InputParameter read_input(const Entry& e, bool allow_binding) {
    InputParameter p;
    p.id = e.id;
    const std::string what = "input '" + e.id + "'";
    if (e.body.IsScalar()) {
      p.type = read_type(e.body, what);
      return p;
    }
    if (!e.body.IsMap() || !e.body["type"])
      fail(e.body, what + " needs a 'type'");
    for (const auto& kv : e.body) {
      auto key = kv.first.as<std::string>();
      if (key == "id" || key == "type" || key == "default" || key == "label" ||
          key == "doc")
        continue;
      if (key == "inputBinding" && allow_binding) continue;
      fail(kv.first, "unsupported feature: '" + key + "' in " + what);
    }
    p.type = read_type(e.body["type"], what);
    if (auto d = e.body["default"]; d && !d.IsNull())
      p.default_value = read_value(p.type, d, what + " default");
    if (auto b = e.body["inputBinding"]; b) {
      if (!b.IsMap() && !b.IsNull())
        fail(b, what + ": inputBinding must be a mapping");
      InputBinding ib;
      if (b.IsMap()) {
        for (const auto& kv : b) {
          auto key = kv.first.as<std::string>();
          if (key != "position")
            fail(kv.first, "unsupported feature: inputBinding '" + key +
                               "' in " + what);
        }
        if (b["position"]) ib.position = int_scalar(b["position"], what + " position");
      }
      p.binding = ib;
    }
    return p;
  }

  std::vector<InputParameter> read_inputs(const YAML::Node& n,
                                          bool allow_binding) {
    std::vector<InputParameter> out;
    for (const auto& e : entries(n, "inputs"))
      out.push_back(read_input(e, allow_binding));
    return out;
  }

  void check_no_interpolation(const YAML::Node& n, const std::string& s,
                              const std::string& what) {
    if (s.find("$(") != std::string::npos || s.find("${") != std::string::npos)
      fail(n, "unsupported feature: expression in " + what);
  }

  std::vector<OutputParameter> read_outputs(const YAML::Node& n) {
    std::vector<OutputParameter> out;
    for (const auto& e : entries(n, "outputs")) {
      OutputParameter p;
      p.id = e.id;
      const std::string what = "output '" + e.id + "'";
      bool is_stdout = false;
      YAML::Node glob;
      if (e.body.IsScalar()) {
        read_type(e.body, what, true, &is_stdout);
        if (!is_stdout) fail(e.body, what + " needs an outputBinding glob");
        p.kind = OutputKind::kStdout;
        out.push_back(p);
        continue;
      }
      if (!e.body.IsMap() || !e.body["type"]) fail(e.body, what + " needs a 'type'");
      for (const auto& kv : e.body) {
        auto key = kv.first.as<std::string>();
        if (key == "id" || key == "type" || key == "outputBinding" ||
            key == "label" || key == "doc")
          continue;
        fail(kv.first, "unsupported feature: '" + key + "' in " + what);
      }
      ParamType t = read_type(e.body["type"], what, true, &is_stdout);
      if (auto ob = e.body["outputBinding"]; ob) {
        if (!ob.IsMap()) fail(ob, what + ": outputBinding must be a mapping");
        for (const auto& kv : ob) {
          auto key = kv.first.as<std::string>();
          if (key != "glob")
            fail(kv.first, "unsupported feature: outputBinding '" + key +
                               "' in " + what);
        }
        glob.reset(ob["glob"]);
      }
      const bool has_glob = glob.IsDefined() && !glob.IsNull();
      if (is_stdout) {
        if (has_glob) fail(glob, what + ": stdout outputs take no glob");
        p.kind = OutputKind::kStdout;
      } else {
        if (t.base != BaseType::kFile)
          fail(e.body["type"], "unsupported output type '" + t.str() +
                                   "' for " + what);
        p.kind = t.array ? OutputKind::kFileArray : OutputKind::kFile;
        if (!has_glob) fail(e.body, what + " needs an outputBinding glob");
        std::string g = string_scalar(glob, what + " glob");
        if (g.empty()) fail(glob, what + ": glob must be non-empty");
        check_no_interpolation(glob, g, what + " glob");
        p.glob = g;
      }
      out.push_back(p);
    }
    return out;
  }

  // -- requirements ---------------------------------------------------------

  MpiRequirementDecl read_mpi(const YAML::Node& body) {
    MpiRequirementDecl d;
    if (body.IsNull()) return d;
    for (const auto& kv : body) {
      auto key = kv.first.as<std::string>();
      if (key == "class") continue;
      if (key != "processes")
        fail(kv.first, "unknown field '" + key + "' in MPIRequirement");
    }
    auto p = body["processes"];
    if (!p) return d;
    if (!p.IsScalar()) fail(p, "MPIRequirement.processes must be int or string");
    switch (classify(p)) {
      case ScalarKind::kInt: {
        auto n = p.as<std::int64_t>();
        if (n < 0) fail(p, "MPIRequirement.processes must be >= 0");
        d.processes = n;
        break;
      }
      case ScalarKind::kString: {
        std::string s = p.as<std::string>();
        std::optional<ParamRef> ref;
        try {
          ref = parse_ref(s);
        } catch (const ExprError& e) {
          fail(p, std::string("MPIRequirement.processes: ") + e.what());
        }
        if (!ref)
          fail(p, "MPIRequirement.processes '" + s +
                      "' is neither an integer nor a parameter reference");
        d.processes = s;
        break;
      }
      default:
        fail(p, "MPIRequirement.processes must be int or string, got '" +
                    p.Scalar() + "'");
    }
    return d;
  }

  SoftwareRequirementDecl read_software(const YAML::Node& body) {
    SoftwareRequirementDecl d;
    for (const auto& kv : body) {
      auto key = kv.first.as<std::string>();
      if (key != "class" && key != "packages")
        fail(kv.first, "unknown field '" + key + "' in SoftwareRequirement");
    }
    auto pkgs = body["packages"];
    if (!pkgs) fail(body, "SoftwareRequirement needs 'packages'");
    auto read_versions = [&](const YAML::Node& v, SoftwarePackage& pkg) {
      if (!v) return;
      if (!v.IsSequence()) fail(v, "package version must be a list");
      for (const auto& s : v) pkg.versions.push_back(string_scalar(s, "version"));
    };
    if (pkgs.IsMap()) {
      for (const auto& kv : pkgs) {
        SoftwarePackage pkg;
        pkg.name = kv.first.as<std::string>();
        if (kv.second.IsMap()) {
          for (const auto& f : kv.second) {
            auto key = f.first.as<std::string>();
            if (key != "version" && key != "specs")
              fail(f.first, "unknown field '" + key + "' in package");
          }
          read_versions(kv.second["version"], pkg);
        } else if (kv.second.IsSequence()) {
          read_versions(kv.second, pkg);
        } else if (!kv.second.IsNull()) {
          fail(kv.second, "package '" + pkg.name + "' must be a mapping");
        }
        d.packages.push_back(pkg);
      }
    } else if (pkgs.IsSequence()) {
      for (const auto& item : pkgs) {
        if (!item.IsMap() || !item["package"])
          fail(item, "package entries need a 'package' name");
        for (const auto& f : item) {
          auto key = f.first.as<std::string>();
          if (key != "package" && key != "version" && key != "specs")
            fail(f.first, "unknown field '" + key + "' in package");
        }
        SoftwarePackage pkg;
        pkg.name = string_scalar(item["package"], "package");
        read_versions(item["version"], pkg);
        d.packages.push_back(pkg);
      }
    } else {
      fail(pkgs, "packages must be a mapping or a list");
    }
    std::set<std::string> seen;
    for (const auto& p : d.packages) {
      if (p.name.empty()) fail(pkgs, "package name must be non-empty");
      if (!seen.insert(p.name).second)
        fail(pkgs, "duplicate package '" + p.name + "'");
    }
    return d;
  }

  std::vector<Requirement> read_requirements(const YAML::Node& n,
                                             bool hints) {
    std::vector<Requirement> out;
    if (!n || n.IsNull()) return out;
    const std::string section = hints ? "hints" : "requirements";
    std::vector<std::pair<YAML::Node, YAML::Node>> items;  // (class node, body)
    if (n.IsMap()) {
      for (const auto& kv : n) items.emplace_back(kv.first, kv.second);
    } else if (n.IsSequence()) {
      for (const auto& item : n) {
        if (!item.IsMap() || !item["class"])
          fail(item, section + " entries need a 'class'");
        items.emplace_back(item["class"], item);
      }
    } else {
      fail(n, section + " must be a mapping or a list");
    }

    std::set<std::string> seen;
    for (const auto& [cls_node, body] : items) {
      std::string raw = string_scalar(cls_node, "requirement class");
      ClassName cn = resolve_class(cls_node, raw);
      if (!body.IsMap() && !body.IsNull())
        fail(body, raw + " must be a mapping");
      if (body.IsMap() && body["class"]) {
        std::string inner = string_scalar(body["class"], "class");
        ClassName icn = resolve_class(body["class"], inner);
        if (icn.name != cn.name || icn.cwltool_ns != cn.cwltool_ns)
          fail(body["class"], "class '" + inner + "' does not match '" + raw + "'");
      }
      Requirement r;
      if (cn.name == kMpiRequirement &&
          (cn.cwltool_ns || raw == kMpiRequirement)) {
        r.class_name = std::string(kMpiRequirement);
        r.body = read_mpi(body);
      } else if (cn.name == kSoftwareRequirement && !cn.cwltool_ns) {
        r.class_name = std::string(kSoftwareRequirement);
        if (body.IsNull()) fail(cls_node, "SoftwareRequirement needs 'packages'");
        r.body = read_software(body);
      } else {
        bool known = !cn.cwltool_ns &&
                     unsupported_requirement_classes().count(cn.name) > 0;
        std::string msg = known ? "unsupported feature: " + raw
                                : "unknown requirement class '" + raw + "'";
        if (hints) {
          warn(cls_node, msg + " in hints; ignored");
          continue;
        }
        fail(cls_node, msg);
      }
      if (!seen.insert(r.class_name).second)
        fail(cls_node, "duplicate " + r.class_name + " in " + section);
      out.push_back(std::move(r));
    }
    return out;
  }

  void check_refs_declared(const std::string& text, const YAML::Node& where,
                           const std::vector<InputParameter>& inputs,
                           const std::string& what) {
    std::optional<ParamRef> ref;
    try {
      ref = parse_ref(text);
    } catch (const ExprError& e) {
      fail(where, what + ": " + e.what());
    }
    if (!ref) return;
    bool declared = std::any_of(inputs.begin(), inputs.end(),
                                [&](const auto& p) { return p.id == ref->path[1]; });
    if (!declared)
      fail(where, what + " references undeclared input '" + ref->path[1] + "'");
  }

  void check_requirement_refs(const std::vector<Requirement>& reqs,
                              const YAML::Node& section,
                              const std::vector<InputParameter>& inputs) {
    for (const auto& r : reqs) {
      const auto* mpi = std::get_if<MpiRequirementDecl>(&r.body);
      if (!mpi || !mpi->processes) continue;
      if (const auto* s = std::get_if<std::string>(&*mpi->processes))
        check_refs_declared(*s, section, inputs, "MPIRequirement.processes");
    }
  }

  // -- CommandLineTool ------------------------------------------------------

  ToolDescription parse_tool(const YAML::Node& root) {
    check_version(root);
    check_top_keys(root,
                   {"cwlVersion", "class", "id", "label", "doc", "$namespaces",
                    "$schemas", "baseCommand", "arguments", "inputs", "outputs",
                    "requirements", "hints", "stdout"},
                   {"stdin", "stderr", "successCodes", "temporaryFailCodes",
                    "permanentFailCodes", "$graph", "intent"});

    ToolDescription t;
    t.source = source_;
    t.id = scalar_field(root, "id");
    t.cwl_version = scalar_field(root, "cwlVersion");

    if (auto bc = root["baseCommand"]; bc) {
      if (bc.IsScalar()) {
        t.base_command.push_back(bc.as<std::string>());
      } else if (bc.IsSequence()) {
        for (const auto& s : bc)
          t.base_command.push_back(string_scalar(s, "baseCommand item"));
      } else {
        fail(bc, "baseCommand must be a string or a list of strings");
      }
      for (const auto& s : t.base_command)
        check_no_interpolation(bc, s, "baseCommand");
    }

    t.inputs = read_inputs(root["inputs"], true);
    if (!root["inputs"]) fail(root, "missing 'inputs'");
    if (!root["outputs"]) fail(root, "missing 'outputs'");
    t.outputs = read_outputs(root["outputs"]);

    if (auto args = root["arguments"]; args) {
      if (!args.IsSequence()) fail(args, "arguments must be a list");
      for (const auto& a : args) {
        Argument arg;
        YAML::Node text_node = a;
        if (a.IsScalar()) {
          arg.value = a.as<std::string>();
        } else if (a.IsMap()) {
          for (const auto& kv : a) {
            auto key = kv.first.as<std::string>();
            if (key != "position" && key != "valueFrom")
              fail(kv.first, "unsupported feature: argument '" + key + "'");
          }
          if (!a["valueFrom"]) fail(a, "argument needs 'valueFrom'");
          text_node.reset(a["valueFrom"]);
          arg.value = string_scalar(text_node, "valueFrom");
          if (a["position"]) arg.position = int_scalar(a["position"], "argument position");
        } else {
          fail(a, "argument must be a string or a mapping");
        }
        if (arg.value.rfind("${", 0) == 0)
          fail(text_node, "unsupported feature: JavaScript expression in arguments");
        if (arg.value.rfind("$(", 0) == 0) {
          check_refs_declared(arg.value, text_node, t.inputs, "argument");
        } else {
          check_no_interpolation(text_node, arg.value, "arguments");
        }
        t.arguments.push_back(std::move(arg));
      }
    }
    if (t.base_command.empty() && t.arguments.empty())
      fail(root, "tool needs a baseCommand or arguments");

    t.requirements = read_requirements(root["requirements"], false);
    t.hints = read_requirements(root["hints"], true);
    int mpi_count = 0;
    for (const auto* list : {&t.requirements, &t.hints})
      for (const auto& r : *list)
        if (r.class_name == kMpiRequirement) ++mpi_count;
    if (mpi_count > 1)
      fail(root, "MPIRequirement given in both requirements and hints");
    check_requirement_refs(t.requirements, root["requirements"], t.inputs);
    check_requirement_refs(t.hints, root["hints"], t.inputs);

    if (auto so = root["stdout"]; so) {
      std::string s = string_scalar(so, "stdout");
      check_no_interpolation(so, s, "stdout");
      fs::path p(s);
      if (s.empty() || p.is_absolute() || s.find("..") != std::string::npos ||
          s.find('/') != std::string::npos)
        fail(so, "stdout must be a plain file name");
      t.stdout_file = s;
    }

    return t;
  }

  // -- Workflow -------------------------------------------------------------

  std::shared_ptr<const ToolDescription> load_run(const YAML::Node& run,
                                                  const std::string& step) {
    if (run.IsMap()) {
      Parser inner(source_, base_);
      inner.namespaces_ = namespaces_;
      if (!run["class"] || run["class"].as<std::string>() != "CommandLineTool")
        fail(run, "unsupported feature: step '" + step +
                      "' must run a CommandLineTool");
      auto tool = inner.parse_tool(run);
      for (auto& w : inner.warnings_) warnings_.push_back(std::move(w));
      return std::make_shared<const ToolDescription>(std::move(tool));
    }
    std::string rel = string_scalar(run, "step '" + step + "' run");
    if (rel.rfind("file://", 0) == 0) rel = rel.substr(7);
    if (rel.find("://") != std::string::npos)
      fail(run, "remote documents are not supported: " + rel);
    fs::path path = fs::path(rel).is_absolute() ? fs::path(rel) : base_ / rel;
    std::ifstream in(path);
    if (!in) fail(run, "cannot read '" + path.string() + "' for step '" + step + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    Parser inner(path.string(), path.parent_path());
    ParsedDocument nested = inner.parse_text(buf.str());
    for (auto& w : nested.warnings) warnings_.push_back(std::move(w));
    auto* tool = std::get_if<ToolDescription>(&nested.document);
    if (!tool)
      fail(run, "unsupported feature: step '" + step +
                    "' runs a nested Workflow");
    return std::make_shared<const ToolDescription>(std::move(*tool));
  }

  WorkflowDescription parse_workflow(const YAML::Node& root) {
    check_version(root);
    check_top_keys(root,
                   {"cwlVersion", "class", "id", "label", "doc", "$namespaces",
                    "$schemas", "inputs", "outputs", "steps", "requirements",
                    "hints"},
                   {"$graph", "intent"});
    WorkflowDescription wf;
    wf.source = source_;
    wf.id = scalar_field(root, "id");
    wf.cwl_version = scalar_field(root, "cwlVersion");
    if (!root["inputs"]) fail(root, "missing 'inputs'");
    if (!root["outputs"]) fail(root, "missing 'outputs'");
    if (!root["steps"]) fail(root, "missing 'steps'");
    wf.inputs = read_inputs(root["inputs"], false);
    wf.requirements = read_requirements(root["requirements"], false);
    wf.hints = read_requirements(root["hints"], true);
    for (const auto* list : {&wf.requirements, &wf.hints})
      for (const auto& r : *list)
        if (r.class_name == kMpiRequirement)
          fail(root, "unsupported feature: MPIRequirement must be declared on "
                     "the tool, not the workflow");

    std::map<std::string, YAML::Node> step_nodes;
    for (const auto& e : entries(root["steps"], "steps")) {
      WorkflowStep step;
      step.id = e.id;
      if (step.id.find('/') != std::string::npos)
        fail(e.key, "step id '" + step.id + "' must not contain '/'");
      if (!e.body.IsMap()) fail(e.body, "step '" + e.id + "' must be a mapping");
      for (const auto& kv : e.body) {
        auto key = kv.first.as<std::string>();
        if (key == "id" || key == "run" || key == "in" || key == "out" ||
            key == "label" || key == "doc")
          continue;
        fail(kv.first, "unsupported feature: '" + key + "' in step '" + e.id + "'");
      }
      if (!e.body["run"]) fail(e.body, "step '" + e.id + "' needs 'run'");
      step.run = load_run(e.body["run"], e.id);

      for (const auto& in : entries(e.body["in"], "step '" + e.id + "' in")) {
        StepInput si;
        si.id = in.id;
        YAML::Node src = in.body;
        if (in.body.IsMap()) {
          for (const auto& kv : in.body) {
            auto key = kv.first.as<std::string>();
            if (key != "id" && key != "source")
              fail(kv.first, "unsupported feature: '" + key + "' in step input");
          }
          src.reset(in.body["source"]);
          if (!src) fail(in.body, "step input '" + in.id + "' needs a source");
        }
        if (src.IsSequence())
          fail(src, "unsupported feature: multiple sources for '" + in.id + "'");
        si.source = string_scalar(src, "source");
        if (!si.source.empty() && si.source[0] == '#') si.source = si.source.substr(1);
        if (!step.run->find_input(si.id))
          fail(in.key, "step '" + e.id + "' wires undeclared tool input '" +
                           si.id + "'");
        step.in.push_back(si);
      }
      if (auto out = e.body["out"]; out) {
        if (!out.IsSequence()) fail(out, "step out must be a list");
        for (const auto& o : out) {
          std::string id = o.IsMap() ? string_scalar(o["id"], "out id")
                                     : string_scalar(o, "out id");
          if (!step.run->find_output(id))
            fail(o, "step '" + e.id + "' lists undeclared tool output '" + id + "'");
          step.out.push_back(id);
        }
      }
      for (const auto& p : step.run->inputs) {
        bool wired = std::any_of(step.in.begin(), step.in.end(),
                                 [&](const auto& si) { return si.id == p.id; });
        if (!wired && !p.default_value)
          fail(e.body, "step '" + e.id + "': input '" + p.id +
                           "' is not connected and has no default");
      }
      step_nodes[step.id] = e.body;
      wf.steps.push_back(std::move(step));
    }

    auto resolve_source = [&](const std::string& src, const YAML::Node& where) {
      auto slash = src.find('/');
      if (slash == std::string::npos) {
        bool ok = std::any_of(wf.inputs.begin(), wf.inputs.end(),
                              [&](const auto& p) { return p.id == src; });
        if (!ok) fail(where, "dangling reference '" + src + "'");
        return;
      }
      const WorkflowStep* producer = wf.find_step(src.substr(0, slash));
      std::string out = src.substr(slash + 1);
      if (!producer ||
          std::find(producer->out.begin(), producer->out.end(), out) ==
              producer->out.end())
        fail(where, "dangling reference '" + src + "'");
    };

    for (const auto& step : wf.steps)
      for (const auto& si : step.in) resolve_source(si.source, step_nodes[step.id]);

    for (const auto& e : entries(root["outputs"], "outputs")) {
      WorkflowOutput o;
      o.id = e.id;
      if (!e.body.IsMap() || !e.body["outputSource"] || !e.body["type"])
        fail(e.body, "workflow output '" + e.id + "' needs type and outputSource");
      for (const auto& kv : e.body) {
        auto key = kv.first.as<std::string>();
        if (key != "id" && key != "type" && key != "outputSource" &&
            key != "label" && key != "doc")
          fail(kv.first, "unsupported feature: '" + key + "' in workflow output");
      }
      o.type = read_type(e.body["type"], "workflow output '" + e.id + "'");
      if (e.body["outputSource"].IsSequence())
        fail(e.body["outputSource"], "unsupported feature: multiple output sources");
      o.output_source = string_scalar(e.body["outputSource"], "outputSource");
      if (!o.output_source.empty() && o.output_source[0] == '#')
        o.output_source = o.output_source.substr(1);
      resolve_source(o.output_source, e.body["outputSource"]);
      wf.outputs.push_back(o);
    }

    check_acyclic(wf, step_nodes);
    return wf;
  }

  void check_acyclic(const WorkflowDescription& wf,
                     std::map<std::string, YAML::Node>& nodes) {
    // Depth-first search; state 1 = on stack, 2 = done.
    std::map<std::string, int> state;
    std::function<void(const WorkflowStep&)> visit = [&](const WorkflowStep& s) {
      state[s.id] = 1;
      for (const auto& up : s.upstream()) {
        if (state[up] == 1)
          fail(nodes[s.id], "cycle between steps '" + up + "' and '" + s.id + "'");
        if (state[up] == 0) visit(*wf.find_step(up));
      }
      state[s.id] = 2;
    };
    for (const auto& s : wf.steps)
      if (state[s.id] == 0) visit(s);
  }

  std::string source_;
  fs::path base_;
  std::map<std::string, std::string> namespaces_;
  std::vector<Diagnostic> warnings_;
};

}  // namespace

ParsedDocument parse_document(std::string_view text, const fs::path& base_path,
                              const std::string& source_name) {
  Parser parser(source_name, base_path);
  return parser.parse_text(text);
}

ParsedDocument load_document(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path.string(), 0, "cannot read document");
  std::stringstream buf;
  buf << in.rdbuf();
  fs::path abs = fs::absolute(path);
  return parse_document(buf.str(), abs.parent_path(), path.string());
}

std::optional<EffectiveRequirement> effective_requirement(
    const ToolDescription& doc, std::string_view class_name) {
  auto colon = class_name.rfind(':');
  if (colon != std::string_view::npos) class_name = class_name.substr(colon + 1);
  auto hash = class_name.rfind('#');
  if (hash != std::string_view::npos) class_name = class_name.substr(hash + 1);
  for (const auto& r : doc.requirements)
    if (r.class_name == class_name) return EffectiveRequirement{r, false};
  for (const auto& r : doc.hints)
    if (r.class_name == class_name) return EffectiveRequirement{r, true};
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

nlohmann::json requirement_json(const Requirement& r) {
  nlohmann::json j;
  if (const auto* mpi = std::get_if<MpiRequirementDecl>(&r.body)) {
    j["class"] = "cwltool:MPIRequirement";
    if (mpi->processes) {
      std::visit([&](const auto& v) { j["processes"] = v; }, *mpi->processes);
    }
  } else {
    const auto& sw = std::get<SoftwareRequirementDecl>(r.body);
    j["class"] = "SoftwareRequirement";
    auto pkgs = nlohmann::json::array();
    for (const auto& p : sw.packages) {
      nlohmann::json pj = {{"package", p.name}};
      if (!p.versions.empty()) pj["version"] = p.versions;
      pkgs.push_back(pj);
    }
    j["packages"] = pkgs;
  }
  return j;
}

}  // namespace

std::string serialize(const ToolDescription& tool) {
  nlohmann::ordered_json j;
  j["cwlVersion"] = tool.cwl_version;
  j["class"] = "CommandLineTool";
  if (!tool.id.empty()) j["id"] = tool.id;
  j["$namespaces"] = {{"cwltool", std::string(kCwltoolNamespace)}};
  if (!tool.base_command.empty()) j["baseCommand"] = tool.base_command;
  if (!tool.arguments.empty()) {
    auto args = nlohmann::json::array();
    for (const auto& a : tool.arguments)
      args.push_back({{"position", a.position}, {"valueFrom", a.value}});
    j["arguments"] = args;
  }
  auto inputs = nlohmann::json::array();
  for (const auto& in : tool.inputs) {
    nlohmann::json ij = {{"id", in.id}, {"type", in.type.str()}};
    if (in.default_value) ij["default"] = to_json(*in.default_value);
    if (in.binding) ij["inputBinding"] = {{"position", in.binding->position}};
    inputs.push_back(ij);
  }
  j["inputs"] = inputs;
  auto outputs = nlohmann::json::array();
  for (const auto& out : tool.outputs) {
    nlohmann::json oj = {{"id", out.id}};
    switch (out.kind) {
      case OutputKind::kStdout:
        oj["type"] = "stdout";
        break;
      case OutputKind::kFile:
        oj["type"] = "File";
        break;
      case OutputKind::kFileArray:
        oj["type"] = "File[]";
        break;
    }
    if (out.glob) oj["outputBinding"] = {{"glob", *out.glob}};
    outputs.push_back(oj);
  }
  j["outputs"] = outputs;
  auto reqs = [](const std::vector<Requirement>& list) {
    auto arr = nlohmann::json::array();
    for (const auto& r : list) arr.push_back(requirement_json(r));
    return arr;
  };
  if (!tool.requirements.empty()) j["requirements"] = reqs(tool.requirements);
  if (!tool.hints.empty()) j["hints"] = reqs(tool.hints);
  if (tool.stdout_file) j["stdout"] = *tool.stdout_file;
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Job orders

JobOrder resolve_job(const std::vector<InputParameter>& inputs,
                     const JobOrder& job, const std::string& source) {
  JobOrder out;
  for (const auto& p : inputs) {
    auto it = job.find(p.id);
    if (it == job.end()) {
      if (!p.default_value)
        throw ValidationError(source, 0, "missing required input '" + p.id + "'");
      out[p.id] = *p.default_value;
      continue;
    }
    auto v = conform(p.type, it->second);
    if (!v)
      throw ValidationError(source, 0, "input '" + p.id + "' expects " +
                                           p.type.str() + ", got " +
                                           it->second.kind());
    out[p.id] = std::move(*v);
  }
  for (const auto& [id, v] : job) {
    bool declared = std::any_of(inputs.begin(), inputs.end(),
                                [&](const auto& p) { return p.id == id; });
    if (!declared) log::warn(source, 0, "ignoring undeclared input '" + id + "'");
  }
  return out;
}

JobOrder parse_job_order(std::string_view text,
                         const std::vector<InputParameter>& inputs,
                         const fs::path& base_dir,
                         const std::string& source_name) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ValidationError(source_name, e.mark.line + 1, "syntax error: " + e.msg);
  }
  JobOrder job;
  if (root.IsNull()) return job;
  if (!root.IsMap())
    throw ValidationError(source_name, 1, "job order must be a mapping");
  Parser parser(source_name, base_dir);
  for (const auto& kv : root) {
    auto key = kv.first.as<std::string>();
    auto it = std::find_if(inputs.begin(), inputs.end(),
                           [&](const auto& p) { return p.id == key; });
    if (it == inputs.end()) {
      log::warn(source_name, kv.first.Mark().line + 1,
                "ignoring undeclared input '" + key + "'");
      continue;
    }
    job[key] = parser.read_typed(it->type, kv.second, "input '" + key + "'");
  }
  return job;
}

Value coerce_input(const InputParameter& param, const std::string& text) {
  if (param.type.array)
    throw ValidationError("", 0, "--input cannot set array input '" + param.id + "'");
  switch (param.type.base) {
    case BaseType::kString:
      return text;
    case BaseType::kFile:
      return File::at(fs::absolute(text).lexically_normal().string());
    default:
      break;
  }
  YAML::Node n = YAML::Load(text);
  Parser parser("--input", fs::current_path());
  return parser.read_typed(param.type, n, "input '" + param.id + "'");
}

}  // namespace cwlmpi
