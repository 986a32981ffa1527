/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

// Tool and workflow documents: the supported CWL subset plus the
// cwltool MPIRequirement extension.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cwlmpi/diagnostics.hpp"
#include "cwlmpi/value.hpp"

namespace cwlmpi {

inline constexpr std::string_view kCwltoolNamespace =
    "http://commonwl.org/cwltool#";
inline constexpr std::string_view kMpiRequirement = "MPIRequirement";
inline constexpr std::string_view kSoftwareRequirement = "SoftwareRequirement";

enum class BaseType { kString, kInt, kFloat, kBoolean, kFile };

struct ParamType {
  BaseType base = BaseType::kString;
  bool array = false;

  /// Accepts "int", "File[]" and the like; nullopt for anything else.
  static std::optional<ParamType> parse(std::string_view text);
  std::string str() const;

  bool operator==(const ParamType&) const = default;
};

struct InputBinding {
  std::int64_t position = 0;
  bool operator==(const InputBinding&) const = default;
};

struct InputParameter {
  std::string id;
  ParamType type;
  std::optional<Value> default_value;
  std::optional<InputBinding> binding;

  bool operator==(const InputParameter&) const = default;
};

/// Entry of `arguments`: a literal, or a parameter reference evaluated at
/// bind time.
struct Argument {
  std::int64_t position = 0;
  std::string value;

  bool operator==(const Argument&) const = default;
};

enum class OutputKind { kFile, kFileArray, kStdout };

struct OutputParameter {
  std::string id;
  OutputKind kind = OutputKind::kFile;
  std::optional<std::string> glob;

  bool operator==(const OutputParameter&) const = default;
};

/// `processes` is either an integer literal or a "$(inputs.x)" reference.
/// Absent means "use the platform default_nproc".
struct MpiRequirementDecl {
  using Processes = std::variant<std::int64_t, std::string>;
  std::optional<Processes> processes;

  bool operator==(const MpiRequirementDecl&) const = default;
};

struct SoftwarePackage {
  std::string name;
  std::vector<std::string> versions;

  bool operator==(const SoftwarePackage&) const = default;
};

struct SoftwareRequirementDecl {
  std::vector<SoftwarePackage> packages;

  bool operator==(const SoftwareRequirementDecl&) const = default;
};

struct Requirement {
  using Body = std::variant<MpiRequirementDecl, SoftwareRequirementDecl>;

  /// Canonical class name: kMpiRequirement or kSoftwareRequirement.
  std::string class_name;
  Body body;

  bool operator==(const Requirement&) const = default;
};

struct ToolDescription {
  std::string source;  // file the tool came from, for diagnostics
  std::string id;
  std::string cwl_version;
  std::vector<std::string> base_command;
  std::vector<Argument> arguments;
  std::vector<InputParameter> inputs;
  std::vector<OutputParameter> outputs;
  std::vector<Requirement> requirements;
  std::vector<Requirement> hints;
  std::optional<std::string> stdout_file;

  const InputParameter* find_input(std::string_view id) const;
  const OutputParameter* find_output(std::string_view id) const;

  bool operator==(const ToolDescription&) const = default;
};

struct WorkflowOutput {
  std::string id;
  ParamType type;
  std::string output_source;  // "step/out" or a workflow input id

  bool operator==(const WorkflowOutput&) const = default;
};

struct StepInput {
  std::string id;      // tool input id
  std::string source;  // workflow input id or "step/out"

  bool operator==(const StepInput&) const = default;
};

struct WorkflowStep {
  std::string id;
  std::shared_ptr<const ToolDescription> run;
  std::vector<StepInput> in;
  std::vector<std::string> out;

  /// Producer step ids this step reads from, sorted and unique.
  std::vector<std::string> upstream() const;

  bool operator==(const WorkflowStep& other) const;
};

struct WorkflowDescription {
  std::string source;
  std::string id;
  std::string cwl_version;
  std::vector<InputParameter> inputs;
  std::vector<WorkflowOutput> outputs;
  std::vector<WorkflowStep> steps;
  std::vector<Requirement> requirements;
  std::vector<Requirement> hints;

  const WorkflowStep* find_step(std::string_view id) const;

  bool operator==(const WorkflowDescription&) const = default;
};

using Document = std::variant<ToolDescription, WorkflowDescription>;

struct ParsedDocument {
  Document document;
  std::vector<Diagnostic> warnings;
};

/// Parses and validates YAML or JSON text. Relative `run` paths and File
/// defaults resolve against `base_path`. Throws ValidationError.
ParsedDocument parse_document(std::string_view text,
                              const std::filesystem::path& base_path,
                              const std::string& source_name = "<input>");

/// Reads `path` and parses it with its parent directory as base path.
ParsedDocument load_document(const std::filesystem::path& path);

struct EffectiveRequirement {
  Requirement requirement;
  bool optional = false;  // true when it came from `hints`
};

/// `requirements` entry if present, else `hints` entry, else nullopt.
/// Namespaced spellings such as "cwltool:MPIRequirement" are accepted.
std::optional<EffectiveRequirement> effective_requirement(
    const ToolDescription& doc, std::string_view class_name);

/// JSON text in the supported subset; parse_document(serialize(t)) == t.
std::string serialize(const ToolDescription& tool);

/// Fills defaults and type-checks against `inputs`. Ints widen to float.
/// Throws ValidationError on a missing or mistyped value.
JobOrder resolve_job(const std::vector<InputParameter>& inputs,
                     const JobOrder& job, const std::string& source = "");

/// Parses a YAML/JSON job order, typing each value by its declared input.
/// Relative File paths resolve against `base_dir`.
JobOrder parse_job_order(std::string_view text,
                         const std::vector<InputParameter>& inputs,
                         const std::filesystem::path& base_dir,
                         const std::string& source_name = "<job>");

/// Converts a `key=value` command-line string to the declared type.
Value coerce_input(const InputParameter& param, const std::string& text);

/// Type-checks `v` against `type`; returns the conformed value (ints
/// widened for float) or nullopt.
std::optional<Value> conform(const ParamType& type, const Value& v);

}  // namespace cwlmpi
