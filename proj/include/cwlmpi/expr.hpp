/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cwlmpi/cwl_model.hpp"
#include "cwlmpi/value.hpp"

namespace cwlmpi {

/// Raised for malformed references and failed evaluations.
class ExprError : public Error {
 public:
  using Error::Error;
};

/// A parameter reference "$(inputs.a.b)". Only the `inputs` root exists;
/// there is no JavaScript.
struct ParamRef {
  std::vector<std::string> path;  // path[0] == "inputs"

  std::string str() const;
  bool operator==(const ParamRef&) const = default;
};

/// nullopt when `text` is not a reference at all (does not start with
/// "$("). Throws ExprError when it starts like one but is malformed.
std::optional<ParamRef> parse_ref(std::string_view text);

/// Looks the reference up in `job`. File records expose path, basename,
/// nameroot, nameext and size.
Value evaluate(const ParamRef& ref, const JobOrder& job);

/// Integer literal passes through; a reference is evaluated and must yield
/// an integer >= 0. Booleans are not integers. An absent `processes`
/// yields `default_nproc`.
std::int64_t resolve_processes(const MpiRequirementDecl& decl,
                               const JobOrder& job,
                               std::int64_t default_nproc = 1);

}  // namespace cwlmpi
