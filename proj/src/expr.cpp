/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "cwlmpi/expr.hpp"

#include <cctype>
#include <filesystem>

namespace cwlmpi {
namespace {

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_'))
    return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
      return false;
  }
  return true;
}

Value file_field(const File& f, const std::string& field,
                 const std::string& where) {
  std::filesystem::path p(f.basename);
  if (field == "path") return f.path;
  if (field == "basename") return f.basename;
  if (field == "nameroot") return p.stem().string();
  if (field == "nameext") return p.extension().string();
  if (field == "size" && f.size) return static_cast<std::int64_t>(*f.size);
  throw ExprError("no field '" + field + "' on File " + where);
}

}  // namespace

std::string ParamRef::str() const {
  std::string out = "$(";
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += '.';
    out += path[i];
  }
  return out + ")";
}

std::optional<ParamRef> parse_ref(std::string_view text) {
  if (text.substr(0, 2) != "$(") return std::nullopt;
  int depth = 0;
  std::size_t close = std::string_view::npos;
  for (std::size_t i = 1; i < text.size(); ++i) {
    if (text[i] == '(') {
      ++depth;
    } else if (text[i] == ')') {
      if (--depth == 0) {
        close = i;
        break;
      }
    }
  }
  if (close == std::string_view::npos)
    throw ExprError("unbalanced parentheses in '" + std::string(text) + "'");
  if (close != text.size() - 1)
    throw ExprError("trailing text after reference in '" + std::string(text) +
                    "'");

  std::string_view body = text.substr(2, close - 2);
  ParamRef ref;
  std::size_t start = 0;
  while (true) {
    std::size_t dot = body.find('.', start);
    std::string_view seg = body.substr(
        start, dot == std::string_view::npos ? body.size() - start
                                             : dot - start);
    if (seg.empty())
      throw ExprError("empty segment in '" + std::string(text) + "'");
    if (!is_identifier(seg))
      throw ExprError("invalid segment '" + std::string(seg) + "' in '" +
                      std::string(text) + "'");
    ref.path.emplace_back(seg);
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  if (ref.path.front() != "inputs")
    throw ExprError("unsupported root '" + ref.path.front() + "' in '" +
                    std::string(text) + "' (only 'inputs' is available)");
  if (ref.path.size() < 2)
    throw ExprError("reference '" + std::string(text) +
                    "' must name an input");
  return ref;
}

Value evaluate(const ParamRef& ref, const JobOrder& job) {
  auto it = job.find(ref.path.at(1));
  if (it == job.end())
    throw ExprError("undefined input '" + ref.path[1] + "' in " + ref.str());
  Value current = it->second;
  for (std::size_t i = 2; i < ref.path.size(); ++i) {
    if (!current.is<File>())
      throw ExprError("cannot take '" + ref.path[i] + "' of " +
                      current.kind() + " value in " + ref.str());
    current = file_field(current.as<File>(), ref.path[i], ref.str());
  }
  return current;
}

std::int64_t resolve_processes(const MpiRequirementDecl& decl,
                               const JobOrder& job,
                               std::int64_t default_nproc) {
  if (!decl.processes) return default_nproc;
  std::int64_t n = 0;
  if (const auto* literal = std::get_if<std::int64_t>(&*decl.processes)) {
    n = *literal;
  } else {
    const auto& text = std::get<std::string>(*decl.processes);
    auto ref = parse_ref(text);
    if (!ref) throw ExprError("processes '" + text + "' is not a reference");
    Value v = evaluate(*ref, job);
    if (!v.is<std::int64_t>())
      throw ExprError("processes " + text + " evaluated to " + v.kind() +
                      ", expected int");
    n = v.as<std::int64_t>();
  }
  if (n < 0)
    throw ExprError("processes must be >= 0, got " + std::to_string(n));
  return n;
}

}  // namespace cwlmpi
