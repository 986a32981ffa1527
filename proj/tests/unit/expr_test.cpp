/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "cwlmpi/expr.hpp"

#include <gtest/gtest.h>

namespace cwlmpi {
namespace {

TEST(ParseRef, InputsReference) {
  auto ref = parse_ref("$(inputs.nproc)");
  ASSERT_TRUE(ref.has_value());
  EXPECT_EQ(ref->path, (std::vector<std::string>{"inputs", "nproc"}));
  EXPECT_EQ(ref->str(), "$(inputs.nproc)");
}

TEST(ParseRef, LiteralIsNotAReference) {
  EXPECT_FALSE(parse_ref("literal text").has_value());
  EXPECT_FALSE(parse_ref("").has_value());
}

TEST(ParseRef, RejectsOtherRoots) {
  EXPECT_THROW(parse_ref("$(runtime.cores)"), ExprError);
  EXPECT_THROW(parse_ref("$(mpi.run(\"echo\"))"), ExprError);
}

TEST(ParseRef, RejectsMalformed) {
  EXPECT_THROW(parse_ref("$(inputs.nproc"), ExprError);
  EXPECT_THROW(parse_ref("$(inputs..nproc)"), ExprError);
  EXPECT_THROW(parse_ref("$(inputs.)"), ExprError);
  EXPECT_THROW(parse_ref("$()"), ExprError);
  EXPECT_THROW(parse_ref("$(inputs)"), ExprError);
  EXPECT_THROW(parse_ref("$(inputs.a) tail"), ExprError);
  EXPECT_THROW(parse_ref("$(inputs.a-b)"), ExprError);
}

TEST(Evaluate, ReturnsReferencedValue) {
  EXPECT_EQ(evaluate(*parse_ref("$(inputs.nproc)"), {{"nproc", 4}}), Value(4));
  EXPECT_EQ(evaluate(*parse_ref("$(inputs.msg)"), {{"msg", "Hello world"}}),
            Value("Hello world"));
}

TEST(Evaluate, UndefinedInput) {
  EXPECT_THROW(evaluate(*parse_ref("$(inputs.missing)"), {}), ExprError);
}

TEST(Evaluate, FileFieldsAndNonRecords) {
  File f = File::at("/data/pdg.nc");
  JobOrder job{{"pdg", f}, {"n", 3}};
  EXPECT_EQ(evaluate(*parse_ref("$(inputs.pdg.basename)"), job), Value("pdg.nc"));
  EXPECT_EQ(evaluate(*parse_ref("$(inputs.pdg.nameroot)"), job), Value("pdg"));
  EXPECT_EQ(evaluate(*parse_ref("$(inputs.pdg.path)"), job), Value("/data/pdg.nc"));
  EXPECT_THROW(evaluate(*parse_ref("$(inputs.n.value)"), job), ExprError);
  EXPECT_THROW(evaluate(*parse_ref("$(inputs.pdg.nonsense)"), job), ExprError);
}

TEST(Evaluate, IsPure) {
  JobOrder job{{"nproc", 4}};
  JobOrder copy = job;
  auto ref = *parse_ref("$(inputs.nproc)");
  EXPECT_EQ(evaluate(ref, job), evaluate(ref, job));
  EXPECT_EQ(job, copy);
}

TEST(ResolveProcesses, LiteralPassesThrough) {
  for (std::int64_t n : {0, 1, 2, 56, 112, 100000}) {
    MpiRequirementDecl d{n};
    EXPECT_EQ(resolve_processes(d, {}), n);
  }
}

TEST(ResolveProcesses, ReferenceFromJob) {
  MpiRequirementDecl d{std::string("$(inputs.nproc)")};
  EXPECT_EQ(resolve_processes(d, {{"nproc", 56}}), 56);
}

TEST(ResolveProcesses, NegativeIsAnError) {
  MpiRequirementDecl d{std::string("$(inputs.nproc)")};
  EXPECT_THROW(resolve_processes(d, {{"nproc", -1}}), ExprError);
  EXPECT_THROW(resolve_processes(MpiRequirementDecl{std::int64_t{-3}}, {}), ExprError);
}

TEST(ResolveProcesses, TypeConfusionIsAnError) {
  MpiRequirementDecl d{std::string("$(inputs.nproc)")};
  EXPECT_THROW(resolve_processes(d, {{"nproc", true}}), ExprError);
  EXPECT_THROW(resolve_processes(d, {{"nproc", 2.0}}), ExprError);
  EXPECT_THROW(resolve_processes(d, {{"nproc", "2"}}), ExprError);
}

TEST(ResolveProcesses, AbsentUsesDefault) {
  EXPECT_EQ(resolve_processes(MpiRequirementDecl{}, {}, 8), 8);
}

}  // namespace
}  // namespace cwlmpi
