/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "cwlmpi/workflow_engine.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "cwlmpi/mock_mpi.hpp"
#include "test_support.hpp"

namespace cwlmpi {
namespace {
using namespace cwlmpi::testing;
namespace fs = std::filesystem;
using Argv = std::vector<std::string>;

WorkflowDescription forecast() {
  return std::get<WorkflowDescription>(load_document(fixture("forecast-workflow.cwl")).document);
}

JobOrder forecast_job(const WorkflowDescription& wf) {
  return parse_job_order(read_file(fixture("forecast-job.yml")), wf.inputs, fixture(""));
}

RunOptions options_in(const TempDir& dir) {
  RunOptions o;
  o.outdir = dir.path();
  o.host_env = test_env();
  return o;
}

const StepRecord& step_named(const WorkflowRun& run, const std::string& id) {
  for (const auto& s : run.steps)
    if (s.id == id) return s;
  throw std::runtime_error("no step " + id);
}

TEST(Plan, ForecastShape) {
  EXPECT_EQ(plan(forecast()), (Schedule{{"prep"}, {"simulate"}, {"postprocess"}}));
}

TEST(Plan, IndependentStepsShareAReadySet) {
  StepGraph g{{"b", "a"}, {}};
  EXPECT_EQ(plan(g), (Schedule{{"a", "b"}}));
}

TEST(Plan, EmptyWorkflow) { EXPECT_TRUE(plan(StepGraph{}).empty()); }

TEST(Plan, DefensiveErrors) {
  EXPECT_THROW(plan(StepGraph{{"a", "b"}, {{"a", "b"}, {"b", "a"}}}), ValidationError);
  EXPECT_THROW(plan(StepGraph{{"a"}, {{"a", "ghost"}}}), ValidationError);
}

TEST(StepGraphFrom, EdgesFromSources) {
  StepGraph g = StepGraph::from(forecast());
  std::set<std::pair<std::string, std::string>> edges(g.edges.begin(), g.edges.end());
  EXPECT_EQ(edges, (std::set<std::pair<std::string, std::string>>{
                       {"prep", "simulate"}, {"simulate", "postprocess"}}));
  EXPECT_EQ(g.nodes.size(), 3u);
}

// Brute-force transitive closure by DFS from every node.
std::vector<std::vector<bool>> reachability(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (int s = 0; s < n; ++s) {
    std::vector<int> stack{s};
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (const auto& [a, b] : edges)
        if (a == u && !reach[s][b]) {
          reach[s][b] = true;
          stack.push_back(b);
        }
    }
  }
  return reach;
}

TEST(PlanProperty, RandomDagsAgainstReachabilityOracle) {
  std::mt19937_64 rng(0xda6);
  std::uniform_int_distribution<int> size(0, 8);
  std::uniform_real_distribution<double> density(0.0, 0.6);
  for (int c = 0; c < 1000; ++c) {
    int n = size(rng);
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    double p = density(rng);
    std::bernoulli_distribution edge(p);
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (edge(rng)) edges.emplace_back(order[i], order[j]);

    StepGraph g;
    auto name = [](int i) { return "s" + std::to_string(i); };
    for (int i = 0; i < n; ++i) g.nodes.push_back(name(i));
    std::shuffle(g.nodes.begin(), g.nodes.end(), rng);
    for (const auto& [a, b] : edges) g.edges.emplace_back(name(a), name(b));

    Schedule s = plan(g);
    std::map<std::string, std::size_t> level;
    for (std::size_t l = 0; l < s.size(); ++l) {
      ASSERT_FALSE(s[l].empty());
      for (const auto& id : s[l]) ASSERT_TRUE(level.emplace(id, l).second) << "repeated " << id;
    }
    ASSERT_EQ(level.size(), static_cast<std::size_t>(n)) << "case " << c;

    auto reach = reachability(n, edges);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        if (reach[a][b]) ASSERT_LT(level[name(a)], level[name(b)]) << "case " << c;
        if (level[name(a)] == level[name(b)] && a != b) {
          ASSERT_FALSE(reach[a][b]);
          ASSERT_FALSE(reach[b][a]);
        }
      }
    // Ready-sets are as early as possible: every step past the first set
    // has a producer in the set just before it.
    for (int b = 0; b < n; ++b) {
      if (level[name(b)] == 0) continue;
      bool has_prev = std::any_of(edges.begin(), edges.end(), [&](const auto& e) {
        return e.second == b && level[name(e.first)] + 1 == level[name(b)];
      });
      ASSERT_TRUE(has_prev) << "case " << c;
    }
  }
}

TEST(PlanProperty, CyclesAreAlwaysDetected) {
  std::mt19937_64 rng(0xc1c);
  std::uniform_int_distribution<int> size(1, 8);
  for (int c = 0; c < 1000; ++c) {
    int n = size(rng);
    std::uniform_int_distribution<int> node(0, n - 1);
    StepGraph g;
    for (int i = 0; i < n; ++i) g.nodes.push_back("s" + std::to_string(i));
    int a = node(rng), b = node(rng);
    // Chain a -> ... -> b plus the closing edge b -> a (a self-loop when equal).
    int lo = std::min(a, b), hi = std::max(a, b);
    for (int i = lo; i < hi; ++i) g.edges.emplace_back(g.nodes[i], g.nodes[i + 1]);
    g.edges.emplace_back(g.nodes[hi], g.nodes[lo]);
    std::shuffle(g.edges.begin(), g.edges.end(), rng);
    ASSERT_THROW(plan(g), ValidationError) << "case " << c;
  }
}

TEST(RunWorkflow, ForecastEndToEnd) {
  TempDir dir;
  WorkflowDescription wf = forecast();
  WorkflowRun run = run_workflow(wf, forecast_job(wf), mock_config(), options_in(dir));

  const File& result = run.outputs.at("result").as<File>();
  EXPECT_EQ(fs::path(result.path), dir / "merged.nc");
  EXPECT_EQ(read_file(result.path), read_file(fixture("pdg.nc")) +
                                        "prep_gfs size=2\n3600 size=4\npostprocess size=1\n");
  EXPECT_EQ(result.size, fs::file_size(result.path));

  const auto& prep = step_named(run, "prep");
  const auto& sim = step_named(run, "simulate");
  const auto& post = step_named(run, "postprocess");
  EXPECT_EQ(Argv(prep.plan.argv.begin(), prep.plan.argv.begin() + 3),
            (Argv{"mock-mpiexec", "-n", "2"}));
  EXPECT_EQ(Argv(sim.plan.argv.begin(), sim.plan.argv.begin() + 3),
            (Argv{"mock-mpiexec", "-n", "4"}));
  EXPECT_EQ(post.plan.argv.at(0), "stage-tool");
  EXPECT_FALSE(post.plan.mpi_active);
  EXPECT_LT(prep.end_seq, sim.start_seq);
  EXPECT_LT(sim.end_seq, post.start_seq);
}

TEST(RunWorkflow, TraceArgvMatchesStepPlans) {
  TempDir dir;
  WorkflowDescription wf = forecast();
  WorkflowRun run = run_workflow(wf, forecast_job(wf), mock_config(), options_in(dir));
  for (const auto& s : run.steps) {
    ASSERT_TRUE(s.ok) << s.id;
    if (s.plan.mpi_active) {
      auto trace = read_json(dir / s.id / mock::kTraceFile);
      EXPECT_EQ(trace["argv"].get<Argv>(), s.plan.argv) << s.id;
    }
  }
}

TEST(RunWorkflow, WiringCopiesProducedBytes) {
  TempDir dir;
  WorkflowDescription wf = forecast();
  run_workflow(wf, forecast_job(wf), mock_config(), options_in(dir));
  EXPECT_EQ(read_file(dir / "prep" / "prep.nc"), read_file(dir / "simulate" / "prep.nc"));
  EXPECT_EQ(read_file(dir / "simulate" / "sim.nc"), read_file(dir / "postprocess" / "sim.nc"));
}

TEST(RunWorkflow, RerunIsReproducible) {
  TempDir dir;
  WorkflowDescription wf = forecast();
  auto first = run_workflow(wf, forecast_job(wf), mock_config(), options_in(dir));
  std::string bytes = read_file(first.outputs.at("result").as<File>().path);
  auto second = run_workflow(wf, forecast_job(wf), mock_config(), options_in(dir));
  EXPECT_EQ(read_file(second.outputs.at("result").as<File>().path), bytes);
  EXPECT_EQ(first.outputs.at("result").as<File>().checksum,
            second.outputs.at("result").as<File>().checksum);
}

TEST(RunWorkflow, ParallelFlagKeepsOrdering) {
  TempDir dir;
  WorkflowDescription wf = forecast();
  RunOptions o = options_in(dir);
  o.parallel_steps = true;
  WorkflowRun run = run_workflow(wf, forecast_job(wf), mock_config(), o);
  EXPECT_LT(step_named(run, "prep").end_seq, step_named(run, "simulate").start_seq);
}

// Writes tools and a workflow with a failing branch into `dir`.
fs::path write_branching_workflow(const TempDir& dir) {
  write_file(dir / "make.cwl", R"(
cwlVersion: v1.0
class: CommandLineTool
baseCommand: [stage-tool, made.txt]
inputs:
  tag: {type: string, inputBinding: {position: 1}}
outputs:
  made: {type: File, outputBinding: {glob: made.txt}}
)");
  write_file(dir / "consume.cwl", R"(
cwlVersion: v1.0
class: CommandLineTool
baseCommand: [stage-tool, made.txt, consumed]
inputs:
  raw: {type: File, inputBinding: {position: 1}}
outputs:
  made: {type: File, outputBinding: {glob: made.txt}}
)");
  write_file(dir / "wf.cwl", R"(
cwlVersion: v1.0
class: Workflow
inputs: {tag_a: string, tag_c: string}
outputs:
  from_b: {type: File, outputSource: b/made}
  from_c: {type: File, outputSource: c/made}
steps:
  a:
    run: make.cwl
    in: {tag: tag_a}
    out: [made]
  b:
    run: consume.cwl
    in: {raw: a/made}
    out: [made]
  c:
    run: make.cwl
    in: {tag: tag_c}
    out: [made]
)");
  return dir / "wf.cwl";
}

TEST(RunWorkflow, FailureSkipsDependentsOnly) {
  TempDir src, out;
  WorkflowDescription wf =
      std::get<WorkflowDescription>(load_document(write_branching_workflow(src)).document);
  try {
    run_workflow(wf, {{"tag_a", "fail"}, {"tag_c", "fine"}}, {}, options_in(out));
    FAIL();
  } catch (const WorkflowFailed& e) {
    ASSERT_EQ(e.failures().size(), 1u);
    EXPECT_EQ(e.failures()[0].first, "a");
    EXPECT_NE(std::string(e.what()).find("a"), std::string::npos);
    EXPECT_TRUE(step_named(e.partial(), "b").skipped);
    EXPECT_TRUE(step_named(e.partial(), "c").ok);
    EXPECT_TRUE(fs::exists(out / "c" / "made.txt"));
    EXPECT_FALSE(fs::exists(out / "b"));
  }
}

TEST(RunWorkflow, OnlyStepFails) {
  TempDir dir;
  write_file(dir / "wf.cwl", R"(
cwlVersion: v1.0
class: Workflow
inputs: {}
outputs: []
steps:
  lonely:
    run: postprocess.cwl
    in: {raw: missing}
    out: [merged]
)");
  EXPECT_THROW(load_document(dir / "wf.cwl"), ValidationError);

  write_file(dir / "fail.cwl", R"(
cwlVersion: v1.0
class: CommandLineTool
baseCommand: [stage-tool, x, fail]
inputs: []
outputs: []
)");
  write_file(dir / "wf2.cwl", R"(
cwlVersion: v1.0
class: Workflow
inputs: {}
outputs: []
steps:
  lonely:
    run: fail.cwl
    in: {}
    out: []
)");
  WorkflowDescription wf =
      std::get<WorkflowDescription>(load_document(dir / "wf2.cwl").document);
  try {
    run_workflow(wf, {}, {}, options_in(dir));
    FAIL();
  } catch (const WorkflowFailed& e) {
    ASSERT_EQ(e.failures().size(), 1u);
    EXPECT_EQ(e.failures()[0].first, "lonely");
    EXPECT_NE(std::string(e.what()).find("lonely"), std::string::npos);
  }
}

TEST(RunWorkflow, OutputFromWorkflowInput) {
  TempDir dir;
  write_file(dir / "wf.cwl", R"(
cwlVersion: v1.0
class: Workflow
inputs: {pdg: File}
outputs:
  same: {type: File, outputSource: pdg}
steps: {}
)");
  WorkflowDescription wf = std::get<WorkflowDescription>(load_document(dir / "wf.cwl").document);
  WorkflowRun run = run_workflow(wf, {{"pdg", File::at(fixture("pdg.nc").string())}}, {},
                                 options_in(dir));
  EXPECT_EQ(read_file(run.outputs.at("same").as<File>().path), read_file(fixture("pdg.nc")));
}

TEST(RunTool, FreshWorkdirPerRun) {
  TempDir dir;
  write_file(dir / "step" / "stale.txt", "old");
  run_tool(load_tool("hello.cwl"), {{"message", "hi"}}, {}, options_in(dir), dir / "step");
  EXPECT_FALSE(fs::exists(dir / "step" / "stale.txt"));
  EXPECT_EQ(read_file(dir / "step" / kStdoutLog), "hi\n");
}

TEST(RunTool, SoftwareRequirementUsesCatalog) {
  TempDir dir;
  ToolDescription t = parse_tool(R"(
cwlVersion: v1.0
class: CommandLineTool
requirements:
  SoftwareRequirement:
    packages: [{package: mesonh, version: ["5.5"]}]
baseCommand: env-dump
inputs: []
outputs: []
)");
  SiteCatalog cat = load_catalog(fixture("site-catalog.yml"));
  RunOptions o = options_in(dir);
  o.catalog = &cat;
  ToolRun run = run_tool(t, {}, {}, o, dir / "s");
  EXPECT_EQ(run.plan.env.at("MESONH_ROOT"), "/opt/mnh");
  std::string dump = read_file(dir / "s" / kStdoutLog);
  EXPECT_NE(dump.find("MESONH_ROOT=/opt/mnh\n"), std::string::npos);
  EXPECT_NE(dump.find("PATH=/opt/mnh/bin:"), std::string::npos);

  o.catalog = nullptr;
  log::Capture capture;
  ToolRun bare = run_tool(t, {}, {}, o, dir / "t");
  EXPECT_FALSE(bare.plan.env.count("MESONH_ROOT"));
  EXPECT_TRUE(capture.contains("catalog"));
}

}  // namespace
}  // namespace cwlmpi
