/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "cwlmpi/workflow_engine.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <future>
#include <map>
#include <mutex>
#include <set>

#include "cwlmpi/expr.hpp"

namespace cwlmpi {
namespace fs = std::filesystem;

StepGraph StepGraph::from(const WorkflowDescription& wf) {
  StepGraph g;
  for (const auto& step : wf.steps) {
    g.nodes.push_back(step.id);
    for (const auto& up : step.upstream()) g.edges.emplace_back(up, step.id);
  }
  return g;
}

Schedule plan(const StepGraph& graph) {
  std::map<std::string, int> indegree;
  std::map<std::string, std::vector<std::string>> consumers;
  for (const auto& n : graph.nodes) indegree[n] = 0;
  for (const auto& [from, to] : graph.edges) {
    if (!indegree.count(from) || !indegree.count(to))
      throw ValidationError("", 0, "edge " + from + " -> " + to +
                                       " names an undeclared step");
    consumers[from].push_back(to);
    ++indegree[to];
  }
  Schedule schedule;
  std::vector<std::string> ready;
  for (const auto& [n, d] : indegree)
    if (d == 0) ready.push_back(n);
  std::size_t placed = 0;
  while (!ready.empty()) {
    std::sort(ready.begin(), ready.end());
    schedule.push_back(ready);
    placed += ready.size();
    std::vector<std::string> next;
    for (const auto& n : ready)
      for (const auto& c : consumers[n])
        if (--indegree[c] == 0) next.push_back(c);
    ready = std::move(next);
  }
  if (placed != indegree.size())
    throw ValidationError("", 0, "step graph contains a cycle");
  return schedule;
}

Schedule plan(const WorkflowDescription& wf) { return plan(StepGraph::from(wf)); }

WorkflowFailed::WorkflowFailed(
    std::vector<std::pair<std::string, std::string>> failures, WorkflowRun partial)
    : ExecutionError([&] {
        std::string msg = "workflow failed:";
        for (const auto& [step, why] : failures)
          msg += "\n  step '" + step + "': " + why;
        return msg;
      }()),
      failures_(std::move(failures)),
      partial_(std::move(partial)) {}

namespace {

void fresh_directory(const fs::path& dir) {
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir, ec);
  if (ec)
    throw ExecutionError("cannot create working directory '" + dir.string() +
                         "': " + ec.message());
}

Value copy_to_outdir(const Value& v, const fs::path& outdir,
                     std::set<fs::path>& taken) {
  if (v.is<Value::Array>()) {
    Value::Array out;
    for (const auto& item : v.as<Value::Array>())
      out.push_back(copy_to_outdir(item, outdir, taken));
    return out;
  }
  if (!v.is<File>()) return v;
  fs::path src(v.as<File>().path);
  fs::path dest = outdir / src.filename();
  for (int n = 1; taken.count(dest); ++n)
    dest = outdir / (src.stem().string() + "_" + std::to_string(n) +
                     src.extension().string());
  taken.insert(dest);
  std::error_code ec;
  fs::copy_file(src, dest, fs::copy_options::overwrite_existing, ec);
  if (ec)
    throw ExecutionError("cannot copy output '" + src.string() + "' to '" +
                         dest.string() + "': " + ec.message());
  return describe_file(dest);
}

}  // namespace

ToolRun run_tool(const ToolDescription& tool, const JobOrder& job,
                 const MpiPlatformConfig& cfg, const RunOptions& options,
                 const fs::path& workdir,
                 const std::vector<EffectiveRequirement>& inherited) {
  JobOrder resolved = resolve_job(tool.inputs, job, tool.source);
  fs::path wd = fs::absolute(workdir).lexically_normal();
  fresh_directory(wd);
  JobOrder staged = stage(resolved, wd);

  ToolRun out;
  out.plan = build_command(tool, staged, cfg, options.host_env, wd);

  auto software = effective_requirement(tool, kSoftwareRequirement);
  if (!software || software->optional) {
    for (const auto& req : inherited)
      if (req.requirement.class_name == kSoftwareRequirement &&
          (!software || !req.optional)) {
        software = req;
        break;
      }
  }
  if (software) {
    const auto& decl = std::get<SoftwareRequirementDecl>(software->requirement.body);
    if (options.catalog) {
      out.plan = resolve(decl, *options.catalog, std::move(out.plan), software->optional);
    } else {
      log::warn(tool.source, 0,
                "SoftwareRequirement ignored: no software catalog configured");
    }
  }

  log::info("running: " + [&] {
    std::string s;
    for (const auto& a : out.plan.argv) s += (s.empty() ? "" : " ") + a;
    return s;
  }());
  out.result = run(out.plan);
  if (!out.plan.stdout_capture) {
    std::ifstream captured(out.result.stdout_path);
    std::string text((std::istreambuf_iterator<char>(captured)), {});
    if (text.size() > 4096) text = text.substr(0, 4096) + "...";
    while (!text.empty() && text.back() == '\n') text.pop_back();
    if (!text.empty()) log::info(tool.source + " stdout:\n" + text);
  }
  out.outputs = collect_outputs(tool, wd, out.result);
  out.result.outputs = out.outputs;
  return out;
}

WorkflowRun run_workflow(const WorkflowDescription& wf, const JobOrder& job,
                         const MpiPlatformConfig& cfg, const RunOptions& options) {
  JobOrder inputs = resolve_job(wf.inputs, job, wf.source);
  Schedule schedule = plan(wf);
  fs::path outdir = fs::absolute(options.outdir).lexically_normal();
  fs::create_directories(outdir);

  std::vector<EffectiveRequirement> inherited;
  for (const auto& r : wf.requirements) inherited.push_back({r, false});
  for (const auto& r : wf.hints) inherited.push_back({r, true});

  std::mutex mutex;
  std::map<std::string, OutputMap> produced;
  std::map<std::string, StepRecord> records;
  std::vector<std::pair<std::string, std::string>> failures;
  std::atomic<std::uint64_t> seq{0};

  auto execute = [&](const WorkflowStep& step) {
    StepRecord rec;
    rec.id = step.id;
    JobOrder step_job;
    {
      std::lock_guard lock(mutex);
      for (const auto& si : step.in) {
        auto slash = si.source.find('/');
        if (slash == std::string::npos) {
          step_job[si.id] = inputs.at(si.source);
        } else {
          step_job[si.id] =
              produced.at(si.source.substr(0, slash)).at(si.source.substr(slash + 1));
        }
      }
    }
    rec.start_seq = seq++;
    try {
      ToolRun run = run_tool(*step.run, step_job, cfg, options, outdir / step.id,
                             inherited);
      rec.plan = run.plan;
      rec.ok = true;
      rec.end_seq = seq++;
      std::lock_guard lock(mutex);
      produced[step.id] = std::move(run.outputs);
      records[step.id] = std::move(rec);
    } catch (const Error& e) {
      rec.end_seq = seq++;
      rec.error = e.what();
      std::lock_guard lock(mutex);
      failures.emplace_back(step.id, e.what());
      records[step.id] = std::move(rec);
    }
  };

  for (const auto& ready : schedule) {
    std::vector<const WorkflowStep*> runnable;
    for (const auto& id : ready) {
      const WorkflowStep* step = wf.find_step(id);
      bool blocked = false;
      for (const auto& up : step->upstream())
        if (!records.count(up) || !records[up].ok) blocked = true;
      if (blocked) {
        StepRecord rec;
        rec.id = id;
        rec.skipped = true;
        rec.error = "skipped: an upstream step failed";
        records[id] = std::move(rec);
        continue;
      }
      runnable.push_back(step);
    }
    if (options.parallel_steps && runnable.size() > 1) {
      std::vector<std::future<void>> inflight;
      for (const auto* step : runnable)
        inflight.push_back(std::async(std::launch::async, execute, std::cref(*step)));
      for (auto& f : inflight) f.get();
    } else {
      for (const auto* step : runnable) execute(*step);
    }
  }

  WorkflowRun result;
  for (auto& [id, rec] : records) result.steps.push_back(rec);
  std::stable_sort(result.steps.begin(), result.steps.end(),
                   [](const StepRecord& a, const StepRecord& b) {
                     if (a.skipped != b.skipped) return !a.skipped;
                     return a.start_seq < b.start_seq;
                   });

  if (!failures.empty()) {
    std::sort(failures.begin(), failures.end());
    throw WorkflowFailed(std::move(failures), std::move(result));
  }

  std::set<fs::path> taken;
  for (const auto& out : wf.outputs) {
    auto slash = out.output_source.find('/');
    Value v = slash == std::string::npos
                  ? inputs.at(out.output_source)
                  : produced.at(out.output_source.substr(0, slash))
                        .at(out.output_source.substr(slash + 1));
    result.outputs[out.id] = copy_to_outdir(v, outdir, taken);
  }
  return result;
}

OutputMap run_tool_document(const ToolDescription& tool, const JobOrder& job,
                            const MpiPlatformConfig& cfg,
                            const RunOptions& options, const std::string& name) {
  fs::path outdir = fs::absolute(options.outdir).lexically_normal();
  fs::create_directories(outdir);
  ToolRun run = run_tool(tool, job, cfg, options, outdir / name);
  OutputMap outputs;
  std::set<fs::path> taken;
  for (const auto& [id, v] : run.outputs) outputs[id] = copy_to_outdir(v, outdir, taken);
  return outputs;
}

}  // namespace cwlmpi
