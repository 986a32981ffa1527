/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
// failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "cwlmpi/cmdline.hpp"
#include "cwlmpi/executor.hpp"
#include "cwlmpi/mock_mpi.hpp"
#include "cwlmpi/mpi_config.hpp"
#include "cwlmpi/perfstats.hpp"
#include "cwlmpi/workflow_engine.hpp"
#include "test_support.hpp"

namespace {
using namespace cwlmpi;
using namespace cwlmpi::testing;
namespace fs = std::filesystem;
using Argv = std::vector<std::string>;
using Clock = std::chrono::steady_clock;

constexpr double kHelloBudgetSeconds = 1.0;
constexpr double kWorkflowBudgetSeconds = 5.0;
constexpr double kPerfTolerance = 1e-9;
constexpr int kMinMpiExtensionTests = 14;
constexpr int kSyntheticRanks = 56;

struct Failed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(bool ok, const std::string& what) {
  if (!ok) throw Failed(what);
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

/// Runs an executable by absolute path and returns its exit code and stdout.
std::pair<int, std::string> run_binary(const fs::path& exe, const Argv& args,
                                       const fs::path& cwd) {
  CommandPlan plan;
  plan.argv.push_back(exe.string());
  plan.argv.insert(plan.argv.end(), args.begin(), args.end());
  plan.env = test_env();
  plan.workdir = cwd;
  plan.stdout_capture = "binary.stdout";
  int code = 0;
  try {
    code = run(plan).exit_code;
  } catch (const ProcessFailed& e) {
    code = e.exit_code();
  }
  return {code, read_file(cwd / "binary.stdout")};
}

std::string c1_serial_hello() {
  TempDir dir;
  auto t0 = Clock::now();
  CliResult r = run_program("runner", {fixture("hello.cwl").string(),
                                       fixture("hello-job.yml").string()},
                            dir.path());
  double dt = seconds_since(t0);
  check(r.exit_code == 0, "exit code " + std::to_string(r.exit_code) + ": " + r.err);
  check(read_file(dir / "out" / "hello" / kStdoutLog) == "Hello world\n",
        "captured stdout differs");
  check(dt < kHelloBudgetSeconds, "took " + std::to_string(dt) + " s");
  return "exit 0, stdout \"Hello world\\n\", " + std::to_string(dt) + " s";
}

std::string c2_mock_mpi_hello() {
  TempDir dir;
  auto t0 = Clock::now();
  CliResult r = run_program("runner", {"--mpi-config-file", fixture("mock-mpi.yml").string(),
                                       fixture("hello-mpi.cwl").string(),
                                       fixture("hello-mpi-job.yml").string()},
                            dir.path());
  double dt = seconds_since(t0);
  check(r.exit_code == 0, "exit code " + std::to_string(r.exit_code) + ": " + r.err);
  auto trace = read_json(dir / "out" / "hello-mpi" / mock::kTraceFile);
  check(trace.at("nproc") == 2, "trace nproc " + trace.at("nproc").dump());
  Argv argv = trace.at("argv").get<Argv>();
  check(argv.size() >= 2 && Argv(argv.end() - 2, argv.end()) == Argv{"echo", "Hello world"},
        "argv tail " + trace.at("argv").dump());
  check(trace.at("command").get<Argv>() == Argv{"echo", "Hello world"}, "command field");
  auto lines = lines_of(read_file(dir / "out" / "hello-mpi" / kStdoutLog));
  check(lines == Argv{"Hello world", "Hello world"},
        "captured " + std::to_string(lines.size()) + " lines");
  check(dt < kHelloBudgetSeconds, "took " + std::to_string(dt) + " s");
  return "trace nproc=2, two lines, " + std::to_string(dt) + " s";
}

std::string c3_zero_processes() {
  Environment env = test_env();
  for (const MpiPlatformConfig& cfg : {MpiPlatformConfig{}, mock_config(),
                                       load_config(fixture("likwid-srun.yml"))}) {
    CommandPlan off = build_command(load_tool("hello-mpi.cwl"),
                                    {{"message", "Hello world"}, {"nproc", 0}}, cfg, env);
    CommandPlan serial =
        build_command(load_tool("hello.cwl"), {{"message", "Hello world"}}, cfg, env);
    check(off.argv == serial.argv, "argv differs from serial plan under " + cfg.runner);
    check(!off.mpi_active, "mpi_active set");
    check(off.argv.front() == "echo", "launcher prefix present");
  }
  return "argv [echo, Hello world] identical to serial plan";
}

std::string c4_config_defaults() {
  MpiPlatformConfig d = load_config(std::nullopt);
  check(d.runner == "mpirun" && d.nproc_flag == "-n" && d.default_nproc == 1 &&
            d.extra_flags.empty() && d.env_pass.empty() && d.env_pass_regex.empty() &&
            d.env_set.empty(),
        "defaults differ");
  MpiPlatformConfig s = load_config(fixture("likwid-srun.yml"));
  check(s.runner == "srun", "runner " + s.runner);
  const Argv six{"likwid-perfctr", "-C", "L:N:0", "-g", "FLOPS_DP", "-o"};
  check(s.extra_flags.size() == 7, "extra_flags has " + std::to_string(s.extra_flags.size()));
  check(Argv(s.extra_flags.begin(), s.extra_flags.begin() + 6) == six, "flag order");
  check(s.extra_flags[6] == "/output/path/likwid_%r.json", "output path");
  return "defaults exact; srun + six flag tokens in order (+ output path)";
}

std::string c5_environment_policy() {
  TempDir dir;
  ToolDescription tool = parse_tool(R"(
cwlVersion: v1.0
class: CommandLineTool
$namespaces: {cwltool: "http://commonwl.org/cwltool#"}
requirements:
  cwltool:MPIRequirement: {processes: 2}
baseCommand: env-dump
inputs: []
outputs: []
)");
  Environment host = test_env();
  host["SLURM_JOB_ID"] = "42";
  host["SECRET"] = "x";
  host["OMP_NUM_THREADS"] = "8";
  MpiPlatformConfig cfg = mock_config();
  cfg.env_pass_regex = {"SLURM_.*"};
  cfg.env_pass = {"OMP_NUM_THREADS"};
  cfg.env_set = {{"OMP_NUM_THREADS", "4"}};

  CommandPlan plan = build_command(tool, {}, cfg, host, dir.path());
  ExecutionResult r = run(plan);
  auto lines = lines_of(read_file(r.stdout_path));
  auto count = [&](const std::string& l) { return std::count(lines.begin(), lines.end(), l); };
  check(count("SLURM_JOB_ID=42") == 2, "SLURM_JOB_ID not seen by both ranks");
  check(count("OMP_NUM_THREADS=4") == 2, "env_set did not win over env_pass");
  check(count("OMP_NUM_THREADS=8") == 0, "host OMP_NUM_THREADS leaked");
  for (const auto& l : lines) check(l.rfind("SECRET=", 0) != 0, "SECRET leaked");
  return "child sees SLURM_JOB_ID, not SECRET; env_set wins";
}

std::string c6_mixed_workflow() {
  TempDir dir;
  auto wf = std::get<WorkflowDescription>(load_document(fixture("forecast-workflow.cwl")).document);
  JobOrder job = parse_job_order(read_file(fixture("forecast-job.yml")), wf.inputs, fixture(""));
  RunOptions options;
  options.outdir = dir.path();
  options.host_env = test_env();
  auto t0 = Clock::now();
  WorkflowRun run = run_workflow(wf, job, mock_config(), options);
  double dt = seconds_since(t0);

  check(read_json(dir / "prep" / mock::kTraceFile).at("nproc") == 2, "prep nproc");
  check(read_json(dir / "simulate" / mock::kTraceFile).at("nproc") == 4, "simulate nproc");
  check(!fs::exists(dir / "postprocess" / mock::kTraceFile), "postprocess went through MPI");
  std::map<std::string, const StepRecord*> by_id;
  for (const auto& s : run.steps) by_id[s.id] = &s;
  check(by_id.size() == 3, "step count");
  check(by_id["prep"]->end_seq < by_id["simulate"]->start_seq &&
            by_id["simulate"]->end_seq < by_id["postprocess"]->start_seq,
        "execution order violates the DAG");
  std::string expected = read_file(fixture("pdg.nc")) +
                         "prep_gfs size=2\n3600 size=4\npostprocess size=1\n";
  check(read_file(run.outputs.at("result").as<File>().path) == expected, "output wiring");
  check(dt < kWorkflowBudgetSeconds, "took " + std::to_string(dt) + " s");
  return "traces 2 and 4, serial third step, wiring ok, " + std::to_string(dt) + " s";
}

std::string c7_perf_consistency() {
  TempDir dir;
  std::mt19937_64 rng(56112);
  std::uniform_real_distribution<double> spread(-0.004, 0.004);
  std::vector<double> flops;
  for (int r = 0; r < kSyntheticRanks; ++r) {
    flops.push_back(0.709 + spread(rng));
    write_file(dir / ("likwid_" + std::to_string(r) + ".json"),
               nlohmann::json{{"flops", flops.back()},
                              {"scalar_uops_rate", 0.696},
                              {"vector_uops_rate", 0.0055}}
                   .dump());
  }
  std::vector<perf::RankPerfRecord> records;
  for (const auto& p : perf::expand_glob((dir / "likwid_*.json").string()))
    records.push_back(perf::parse_rank_file(p));
  check(records.size() == flops.size(), "rank files discovered");
  perf::AggregateStats s = perf::aggregate(records);

  long double sum = 0.0L;
  for (double v : flops) sum += v;
  long double mean = sum / flops.size(), ss = 0.0L;
  for (double v : flops) ss += (v - mean) * (v - mean);
  double sd = static_cast<double>(std::sqrt(ss / flops.size()));
  check(std::abs(s.total_flops - static_cast<double>(sum)) <= kPerfTolerance, "total");
  check(std::abs(s.mean_flops - s.total_flops / s.nranks) <= kPerfTolerance, "mean");
  check(std::abs(s.sd_flops - sd) <= kPerfTolerance, "sd vs oracle");

  auto round2 = [](double v) { return std::round(v * 100.0) / 100.0; };
  check(round2(39.7 / 56) == 0.71, "39.7/56");
  check(round2(74.6 / 112) == 0.67, "74.6/112");
  return "total/mean/sd within 1e-9; 39.7/56 -> 0.71, 74.6/112 -> 0.67";
}

std::string c8_property_suites() {
  TempDir dir;
  const std::string filter =
      "CmdlineProperty.*:PerfProperty.*:PlanProperty.*:MpiConfigProperty.*:ResolveProperty.*";
  auto [list_code, listing] =
      run_binary(CWLMPI_UNIT_TESTS_BIN, {"--gtest_list_tests", "--gtest_filter=" + filter},
                 dir.path());
  check(list_code == 0, "cannot list tests");
  for (const char* suite : {"CmdlineProperty.", "PerfProperty.", "PlanProperty."})
    check(listing.find(suite) != std::string::npos, std::string("missing suite ") + suite);
  for (const char* test : {"MpiPlanSuffixEqualsSerialPlan", "PositionSortMatchesOracle",
                           "EnvSetAlwaysPresentAndWins", "PermutationInvariance",
                           "ScalingInvariance", "RandomDagsAgainstReachabilityOracle"})
    check(listing.find(test) != std::string::npos, std::string("missing ") + test);
  auto [code, out] = run_binary(CWLMPI_UNIT_TESTS_BIN, {"--gtest_filter=" + filter}, dir.path());
  check(code == 0, "property suites failed:\n" + out);
  auto pos = out.find("[  PASSED  ] ");
  return out.substr(pos, out.find('\n', pos) - pos) + " (1000 seeded cases each)";
}

std::string c9_mpi_test_count() {
  TempDir dir;
  auto [code, listing] = run_binary(
      CWLMPI_UNIT_TESTS_BIN, {"--gtest_list_tests", "--gtest_filter=MpiExtension.*"}, dir.path());
  check(code == 0, "cannot list tests");
  int n = 0;
  for (const auto& line : lines_of(listing))
    if (line.rfind("  ", 0) == 0) ++n;
  check(n >= kMinMpiExtensionTests, std::to_string(n) + " MpiExtension tests");
  return std::to_string(n) + " MpiExtension tests";
}

std::string c10_round_trips() {
  std::vector<MpiPlatformConfig> configs{MpiPlatformConfig{}, mock_config(),
                                         load_config(fixture("likwid-srun.yml"))};
  MpiPlatformConfig odd;
  odd.runner = "aprun";
  odd.nproc_flag = "-n";
  odd.default_nproc = 24;
  odd.extra_flags = {"-d", "1", "--cc", "depth", "yes", "a: b", "#x"};
  odd.env_pass = {"PBS_JOBID"};
  odd.env_pass_regex = {"(PBS|SLURM)_.*"};
  odd.env_set = {{"OMP_NUM_THREADS", "1"}, {"MPICH_ENV", "~"}};
  configs.push_back(odd);
  for (const auto& cfg : configs)
    check(parse_config(serialize_config(cfg)) == cfg, "config round-trip for " + cfg.runner);

  std::vector<perf::AggregateStats> stats{{56, 39.7, 0.71, 0.002, 39.0, 0.31},
                                          {112, 74.6, 0.67, 0.002, 73.5, 0.58},
                                          {1, 0.1 + 0.2, 1.0 / 3.0, 0.0, 1e-300, 5e300}};
  for (const auto& s : stats) {
    auto text = perf::render_report(s, perf::ReportFormat::kJson);
    check(perf::stats_from_json(nlohmann::json::parse(text)) == s, "stats round-trip");
  }
  return std::to_string(configs.size()) + " configs and " + std::to_string(stats.size()) +
         " stats round-trip exactly";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<std::string()>>> criteria{
      {"serial hello world", c1_serial_hello},
      {"MPI hello via mock launcher", c2_mock_mpi_hello},
      {"zero processes disables MPI", c3_zero_processes},
      {"platform config defaults and srun file", c4_config_defaults},
      {"child environment policy", c5_environment_policy},
      {"mixed-parallelism workflow", c6_mixed_workflow},
      {"perf aggregation consistency", c7_perf_consistency},
      {"property suites", c8_property_suites},
      {"MPI extension test count", c9_mpi_test_count},
      {"serialize/parse round-trips", c10_round_trips},
  };
  log::set_min_severity(Severity::kError);
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string detail;
    bool ok = false;
    try {
      detail = criteria[i].second();
      ok = true;
    } catch (const std::exception& e) {
      detail = e.what();
    }
    failures += ok ? 0 : 1;
    std::cout << (ok ? "PASS" : "FAIL") << "  criterion " << (i + 1) << ": "
              << criteria[i].first << " -- " << detail << std::endl;
  }
  std::cout << (failures ? "ACCEPTANCE FAILED" : "ACCEPTANCE PASSED") << " (" << failures
            << " failing of " << criteria.size() << ")" << std::endl;
  return failures ? 1 : 0;
}
