/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

// Per-rank FLOPS_DP counter output -> run-wide summary.
//
// A rank file is either the minimal shape
//
//   {"flops": 0.71, "scalar_uops_rate": 0.69, "vector_uops_rate": 0.005,
//    "runtime": 12.5}
//
// (rates in 1e9/s, runtime in seconds, runtime optional) or likwid-perfctr
// JSON output for the FLOPS_DP group, from which "DP [MFLOP/s]",
// "Scalar [MUOPS/s]", "Packed [MUOPS/s]" and "Runtime (RDTSC) [s]" are read.
// The rank is the trailing integer of the file stem: likwid_12.json -> 12.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cwlmpi/diagnostics.hpp"

namespace cwlmpi::perf {

class PerfError : public Error {
 public:
  using Error::Error;
};

struct RankPerfRecord {
  std::int64_t rank = 0;
  double flops = 0.0;             // GFLOP/s
  double scalar_uops_rate = 0.0;  // 1e9/s
  double vector_uops_rate = 0.0;  // 1e9/s
  double runtime = 0.0;           // s

  bool operator==(const RankPerfRecord&) const = default;
};

struct AggregateStats {
  std::int64_t nranks = 0;
  double total_flops = 0.0;
  double mean_flops = 0.0;
  /// Population standard deviation: the ranks are the whole run.
  double sd_flops = 0.0;
  double total_scalar = 0.0;
  double total_vector = 0.0;

  bool operator==(const AggregateStats&) const = default;
};

enum class ReportFormat { kText, kJson };

/// Trailing integer of the stem, e.g. "likwid_3.json" -> 3.
std::int64_t rank_from_filename(const std::filesystem::path& path);

RankPerfRecord parse_rank_json(const nlohmann::json& doc, std::int64_t rank,
                               const std::string& source = "");
RankPerfRecord parse_rank_file(const std::filesystem::path& path);

/// Records are summed in rank order, so any permutation of the input gives
/// bit-identical results. Throws PerfError on empty input or duplicate ranks.
AggregateStats aggregate(std::vector<RankPerfRecord> records);

std::string render_report(const AggregateStats& stats, ReportFormat format);

nlohmann::json to_json(const AggregateStats& stats);
AggregateStats stats_from_json(const nlohmann::json& j);

/// Expands a shell-style glob pattern to sorted regular files.
std::vector<std::filesystem::path> expand_glob(const std::string& pattern);

}  // namespace cwlmpi::perf
