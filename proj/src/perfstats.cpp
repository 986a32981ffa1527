/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "cwlmpi/perfstats.hpp"

#include <glob.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace cwlmpi::perf {
namespace fs = std::filesystem;

std::int64_t rank_from_filename(const fs::path& path) {
  std::string stem = path.stem().string();
  std::size_t end = stem.size();
  std::size_t begin = end;
  while (begin > 0 && std::isdigit(static_cast<unsigned char>(stem[begin - 1])))
    --begin;
  if (begin == end || end - begin > 9)
    throw PerfError("cannot parse rank from file name '" +
                    path.filename().string() + "'");
  return std::stoll(stem.substr(begin));
}

namespace {

double metric(const nlohmann::json& doc, const char* key,
              const std::string& source) {
  if (!doc.contains(key))
    throw PerfError(source + ": missing metric '" + key + "'");
  const auto& v = doc.at(key);
  if (!v.is_number())
    throw PerfError(source + ": metric '" + key + "' is not a number");
  double d = v.get<double>();
  if (!(d >= 0.0) || !std::isfinite(d))
    throw PerfError(source + ": metric '" + key + "' must be finite and >= 0");
  return d;
}

const nlohmann::json* find_metric_block(const nlohmann::json& j) {
  if (!j.is_object()) return nullptr;
  if (j.contains("Metric") && j["Metric"].is_object()) return &j["Metric"];
  for (const auto& [k, v] : j.items())
    if (const auto* found = find_metric_block(v)) return found;
  return nullptr;
}

/// Sum (or max) of a likwid metric's "Values", one entry per measured core.
double likwid_metric(const nlohmann::json& block, const char* name,
                     const std::string& source, bool sum) {
  if (!block.contains(name))
    throw PerfError(source + ": missing metric '" + std::string(name) + "'");
  const auto& m = block.at(name);
  const auto& values = m.is_object() && m.contains("Values") ? m["Values"] : m;
  std::vector<double> nums;
  if (values.is_array()) {
    for (const auto& v : values) {
      if (v.is_number()) nums.push_back(v.get<double>());
      else if (v.is_string()) {
        const std::string& text = v.get_ref<const std::string&>();
        double d = 0.0;
        auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), d);
        if (ec != std::errc() || end != text.data() + text.size())
          throw PerfError(source + ": metric '" + std::string(name) + "' is not a number");
        nums.push_back(d);
      }
    }
  } else if (values.is_number()) {
    nums.push_back(values.get<double>());
  }
  if (nums.empty())
    throw PerfError(source + ": metric '" + std::string(name) + "' has no values");
  double out = sum ? 0.0 : nums.front();
  for (double d : nums) out = sum ? out + d : std::max(out, d);
  if (!(out >= 0.0) || !std::isfinite(out))
    throw PerfError(source + ": metric '" + std::string(name) + "' must be >= 0");
  return out;
}

}  // namespace

RankPerfRecord parse_rank_json(const nlohmann::json& doc, std::int64_t rank,
                               const std::string& source) {
  if (rank < 0) throw PerfError(source + ": rank must be >= 0");
  if (!doc.is_object()) throw PerfError(source + ": expected a JSON object");
  RankPerfRecord r;
  r.rank = rank;
  if (doc.contains("flops")) {
    r.flops = metric(doc, "flops", source);
    r.scalar_uops_rate = metric(doc, "scalar_uops_rate", source);
    r.vector_uops_rate = metric(doc, "vector_uops_rate", source);
    if (doc.contains("runtime")) r.runtime = metric(doc, "runtime", source);
    return r;
  }
  const nlohmann::json* block = find_metric_block(doc);
  if (!block) throw PerfError(source + ": missing metric 'flops'");
  r.flops = likwid_metric(*block, "DP [MFLOP/s]", source, true) / 1000.0;
  r.scalar_uops_rate = likwid_metric(*block, "Scalar [MUOPS/s]", source, true) / 1000.0;
  r.vector_uops_rate = likwid_metric(*block, "Packed [MUOPS/s]", source, true) / 1000.0;
  if (block->contains("Runtime (RDTSC) [s]"))
    r.runtime = likwid_metric(*block, "Runtime (RDTSC) [s]", source, false);
  return r;
}

RankPerfRecord parse_rank_file(const fs::path& path) {
  std::int64_t rank = rank_from_filename(path);
  std::ifstream in(path);
  if (!in) throw PerfError("cannot read '" + path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw PerfError(path.string() + ": malformed JSON: " + e.what());
  }
  return parse_rank_json(doc, rank, path.string());
}

AggregateStats aggregate(std::vector<RankPerfRecord> records) {
  if (records.empty()) throw PerfError("no rank records to aggregate");
  std::sort(records.begin(), records.end(),
            [](const auto& a, const auto& b) { return a.rank < b.rank; });
  for (std::size_t i = 1; i < records.size(); ++i)
    if (records[i].rank == records[i - 1].rank)
      throw PerfError("duplicate rank " + std::to_string(records[i].rank));

  AggregateStats s;
  s.nranks = static_cast<std::int64_t>(records.size());
  for (const auto& r : records) {
    s.total_flops += r.flops;
    s.total_scalar += r.scalar_uops_rate;
    s.total_vector += r.vector_uops_rate;
  }
  s.mean_flops = s.total_flops / static_cast<double>(s.nranks);
  double ss = 0.0;
  for (const auto& r : records) {
    double d = r.flops - s.mean_flops;
    ss += d * d;
  }
  s.sd_flops = std::sqrt(ss / static_cast<double>(s.nranks));
  return s;
}

namespace {

/// Three decimals with trailing zeros dropped, keeping at least one.
std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  std::string s(buf);
  while (s.size() > 1 && s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
  return s;
}

}  // namespace

std::string render_report(const AggregateStats& stats, ReportFormat format) {
  if (format == ReportFormat::kJson) return to_json(stats).dump(2) + "\n";
  const char* header[] = {"Cores",     "Total",        "Rank mean",
                          "Rank s.d.", "Total scalar", "Total vector"};
  std::vector<std::string> row = {std::to_string(stats.nranks),
                                  fmt(stats.total_flops),
                                  fmt(stats.mean_flops),
                                  fmt(stats.sd_flops),
                                  fmt(stats.total_scalar),
                                  fmt(stats.total_vector)};
  std::ostringstream out;
  out << "                 Performance / GFLOP/s       Micro-op rate / 1e9/s\n";
  char line[256];
  std::snprintf(line, sizeof(line), "%6s %10s %10s %10s %13s %13s\n", header[0],
                header[1], header[2], header[3], header[4], header[5]);
  out << line;
  std::snprintf(line, sizeof(line), "%6s %10s %10s %10s %13s %13s\n",
                row[0].c_str(), row[1].c_str(), row[2].c_str(), row[3].c_str(),
                row[4].c_str(), row[5].c_str());
  out << line;
  return out.str();
}

nlohmann::json to_json(const AggregateStats& s) {
  return {{"nranks", s.nranks},         {"total_flops", s.total_flops},
          {"mean_flops", s.mean_flops}, {"sd_flops", s.sd_flops},
          {"total_scalar", s.total_scalar}, {"total_vector", s.total_vector}};
}

AggregateStats stats_from_json(const nlohmann::json& j) {
  AggregateStats s;
  try {
    s.nranks = j.at("nranks").get<std::int64_t>();
    s.total_flops = j.at("total_flops").get<double>();
    s.mean_flops = j.at("mean_flops").get<double>();
    s.sd_flops = j.at("sd_flops").get<double>();
    s.total_scalar = j.at("total_scalar").get<double>();
    s.total_vector = j.at("total_vector").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw PerfError(std::string("malformed stats document: ") + e.what());
  }
  return s;
}

std::vector<fs::path> expand_glob(const std::string& pattern) {
  glob_t g{};
  std::vector<fs::path> out;
  if (::glob(pattern.c_str(), 0, nullptr, &g) == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) {
      std::error_code ec;
      if (fs::is_regular_file(g.gl_pathv[i], ec)) out.emplace_back(g.gl_pathv[i]);
    }
  }
  ::globfree(&g);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace cwlmpi::perf
