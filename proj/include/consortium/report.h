// Copyright 2026 The Consortium Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CONSORTIUM_REPORT_H_
#define CONSORTIUM_REPORT_H_

// CSV and text renderings of pipeline reports, sweeps and bargaining traces.
//
// Report CSV, one row per CP plus one ISP row:
//   scenario_id, sweep_parameter, sweep_value, regime, player, cp_index,
//   p, beta, S, h, R, n, v_k, admitted, w, x_shapley, T,
//   bargain_mean, bargain_se, status, message
// Numbers carry 9 significant digits; absent values are empty cells. When no
// coalition forms the payoff cells stay empty and a trailing row with status
// "no_coalition" is appended. Sweep CSVs concatenate these rows for every
// grid point in grid order; a failed point is a single row with status
// "error" and the message.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "consortium/scenario.h"

namespace consortium {

inline constexpr std::string_view kReportColumns[] = {
    "scenario_id", "sweep_parameter", "sweep_value", "regime",
    "player",      "cp_index",        "p",           "beta",
    "S",           "h",               "R",           "n",
    "v_k",         "admitted",        "w",           "x_shapley",
    "T",           "bargain_mean",    "bargain_se",  "status",
    "message"};

std::string ReportCsvHeader();

// Rows only, no header. `sweep_parameter` empty means not part of a sweep.
std::string ReportCsvRows(const PipelineReport& report,
                          std::string_view sweep_parameter = {},
                          std::optional<double> sweep_value = std::nullopt);

std::string ReportCsv(const PipelineReport& report);

std::string SweepCsv(const SweepTable& table, std::string_view scenario_id);

std::string ReportText(const PipelineReport& report);

std::string ReferenceText(const ReferenceComparison& comparison);

std::string ReferenceCsv(const ReferenceComparison& comparison);

// One row per trial: trial, round, coalition_mask, then one payoff column per
// bargaining player. The mask and the payoff columns use the scenario's CP
// numbering, with the ISP as bit / column K.
std::string BargainTraceCsv(const PipelineReport& report);

// A parsed row of the report CSV. Numeric cells that were empty are nullopt.
struct ReportRow {
  std::string scenario_id;
  std::string sweep_parameter;
  std::optional<double> sweep_value;
  std::string regime;
  std::string player;  // "cp", "isp" or "" for marker rows
  std::optional<int> cp_index;
  std::optional<double> price, beta, cache, hit_prob, avg_capacity,
      subscribers, value;
  std::optional<bool> admitted;
  std::optional<double> egalitarian, shapley, settlement, bargain_mean,
      bargain_se;
  std::string status;
  std::string message;
};

// Parses CSV produced by ReportCsv or SweepCsv. Throws std::invalid_argument
// on a malformed header or row.
std::vector<ReportRow> ParseReportCsv(std::string_view csv);

// Writes via a temporary file in the same directory and a rename. Throws
// std::runtime_error if the path is not writable.
void WriteFileAtomically(const std::filesystem::path& path,
                         std::string_view contents);

}  // namespace consortium

#endif  // CONSORTIUM_REPORT_H_
