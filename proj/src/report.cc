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

#include "consortium/report.h"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <system_error>
#include <unistd.h>

#include <fmt/core.h>

namespace consortium {
namespace {

constexpr std::size_t kColumnCount = std::size(kReportColumns);

std::string Number(double x) { return fmt::format("{:.9g}", x); }

std::string Number(const std::optional<double>& x) {
  return x ? Number(*x) : std::string();
}

std::string Quote(std::string_view cell) {
  if (cell.find_first_of(",\"\n\r") == std::string_view::npos) {
    return std::string(cell);
  }
  std::string out = "\"";
  for (char ch : cell) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

void AppendRow(std::string& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i != 0) out += ',';
    out += Quote(cells[i]);
  }
  out += '\n';
}

struct RowContext {
  std::string_view scenario_id;
  std::string_view sweep_parameter;
  std::optional<double> sweep_value;
  std::string_view regime;
};

std::vector<std::string> BlankRow(const RowContext& ctx) {
  std::vector<std::string> cells(kColumnCount);
  cells[0] = ctx.scenario_id;
  cells[1] = ctx.sweep_parameter;
  cells[2] = Number(ctx.sweep_value);
  cells[3] = ctx.regime;
  return cells;
}

std::string RemovalReason(const PipelineReport& report, int cp) {
  for (const Removal& r : report.admission.removals) {
    if (r.cp == cp) return r.reason;
  }
  return {};
}

std::vector<std::vector<std::string>> SplitCsv(std::string_view csv) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < csv.size(); ++i) {
    const char ch = csv[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < csv.size() && csv[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += ch;
      }
      continue;
    }
    if (ch == '"') {
      quoted = true;
      any = true;
    } else if (ch == ',') {
      row.push_back(std::move(cell));
      cell.clear();
      any = true;
    } else if (ch == '\n') {
      row.push_back(std::move(cell));
      cell.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else if (ch != '\r') {
      cell += ch;
      any = true;
    }
  }
  if (quoted) throw std::invalid_argument("csv: unterminated quoted cell");
  if (any) {
    row.push_back(std::move(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::optional<double> ParseNumber(const std::string& cell, std::size_t line) {
  if (cell.empty()) return std::nullopt;
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != cell.size()) {
    throw std::invalid_argument(
        fmt::format("csv line {}: '{}' is not a number", line, cell));
  }
  return value;
}

}  // namespace

std::string ReportCsvHeader() {
  std::string out;
  for (std::size_t i = 0; i < kColumnCount; ++i) {
    if (i != 0) out += ',';
    out += kReportColumns[i];
  }
  out += '\n';
  return out;
}

std::string ReportCsvRows(const PipelineReport& report,
                          std::string_view sweep_parameter,
                          std::optional<double> sweep_value) {
  const RowContext ctx{report.scenario_id, sweep_parameter, sweep_value,
                       RegimeName(report.regime)};
  std::string out;
  for (const CpReport& cp : report.cps) {
    std::vector<std::string> c = BlankRow(ctx);
    c[4] = "cp";
    c[5] = std::to_string(cp.index);
    c[6] = Number(cp.outcome.design.price);
    c[7] = Number(cp.outcome.design.capacity_increment);
    c[8] = Number(cp.outcome.design.cache_size);
    c[9] = Number(cp.state.hit_prob);
    c[10] = Number(cp.state.avg_capacity);
    c[11] = Number(cp.state.subscribers);
    c[12] = Number(cp.outcome.virtual_profit);
    c[13] = cp.admitted ? "1" : "0";
    c[14] = Number(cp.egalitarian);
    c[15] = Number(cp.shapley);
    c[16] = Number(cp.settlement);
    c[17] = Number(cp.bargain_mean);
    c[18] = Number(cp.bargain_std_error);
    c[19] = cp.admitted ? "ok" : "denied";
    c[20] = cp.admitted ? std::string() : RemovalReason(report, cp.index);
    AppendRow(out, c);
  }
  std::vector<std::string> isp = BlankRow(ctx);
  isp[4] = "isp";
  isp[14] = Number(report.isp.egalitarian);
  isp[15] = Number(report.isp.shapley);
  isp[17] = Number(report.isp.bargain_mean);
  isp[18] = Number(report.isp.bargain_std_error);
  isp[19] = "ok";
  AppendRow(out, isp);
  if (!report.coalition_forms) {
    std::vector<std::string> marker = BlankRow(ctx);
    marker[19] = "no_coalition";
    marker[20] = report.admission.any_admitted()
                     ? fmt::format("admitted coalition value {:.9g} <= 0",
                                   report.coalition_value)
                     : "no CP admitted";
    AppendRow(out, marker);
  }
  return out;
}

std::string ReportCsv(const PipelineReport& report) {
  return ReportCsvHeader() + ReportCsvRows(report);
}

std::string SweepCsv(const SweepTable& table, std::string_view scenario_id) {
  std::string out = ReportCsvHeader();
  for (const SweepPoint& point : table.points) {
    if (point.report) {
      out += ReportCsvRows(*point.report, table.parameter, point.value);
      continue;
    }
    std::vector<std::string> c = BlankRow(
        {scenario_id, table.parameter, point.value, std::string_view()});
    c[19] = "error";
    c[20] = point.error;
    AppendRow(out, c);
  }
  return out;
}

std::string ReportText(const PipelineReport& report) {
  std::string out;
  out += fmt::format("scenario {}  regime {}  K = {}  F = {:.6g}\n",
                     report.scenario_id, RegimeName(report.regime),
                     report.cps.size(), report.isp_fixed_cost);
  out += fmt::format("{:>4} {:>12} {:>12} {:>12} {:>9} {:>13} {:>8}\n", "cp",
                     "p", "beta", "S", "h", "v_k", "admitted");
  for (const CpReport& cp : report.cps) {
    out += fmt::format("{:>4} {:>12.6g} {:>12.6g} {:>12.6g} {:>9.5f} "
                       "{:>13.6g} {:>8}\n",
                       cp.index, cp.outcome.design.price,
                       cp.outcome.design.capacity_increment,
                       cp.outcome.design.cache_size, cp.state.hit_prob,
                       cp.outcome.virtual_profit, cp.admitted ? "yes" : "no");
  }
  out += fmt::format("v(all CPs + ISP) = {:.6g}  admission condition: {}\n",
                     report.grand_value,
                     report.grand_admission ? "holds" : "fails");
  for (const Removal& r : report.admission.removals) {
    out += fmt::format("removed cp {} (v = {:.6g}): {}\n", r.cp, r.value,
                       r.reason);
  }
  if (!report.coalition_forms) {
    out += "no coalition forms\n";
  } else {
    out += fmt::format("coalition value = {:.6g}\n", report.coalition_value);
    out += fmt::format("{:>4} {:>13} {:>13} {:>13}\n", "who", "w",
                       "x_shapley", "T");
    for (const CpReport& cp : report.cps) {
      if (!cp.admitted) continue;
      out += fmt::format("{:>4} {:>13.6g} {:>13.6g} {:>13.6g}\n", cp.index,
                         cp.egalitarian.value_or(0), cp.shapley.value_or(0),
                         cp.settlement.value_or(0));
    }
    out += fmt::format("{:>4} {:>13.6g} {:>13.6g}\n", "isp",
                       report.isp.egalitarian.value_or(0),
                       report.isp.shapley.value_or(0));
  }
  if (report.simulation) {
    const SimulationReport& sim = *report.simulation;
    out += fmt::format("bargaining: {} ({} trials, agreement rate {:.4f}, "
                       "mean round {:.3f})\n",
                       sim.regime_label(), sim.trials.size(),
                       sim.agreement_rate, sim.mean_agreement_round);
    for (std::size_t i = 0; i < report.bargain_players.size(); ++i) {
      out += fmt::format("  cp {:>2}: mean {:.6g} +- {:.3g}  continuation "
                         "{:.6g}\n",
                         report.bargain_players[i], sim.mean_payoff[i],
                         sim.std_error[i], sim.continuation[i]);
    }
    out += fmt::format("  isp  : mean {:.6g} +- {:.3g}  continuation {:.6g}\n",
                       sim.mean_payoff.back(), sim.std_error.back(),
                       sim.continuation.back());
  }
  if (report.equilibrium && report.equilibrium->witness) {
    const DeviationWitness& w = *report.equilibrium->witness;
    out += fmt::format("  deviation: proposer {} prefers mask {:#x} "
                       "(surplus {:.6g} vs {:.6g}) in subgame {:#x}\n",
                       w.proposer, w.deviation.mask(), w.deviation_surplus,
                       w.full_surplus, w.subgame.mask());
  }
  for (const std::string& warning : report.warnings) {
    out += fmt::format("warning: {}\n", warning);
  }
  return out;
}

std::string ReferenceText(const ReferenceComparison& comparison) {
  std::string out = fmt::format("{:<4} {:>8} {:<5} {:>14} {:>14} {:>10} {}\n",
                                "reg", "eta_S", "qty", "reference",
                                "computed", "tolerance", "result");
  for (const ReferenceCheck& c : comparison.checks) {
    const std::string tol =
        c.tolerance == 0
            ? std::string("exact")
            : fmt::format("{:g}{}", c.tolerance, c.relative ? " rel" : " abs");
    out += fmt::format("{:<4} {:>8g} {:<5} {:>14.6g} {:>14.6g} {:>10} {}\n",
                       RegimeName(c.regime), c.isp_cache_unit_cost, c.quantity,
                       c.expected, c.computed, tol, c.pass ? "PASS" : "FAIL");
  }
  out += fmt::format("runtime: NN {:.3f} s, NNN {:.3f} s\n",
                     comparison.net_neutral_seconds,
                     comparison.non_neutral_seconds);
  return out;
}

std::string ReferenceCsv(const ReferenceComparison& comparison) {
  std::string out =
      "regime,eta_S,quantity,expected,computed,tolerance,relative,pass\n";
  for (const ReferenceCheck& c : comparison.checks) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", RegimeName(c.regime),
                       Number(c.isp_cache_unit_cost), c.quantity,
                       Number(c.expected), Number(c.computed),
                       Number(c.tolerance), c.relative ? 1 : 0,
                       c.pass ? 1 : 0);
  }
  return out;
}

std::string BargainTraceCsv(const PipelineReport& report) {
  if (!report.simulation) {
    throw std::invalid_argument("report has no bargaining simulation");
  }
  const int isp_bit = static_cast<int>(report.cps.size());
  const std::vector<int>& players = report.bargain_players;
  std::string out = "trial,round,coalition_mask";
  for (int k : players) out += fmt::format(",payoff_cp{}", k);
  out += ",payoff_isp\n";
  const auto& trials = report.simulation->trials;
  for (std::size_t t = 0; t < trials.size(); ++t) {
    const TrialRecord& rec = trials[t];
    std::uint64_t mask = 0;
    for (int member : rec.coalition.members()) {
      const int original = member < static_cast<int>(players.size())
                               ? players[member]
                               : isp_bit;
      mask |= std::uint64_t{1} << original;
    }
    out += fmt::format("{},{},{}", t, rec.round, mask);
    for (double x : rec.payoffs) out += ',' + Number(x);
    out += '\n';
  }
  return out;
}

std::vector<ReportRow> ParseReportCsv(std::string_view csv) {
  const auto rows = SplitCsv(csv);
  if (rows.empty()) throw std::invalid_argument("csv: missing header");
  if (rows[0].size() != kColumnCount) {
    throw std::invalid_argument("csv: unexpected header");
  }
  for (std::size_t i = 0; i < kColumnCount; ++i) {
    if (rows[0][i] != kReportColumns[i]) {
      throw std::invalid_argument(
          fmt::format("csv: header column {} is '{}', expected '{}'", i,
                      rows[0][i], kReportColumns[i]));
    }
  }
  std::vector<ReportRow> out;
  for (std::size_t line = 1; line < rows.size(); ++line) {
    const auto& c = rows[line];
    if (c.size() != kColumnCount) {
      throw std::invalid_argument(fmt::format(
          "csv line {}: {} cells, expected {}", line + 1, c.size(),
          kColumnCount));
    }
    const auto num = [&](std::size_t i) { return ParseNumber(c[i], line + 1); };
    ReportRow r;
    r.scenario_id = c[0];
    r.sweep_parameter = c[1];
    r.sweep_value = num(2);
    r.regime = c[3];
    r.player = c[4];
    if (auto idx = num(5)) r.cp_index = static_cast<int>(*idx);
    r.price = num(6);
    r.beta = num(7);
    r.cache = num(8);
    r.hit_prob = num(9);
    r.avg_capacity = num(10);
    r.subscribers = num(11);
    r.value = num(12);
    if (!c[13].empty()) r.admitted = c[13] == "1";
    r.egalitarian = num(14);
    r.shapley = num(15);
    r.settlement = num(16);
    r.bargain_mean = num(17);
    r.bargain_se = num(18);
    r.status = c[19];
    r.message = c[20];
    out.push_back(std::move(r));
  }
  return out;
}

void WriteFileAtomically(const std::filesystem::path& path,
                         std::string_view contents) {
  namespace fs = std::filesystem;
  const fs::path dir =
      path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path tmp =
      dir / fmt::format(".{}.tmp.{}", path.filename().string(), ::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error(
          fmt::format("cannot write '{}'", path.string()));
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw std::runtime_error(
          fmt::format("write to '{}' failed", path.string()));
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error(
        fmt::format("cannot move output into '{}'", path.string()));
  }
}

}  // namespace consortium
