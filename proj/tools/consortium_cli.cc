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

// consortium: scenario runner.
//
//   consortium [--config FILE] [--net-neutrality] [--seed N] [--out DIR]
//              [--format text|csv] [--threads N]
//              optimize | coalition | bargain | sweep | reproduce
//
// Files are written under --out, or $CONSORTIUM_OUT_DIR when --out is not
// given; without either, results go to stdout only.
// Exit status: 0 success, 1 input error, 2 internal-consistency failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <fmt/core.h>

#include "CLI11.hpp"
#include "consortium/errors.h"
#include "consortium/report.h"
#include "consortium/scenario.h"

namespace {

namespace cs = consortium;

struct Options {
  std::string config;
  bool net_neutrality = false;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "text";
  int threads = 1;
};

std::optional<std::filesystem::path> OutputDir(const Options& opts) {
  if (!opts.out.empty()) return std::filesystem::path(opts.out);
  if (const char* env = std::getenv("CONSORTIUM_OUT_DIR"); env && *env) {
    return std::filesystem::path(env);
  }
  return std::nullopt;
}

cs::Scenario LoadFor(const Options& opts) {
  cs::Scenario s =
      opts.config.empty() ? cs::ParseScenario("") : cs::LoadScenario(opts.config);
  if (opts.net_neutrality) cs::SetNetNeutrality(s, true);
  if (opts.seed && s.bargain) s.bargain->seed = *opts.seed;
  return s;
}

void Emit(const Options& opts, const std::string& name,
          const std::string& csv, const std::string& text) {
  std::cout << (opts.format == "csv" ? csv : text);
  if (auto dir = OutputDir(opts)) {
    const auto path = *dir / name;
    cs::WriteFileAtomically(path, csv);
    std::cerr << "wrote " << path.string() << '\n';
  }
}

void RunReport(const Options& opts, cs::Scenario s, const std::string& name) {
  const cs::PipelineReport report = cs::RunPipeline(s);
  Emit(opts, name, cs::ReportCsv(report), cs::ReportText(report));
}

void RunBargain(const Options& opts) {
  cs::Scenario s = LoadFor(opts);
  if (!s.bargain) {
    s.bargain = cs::BargainConfig{};
    if (opts.seed) s.bargain->seed = *opts.seed;
  }
  s.bargain->threads = std::max(s.bargain->threads, opts.threads);
  const cs::PipelineReport report = cs::RunPipeline(s);
  Emit(opts, "bargain_report.csv", cs::ReportCsv(report),
       cs::ReportText(report));
  if (!report.simulation) {
    std::cerr << "no bargaining players; trace not written\n";
    return;
  }
  if (auto dir = OutputDir(opts)) {
    const auto path = *dir / "bargain_trace.csv";
    cs::WriteFileAtomically(path, cs::BargainTraceCsv(report));
    std::cerr << "wrote " << path.string() << '\n';
  }
}

void RunSweepCommand(const Options& opts) {
  const cs::Scenario s = LoadFor(opts);
  const cs::SweepTable table = cs::RunSweep(s, opts.threads);
  const std::string csv = cs::SweepCsv(table, s.id);
  std::string text;
  for (const cs::SweepPoint& p : table.points) {
    text += fmt::format("{} = {:g}\n", table.parameter, p.value);
    text += p.report ? cs::ReportText(*p.report) : "error: " + p.error + "\n";
  }
  Emit(opts, "sweep.csv", csv, text);
}

void RunReproduce(const Options& opts) {
  const cs::ReferenceComparison cmp = cs::ReproduceReferenceTables();
  Emit(opts, "reference.csv", cs::ReferenceCsv(cmp), cs::ReferenceText(cmp));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ISP / content-provider consortium design and bargaining"};
  app.require_subcommand(1);
  Options opts;
  app.add_option("--config", opts.config, "scenario JSON file")
      ->check(CLI::ExistingFile);
  app.add_flag("--net-neutrality", opts.net_neutrality,
               "forbid capacity increments (beta = 0)");
  app.add_option("--seed", opts.seed, "bargaining seed override");
  app.add_option("--out", opts.out,
                 "output directory (default $CONSORTIUM_OUT_DIR)");
  app.add_option("--format", opts.format, "stdout format")
      ->check(CLI::IsMember({"text", "csv"}));
  app.add_option("--threads", opts.threads, "worker threads")
      ->check(CLI::Range(1, 256));
  app.fallthrough();

  auto* optimize = app.add_subcommand("optimize", "optimize every CP design");
  auto* coalition =
      app.add_subcommand("coalition", "design, admission and payoffs");
  auto* bargain = app.add_subcommand("bargain", "simulate bargaining");
  auto* sweep = app.add_subcommand("sweep", "run the scenario's sweep");
  auto* reproduce =
      app.add_subcommand("reproduce", "compare against reference tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (optimize->parsed()) {
      cs::Scenario s = LoadFor(opts);
      s.bargain.reset();
      RunReport(opts, std::move(s), "design.csv");
    } else if (coalition->parsed()) {
      cs::Scenario s = LoadFor(opts);
      s.bargain.reset();
      RunReport(opts, std::move(s), "coalition.csv");
    } else if (bargain->parsed()) {
      RunBargain(opts);
    } else if (sweep->parsed()) {
      RunSweepCommand(opts);
    } else if (reproduce->parsed()) {
      RunReproduce(opts);
    }
  } catch (const cs::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::logic_error& e) {
    // ConsistencyError and ContractViolation derive from logic_error, as do
    // the validation errors below; tell them apart.
    if (dynamic_cast<const cs::ConsistencyError*>(&e) ||
        dynamic_cast<const cs::ContractViolation*>(&e)) {
      std::cerr << "internal error: " << e.what() << '\n';
      return 2;
    }
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
