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

#ifndef CONSORTIUM_SCENARIO_H_
#define CONSORTIUM_SCENARIO_H_

// Scenario files, the design-then-admission pipeline, parameter sweeps and
// the single-CP reference benchmark.
//
// A scenario file is a JSON object; see docs/scenario_schema.md. Every
// omitted field takes the default from CpParams / MarketParams / the option
// structs, and unknown keys are rejected.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "consortium/bargain.h"
#include "consortium/design.h"
#include "consortium/game.h"
#include "consortium/model.h"

namespace consortium {

inline constexpr int kDefaultCpCount = 5;

struct SweepSpec {
  std::string parameter;
  std::vector<double> values;  // nonempty, strictly increasing
  std::vector<std::string> outputs{"design", "game", "payoffs"};

  bool wants(std::string_view output) const;
};

struct Scenario {
  std::string id = "scenario";
  MarketParams market;
  std::vector<CpParams> cps = std::vector<CpParams>(kDefaultCpCount);
  // Optional pinned capacity increment per CP; forced to zero under Net
  // Neutrality.
  std::vector<std::optional<double>> fixed_beta =
      std::vector<std::optional<double>>(kDefaultCpCount);
  bool net_neutrality = false;
  DesignOptions design;
  std::optional<BargainConfig> bargain;
  bool bargain_admitted_only = true;
  std::optional<SweepSpec> sweep;
  std::vector<std::string> warnings;

  Regime regime() const {
    return net_neutrality ? Regime::kNetNeutral : Regime::kNonNeutral;
  }
  // Throws std::invalid_argument with the offending field path.
  void Validate() const;
};

// Parses scenario JSON. Empty or whitespace-only text yields the defaults.
Scenario ParseScenario(std::string_view text);

Scenario LoadScenario(const std::filesystem::path& path);

// Switches the regime; under Net Neutrality pinned betas become zero and a
// warning is recorded for each one that was nonzero.
void SetNetNeutrality(Scenario& scenario, bool enabled);

// Sets one scalar parameter by path: a CP field name applies to every CP
// ("elasticity", "fixed_cost", ...), "cps[i].<field>" to CP i, market
// fields by name or "market.<field>", plus the short aliases eps, A, Sigma,
// c_S, f, F, eta_S, eta_beta, c, r1 and "bargain.discount".
void ApplyParameter(Scenario& scenario, std::string_view path, double value);

struct CpReport {
  int index = 0;  // zero-based position in the scenario
  CpOutcome outcome;
  DerivedState state;
  bool admitted = false;
  std::optional<double> egalitarian;
  std::optional<double> shapley;
  std::optional<double> settlement;
  std::optional<double> bargain_mean;
  std::optional<double> bargain_std_error;
};

struct IspReport {
  std::optional<double> egalitarian;
  std::optional<double> shapley;
  std::optional<double> bargain_mean;
  std::optional<double> bargain_std_error;
};

struct PipelineReport {
  std::string scenario_id;
  Regime regime = Regime::kNonNeutral;
  std::vector<CpReport> cps;
  IspReport isp;
  double isp_fixed_cost = 0.0;

  double grand_value = 0.0;        // all CPs, before admission
  bool grand_admission = false;    // admission condition on all CPs
  AdmissionResult admission;
  double coalition_value = 0.0;    // admitted CPs plus the ISP
  bool coalition_forms = false;    // someone admitted and value > 0

  std::optional<EquilibriumReport> equilibrium;
  std::optional<SimulationReport> simulation;
  std::vector<int> bargain_players;  // CP indices of the bargaining game
  std::vector<std::string> warnings;
};

// Optimizes every CP, builds the game, applies admission control, and
// computes payoffs and settlements for the admitted set. Bargaining runs if
// the scenario configures it. Errors are rethrown with the CP index.
PipelineReport RunPipeline(const Scenario& scenario);

struct SweepPoint {
  double value = 0.0;
  std::optional<PipelineReport> report;
  std::string error;  // empty on success
};

struct SweepTable {
  std::string parameter;
  std::vector<SweepPoint> points;
};

// Evaluates the pipeline at every grid value of scenario.sweep, using up to
// `threads` workers. Points are returned in grid order.
SweepTable RunSweep(const Scenario& scenario, int threads = 1);

struct ReferenceCheck {
  Regime regime = Regime::kNonNeutral;
  double isp_cache_unit_cost = 0.0;
  std::string quantity;  // p, h, S, beta, v
  double expected = 0.0;
  double computed = 0.0;
  double tolerance = 0.0;
  bool relative = true;  // relative tolerance, else absolute
  bool pass = false;
};

struct ReferenceComparison {
  std::vector<ReferenceCheck> checks;
  double net_neutral_seconds = 0.0;
  double non_neutral_seconds = 0.0;

  bool all_pass() const;
};

// The single-CP benchmark (eps = 1.5, F = f = 0) at
// eta_S in {1, 100, 1e4, 1e5} under both regimes, compared with the
// stored reference values. Zero references must be matched exactly.
ReferenceComparison ReproduceReferenceTables();

// One CP with F = f = 0, eps = 1.5 and the given cache unit cost.
Scenario BenchmarkScenario(double isp_cache_unit_cost, Regime regime);

}  // namespace consortium

#endif  // CONSORTIUM_SCENARIO_H_
