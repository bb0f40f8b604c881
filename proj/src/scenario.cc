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

#include "consortium/scenario.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <fmt/core.h>

#include "consortium/errors.h"
#include <nlohmann/json.hpp>

namespace consortium {
namespace {

using nlohmann::json;

// Reads the members of one JSON object and rejects anything it was not
// asked about.
class ObjectReader {
 public:
  ObjectReader(const json& object, std::string path)
      : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) {
      throw std::invalid_argument(
          fmt::format("{}: expected an object", Display()));
    }
  }

  void Number(const char* key, double& out) {
    if (const json* v = Take(key)) {
      if (!v->is_number()) Fail(key, "expected a number");
      out = v->get<double>();
    }
  }

  template <typename Int>
  void Integer(const char* key, Int& out) {
    if (const json* v = Take(key)) {
      if (!v->is_number_integer() && !v->is_number_unsigned()) {
        Fail(key, "expected an integer");
      }
      out = v->get<Int>();
    }
  }

  void Bool(const char* key, bool& out) {
    if (const json* v = Take(key)) {
      if (!v->is_boolean()) Fail(key, "expected true or false");
      out = v->get<bool>();
    }
  }

  void String(const char* key, std::string& out) {
    if (const json* v = Take(key)) {
      if (!v->is_string()) Fail(key, "expected a string");
      out = v->get<std::string>();
    }
  }

  const json* Take(const char* key) {
    seen_.insert(key);
    auto it = object_.find(key);
    return it == object_.end() ? nullptr : &*it;
  }

  std::string Child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  [[noreturn]] void Fail(const std::string& key,
                         const std::string& reason) const {
    throw std::invalid_argument(fmt::format("{}: {}", Child(key), reason));
  }

  void Finish() const {
    for (auto it = object_.begin(); it != object_.end(); ++it) {
      if (!seen_.count(it.key())) Fail(it.key(), "unknown key");
    }
  }

 private:
  std::string Display() const { return path_.empty() ? "<root>" : path_; }

  const json& object_;
  std::string path_;
  std::set<std::string> seen_;
};

void ReadCpFields(ObjectReader& r, CpParams& cp) {
  r.Number("demand_pool", cp.demand_pool);
  r.Number("elasticity", cp.elasticity);
  r.Number("content_size", cp.content_size);
  r.Number("cache_unit_cost", cp.cache_unit_cost);
  r.Number("fixed_cost", cp.fixed_cost);
}

void ReadMarket(const json& j, MarketParams& m) {
  ObjectReader r(j, "market");
  r.Number("isp_fixed_cost", m.isp_fixed_cost);
  r.Number("isp_cache_unit_cost", m.isp_cache_unit_cost);
  r.Number("isp_capacity_unit_cost", m.isp_capacity_unit_cost);
  r.Number("subscriber_cost", m.subscriber_cost);
  r.Number("hit_capacity", m.hit_capacity);
  r.Finish();
}

void ReadDesign(const json& j, DesignOptions& d) {
  ObjectReader r(j, "design");
  r.Number("beta_max", d.beta_max);
  r.Integer("max_iterations", d.max_iterations);
  r.Number("relative_tolerance", d.relative_tolerance);
  r.Number("root_tolerance", d.root_tolerance);
  r.Integer("beta_scan_points", d.beta_scan_points);
  r.Integer("grid_points", d.grid_points);
  r.Finish();
}

void ReadBargain(const json& j, Scenario& s) {
  ObjectReader r(j, "bargain");
  BargainConfig b;
  r.Number("discount", b.discount);
  r.Integer("trials", b.trials);
  r.Integer("seed", b.seed);
  r.Integer("max_rounds", b.max_rounds);
  r.Integer("threads", b.threads);
  r.Bool("admitted_only", s.bargain_admitted_only);
  r.Finish();
  s.bargain = b;
}

void ReadSweep(const json& j, Scenario& s) {
  ObjectReader r(j, "sweep");
  SweepSpec sweep;
  r.String("parameter", sweep.parameter);
  if (sweep.parameter.empty()) r.Fail("parameter", "required");
  const json* values = r.Take("values");
  if (values == nullptr || !values->is_array()) {
    r.Fail("values", "expected an array of numbers");
  }
  for (const json& v : *values) {
    if (!v.is_number()) r.Fail("values", "expected an array of numbers");
    sweep.values.push_back(v.get<double>());
  }
  if (const json* outputs = r.Take("outputs")) {
    if (!outputs->is_array()) r.Fail("outputs", "expected an array");
    sweep.outputs.clear();
    for (const json& o : *outputs) {
      if (!o.is_string()) r.Fail("outputs", "expected strings");
      sweep.outputs.push_back(o.get<std::string>());
    }
  }
  r.Finish();
  s.sweep = std::move(sweep);
}

std::string WithPrefix(const std::string& prefix, const char* what) {
  return prefix + what;
}

// Rethrows the active exception with `prefix` prepended, keeping its type.
[[noreturn]] void RethrowWithContext(const std::string& prefix) {
  try {
    throw;
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(WithPrefix(prefix, e.what()), e.best());
  } catch (const ConsistencyError& e) {
    throw ConsistencyError(WithPrefix(prefix, e.what()));
  } catch (const ContractViolation& e) {
    throw ContractViolation(WithPrefix(prefix, e.what()));
  } catch (const std::domain_error& e) {
    throw std::domain_error(WithPrefix(prefix, e.what()));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(WithPrefix(prefix, e.what()));
  }
}

double* CpField(CpParams& cp, std::string_view name) {
  static const std::map<std::string_view, double CpParams::*> fields = {
      {"demand_pool", &CpParams::demand_pool},
      {"A", &CpParams::demand_pool},
      {"elasticity", &CpParams::elasticity},
      {"eps", &CpParams::elasticity},
      {"content_size", &CpParams::content_size},
      {"Sigma", &CpParams::content_size},
      {"cache_unit_cost", &CpParams::cache_unit_cost},
      {"c_S", &CpParams::cache_unit_cost},
      {"fixed_cost", &CpParams::fixed_cost},
      {"f", &CpParams::fixed_cost},
  };
  auto it = fields.find(name);
  return it == fields.end() ? nullptr : &(cp.*(it->second));
}

double* MarketField(MarketParams& m, std::string_view name) {
  static const std::map<std::string_view, double MarketParams::*> fields = {
      {"isp_fixed_cost", &MarketParams::isp_fixed_cost},
      {"F", &MarketParams::isp_fixed_cost},
      {"isp_cache_unit_cost", &MarketParams::isp_cache_unit_cost},
      {"eta_S", &MarketParams::isp_cache_unit_cost},
      {"isp_capacity_unit_cost", &MarketParams::isp_capacity_unit_cost},
      {"eta_beta", &MarketParams::isp_capacity_unit_cost},
      {"subscriber_cost", &MarketParams::subscriber_cost},
      {"c", &MarketParams::subscriber_cost},
      {"hit_capacity", &MarketParams::hit_capacity},
      {"r1", &MarketParams::hit_capacity},
  };
  auto it = fields.find(name);
  return it == fields.end() ? nullptr : &(m.*(it->second));
}

CpOutcome OptimizeOne(const Scenario& s, std::size_t k) {
  try {
    if (s.fixed_beta[k].has_value()) {
      return OptimizeCpAtCapacity(s.cps[k], s.market, *s.fixed_beta[k],
                                  s.design);
    }
    return OptimizeCp(s.cps[k], s.market, s.regime(), s.design);
  } catch (...) {
    RethrowWithContext(fmt::format("cps[{}]: ", k));
  }
}

struct Reference {
  Regime regime;
  double isp_cache_unit_cost;
  double price, hit_prob, cache, beta, value;
};

// Reference optimum designs for the single-CP benchmark.
constexpr Reference kReferences[] = {
    {Regime::kNetNeutral, 1, 3, 0.7249, 4211, 0, 82612},
    {Regime::kNetNeutral, 100, 3, 0.3935, 90.7, 0, 50786},
    {Regime::kNetNeutral, 1e4, 3, 0.0501, 0.08, 0, 2970},
    {Regime::kNetNeutral, 1e5, 3, 0, 0, 0, 0},
    {Regime::kNonNeutral, 1, 7.32, 0.710, 3699.7, 14.4, 122410},
    {Regime::kNonNeutral, 100, 9.3, 0.388, 86.8, 21, 93360},
    {Regime::kNonNeutral, 1e4, 22.59, 0.079, 1.5, 65.3, 37230},
    {Regime::kNonNeutral, 1e5, 3, 0, 0, 0, 0},
};

ReferenceCheck Compare(const Reference& ref, const char* quantity,
                       double expected, double computed) {
  ReferenceCheck check;
  check.regime = ref.regime;
  check.isp_cache_unit_cost = ref.isp_cache_unit_cost;
  check.quantity = quantity;
  check.expected = expected;
  check.computed = computed;
  const bool neutral = ref.regime == Regime::kNetNeutral;
  if (expected == 0) {
    check.relative = false;
    check.tolerance = 0;
    check.pass = computed == 0;
  } else if (neutral && check.quantity == "h") {
    check.relative = false;
    check.tolerance = 1e-3;
    check.pass = std::abs(computed - expected) <= check.tolerance;
  } else {
    check.tolerance = neutral ? 1e-2 : 2e-2;
    check.pass =
        std::abs(computed - expected) <= check.tolerance * std::abs(expected);
  }
  return check;
}

}  // namespace

bool SweepSpec::wants(std::string_view output) const {
  return std::find(outputs.begin(), outputs.end(), output) != outputs.end();
}

void Scenario::Validate() const {
  if (cps.empty() || static_cast<int>(cps.size()) > kMaxCps) {
    throw std::invalid_argument(
        fmt::format("cps: need between 1 and {} CPs", kMaxCps));
  }
  if (fixed_beta.size() != cps.size()) {
    throw std::invalid_argument("fixed_beta: one entry per CP required");
  }
  for (std::size_t k = 0; k < cps.size(); ++k) {
    try {
      cps[k].Validate();
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(fmt::format("cps[{}].{}", k, e.what()));
    }
    if (fixed_beta[k] && !(*fixed_beta[k] >= 0)) {
      throw std::invalid_argument(
          fmt::format("cps[{}].fixed_beta: must be nonnegative", k));
    }
    if (net_neutrality && fixed_beta[k] && *fixed_beta[k] != 0) {
      throw std::invalid_argument(fmt::format(
          "cps[{}].fixed_beta: must be 0 under net neutrality", k));
    }
  }
  try {
    market.Validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(fmt::format("market.{}", e.what()));
  }
  design.Validate();
  if (bargain) bargain->Validate();
  if (sweep) {
    if (sweep->values.empty()) {
      throw std::invalid_argument("sweep.values: must not be empty");
    }
    for (std::size_t i = 1; i < sweep->values.size(); ++i) {
      if (!(sweep->values[i] > sweep->values[i - 1])) {
        throw std::invalid_argument(
            "sweep.values: must be strictly increasing");
      }
    }
    for (const std::string& o : sweep->outputs) {
      if (o != "design" && o != "game" && o != "payoffs" && o != "bargain") {
        throw std::invalid_argument(fmt::format(
            "sweep.outputs: unknown output '{}' (design, game, payoffs, "
            "bargain)",
            o));
      }
    }
    Scenario probe = *this;
    probe.sweep.reset();
    ApplyParameter(probe, sweep->parameter, sweep->values.front());
  }
}

Scenario ParseScenario(std::string_view text) {
  json root;
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    root = json::object();
  } else {
    try {
      root = json::parse(text);
    } catch (const json::parse_error& e) {
      throw std::invalid_argument(fmt::format("parse error: {}", e.what()));
    }
  }

  Scenario s;
  ObjectReader r(root, "");
  r.String("id", s.id);
  r.Bool("net_neutrality", s.net_neutrality);
  if (const json* m = r.Take("market")) ReadMarket(*m, s.market);

  CpParams defaults;
  if (const json* d = r.Take("cp_defaults")) {
    ObjectReader dr(*d, "cp_defaults");
    ReadCpFields(dr, defaults);
    dr.Finish();
  }
  int count = kDefaultCpCount;
  const json* count_json = r.Take("cp_count");
  if (count_json != nullptr) {
    r.Integer("cp_count", count);
    if (count < 1 || count > kMaxCps) {
      r.Fail("cp_count", fmt::format("must lie in [1, {}]", kMaxCps));
    }
  }
  const json* list = r.Take("cps");
  if (list != nullptr) {
    if (!list->is_array()) r.Fail("cps", "expected an array");
    if (count_json == nullptr) {
      count = static_cast<int>(list->size());
    } else if (static_cast<int>(list->size()) != count) {
      r.Fail("cps", fmt::format("has {} entries but cp_count is {}",
                                list->size(), count));
    }
  }
  if (count < 1 || count > kMaxCps) {
    r.Fail("cps", fmt::format("need between 1 and {} CPs", kMaxCps));
  }
  s.cps.assign(count, defaults);
  s.fixed_beta.assign(count, std::nullopt);
  if (list != nullptr) {
    for (int k = 0; k < count; ++k) {
      ObjectReader cr((*list)[k], fmt::format("cps[{}]", k));
      ReadCpFields(cr, s.cps[k]);
      double beta = 0.0;
      if (cr.Take("fixed_beta") != nullptr) {
        cr.Number("fixed_beta", beta);
        s.fixed_beta[k] = beta;
      }
      cr.Finish();
    }
  }

  if (const json* d = r.Take("design")) ReadDesign(*d, s.design);
  if (const json* b = r.Take("bargain")) ReadBargain(*b, s);
  if (const json* w = r.Take("sweep")) ReadSweep(*w, s);
  r.Finish();

  if (s.net_neutrality) SetNetNeutrality(s, true);
  s.Validate();
  return s;
}

Scenario LoadScenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument(
        fmt::format("cannot open scenario file '{}'", path.string()));
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return ParseScenario(buffer.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(
        fmt::format("{}: {}", path.string(), e.what()));
  }
}

void SetNetNeutrality(Scenario& scenario, bool enabled) {
  scenario.net_neutrality = enabled;
  if (!enabled) return;
  for (std::size_t k = 0; k < scenario.fixed_beta.size(); ++k) {
    auto& beta = scenario.fixed_beta[k];
    if (beta && *beta != 0) {
      scenario.warnings.push_back(fmt::format(
          "cps[{}].fixed_beta = {} forced to 0 under net neutrality", k,
          *beta));
      beta = 0.0;
    }
  }
}

void ApplyParameter(Scenario& scenario, std::string_view path, double value) {
  const auto fail = [&] {
    throw std::invalid_argument(
        fmt::format("unknown parameter path '{}'", path));
  };
  if (path == "bargain.discount") {
    if (!scenario.bargain) scenario.bargain = BargainConfig{};
    scenario.bargain->discount = value;
    return;
  }
  if (path.starts_with("cps[")) {
    const std::size_t close = path.find("].");
    if (close == std::string_view::npos) fail();
    std::size_t index = 0;
    try {
      index = std::stoul(std::string(path.substr(4, close - 4)));
    } catch (const std::exception&) {
      fail();
    }
    if (index >= scenario.cps.size()) fail();
    const std::string_view field = path.substr(close + 2);
    if (field == "fixed_beta") {
      scenario.fixed_beta[index] = value;
      return;
    }
    double* target = CpField(scenario.cps[index], field);
    if (target == nullptr) fail();
    *target = value;
    return;
  }
  std::string_view name = path;
  if (name.starts_with("market.")) {
    name.remove_prefix(7);
    double* target = MarketField(scenario.market, name);
    if (target == nullptr) fail();
    *target = value;
    return;
  }
  if (double* target = MarketField(scenario.market, name)) {
    *target = value;
    return;
  }
  if (CpField(scenario.cps.front(), name) == nullptr) fail();
  for (CpParams& cp : scenario.cps) *CpField(cp, name) = value;
}

PipelineReport RunPipeline(const Scenario& scenario) {
  scenario.Validate();
  PipelineReport report;
  report.scenario_id = scenario.id;
  report.regime = scenario.regime();
  report.isp_fixed_cost = scenario.market.isp_fixed_cost;
  report.warnings = scenario.warnings;

  const std::size_t k_count = scenario.cps.size();
  std::vector<double> values;
  for (std::size_t k = 0; k < k_count; ++k) {
    CpReport cp;
    cp.index = static_cast<int>(k);
    cp.outcome = OptimizeOne(scenario, k);
    cp.state = EvaluateDesign(cp.outcome.design, scenario.cps[k],
                              scenario.market);
    if (!cp.outcome.profitable()) {
      report.warnings.push_back(fmt::format(
          "cps[{}] is unprofitable (v = {:.6g})", k,
          cp.outcome.virtual_profit));
    }
    values.push_back(cp.outcome.virtual_profit);
    report.cps.push_back(cp);
  }

  const CoalitionGame game(values, scenario.market.isp_fixed_cost);
  report.grand_value = game.Value(game.grand());
  report.grand_admission = AdmissionCondition(game);
  report.admission = AdmissionControl(game);

  const std::vector<int>& admitted = report.admission.admitted;
  for (int k : admitted) report.cps[k].admitted = true;
  if (!admitted.empty()) {
    const CoalitionGame sub = game.Restrict(admitted);
    report.coalition_value = sub.Value(sub.grand());
    report.coalition_forms = report.coalition_value > 0;
    if (report.coalition_forms) {
      const std::vector<double> w = EgalitarianPayoffs(sub);
      const std::vector<double> x = ShapleyValues(sub);
      std::vector<CpOutcome> outcomes;
      std::vector<CpParams> cps;
      for (int k : admitted) {
        outcomes.push_back(report.cps[k].outcome);
        cps.push_back(scenario.cps[k]);
      }
      const Settlements t =
          ComputeSettlements(sub, outcomes, cps, scenario.market, w);
      for (std::size_t i = 0; i < admitted.size(); ++i) {
        CpReport& cp = report.cps[admitted[i]];
        cp.egalitarian = w[i];
        cp.shapley = x[i];
        cp.settlement = t.transfers[i];
      }
      report.isp.egalitarian = w.back();
      report.isp.shapley = x.back();
    }
  }
  if (!report.coalition_forms) {
    report.warnings.push_back("no coalition forms");
  }

  if (scenario.bargain) {
    std::vector<int> players;
    if (scenario.bargain_admitted_only) {
      players = admitted;
    } else {
      for (std::size_t k = 0; k < k_count; ++k) {
        players.push_back(static_cast<int>(k));
      }
    }
    if (!players.empty()) {
      const CoalitionGame bgame = game.Restrict(players);
      report.bargain_players = players;
      report.equilibrium =
          VerifySubgameEfficiency(bgame, scenario.bargain->discount);
      report.simulation = Simulate(bgame, *scenario.bargain);
      const SimulationReport& sim = *report.simulation;
      for (std::size_t i = 0; i < players.size(); ++i) {
        report.cps[players[i]].bargain_mean = sim.mean_payoff[i];
        report.cps[players[i]].bargain_std_error = sim.std_error[i];
      }
      report.isp.bargain_mean = sim.mean_payoff.back();
      report.isp.bargain_std_error = sim.std_error.back();
      if (!sim.efficient_regime) {
        report.warnings.push_back("bargaining: " + sim.regime_label());
      }
    }
  }
  return report;
}

SweepTable RunSweep(const Scenario& scenario, int threads) {
  if (!scenario.sweep) {
    throw std::invalid_argument("sweep: scenario has no sweep section");
  }
  scenario.Validate();
  const SweepSpec& plan = *scenario.sweep;
  SweepTable table;
  table.parameter = plan.parameter;
  table.points.resize(plan.values.size());

  const auto evaluate = [&](std::size_t i) {
    SweepPoint& point = table.points[i];
    point.value = plan.values[i];
    try {
      Scenario s = scenario;
      s.sweep.reset();
      ApplyParameter(s, plan.parameter, point.value);
      if (!plan.wants("bargain")) s.bargain.reset();
      point.report = RunPipeline(s);
    } catch (const std::exception& e) {
      point.error = e.what();
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::max(threads, 1)), 1, table.points.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < table.points.size(); i = next++) {
      evaluate(i);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return table;
}

bool ReferenceComparison::all_pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ReferenceCheck& c) { return c.pass; });
}

Scenario BenchmarkScenario(double isp_cache_unit_cost, Regime regime) {
  Scenario s;
  s.id = fmt::format("benchmark_{}_eta_s_{:g}", RegimeName(regime),
                     isp_cache_unit_cost);
  s.cps.assign(1, CpParams{});
  s.cps[0].elasticity = 1.5;
  s.cps[0].fixed_cost = 0;
  s.fixed_beta.assign(1, std::nullopt);
  s.market.isp_fixed_cost = 0;
  s.market.isp_cache_unit_cost = isp_cache_unit_cost;
  SetNetNeutrality(s, regime == Regime::kNetNeutral);
  return s;
}

ReferenceComparison ReproduceReferenceTables() {
  using Clock = std::chrono::steady_clock;
  ReferenceComparison out;
  for (const Reference& ref : kReferences) {
    const Scenario s = BenchmarkScenario(ref.isp_cache_unit_cost, ref.regime);
    const auto start = Clock::now();
    const CpOutcome o =
        OptimizeCp(s.cps[0], s.market, ref.regime, s.design);
    const double seconds =
        std::chrono::duration<double>(Clock::now() - start).count();
    (ref.regime == Regime::kNetNeutral ? out.net_neutral_seconds
                                       : out.non_neutral_seconds) += seconds;
    const DerivedState state = EvaluateDesign(o.design, s.cps[0], s.market);
    out.checks.push_back(Compare(ref, "p", ref.price, o.design.price));
    out.checks.push_back(Compare(ref, "h", ref.hit_prob, state.hit_prob));
    out.checks.push_back(Compare(ref, "S", ref.cache, o.design.cache_size));
    if (ref.regime == Regime::kNonNeutral) {
      out.checks.push_back(
          Compare(ref, "beta", ref.beta, o.design.capacity_increment));
    }
    out.checks.push_back(Compare(ref, "v", ref.value, o.virtual_profit));
  }
  return out;
}

}  // namespace consortium
