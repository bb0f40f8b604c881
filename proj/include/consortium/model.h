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

#ifndef CONSORTIUM_MODEL_H_
#define CONSORTIUM_MODEL_H_

// Subscriber demand, quality of experience and profit accounting for one ISP
// serving K content providers (CPs) through a shared last mile.
//
// Every function here is a pure evaluation. Logarithms are natural.
//
// The default member values of CpParams and MarketParams are the base-case
// parameter set used throughout the project; scenario files override them
// field by field.

#include <span>
#include <vector>

namespace consortium {

// Economic parameters of one content provider.
struct CpParams {
  double demand_pool = 2e5;      // A: potential subscribers
  double elasticity = 1.5;       // eps > 1: constant price elasticity
  double content_size = 1e5;     // Sigma > 1, in cache units
  double cache_unit_cost = 0.5;  // c_S: CP's cost per installed cache unit
  double fixed_cost = 1e4;       // f

  // Throws std::invalid_argument naming the offending field.
  void Validate() const;
};

// Parameters of the ISP and of the shared last mile.
struct MarketParams {
  // Network capacity on a cache miss. Units are chosen so that it is one.
  static constexpr double kMissCapacity = 1.0;

  double isp_fixed_cost = 1e5;         // F, incurred only on agreement
  double isp_cache_unit_cost = 0.5;    // eta_S
  double isp_capacity_unit_cost = 0.1;  // eta_beta, per unit per subscriber
  double subscriber_cost = 1.0;        // c, per subscriber
  double hit_capacity = 4.0;           // r1 > kMissCapacity

  // delta_r = r1 - r2.
  double capacity_gap() const { return hit_capacity - kMissCapacity; }

  void Validate() const;
};

// A (price, capacity increment, cache size) triple for one CP.
struct CpDesign {
  double price = 1.0;
  double capacity_increment = 0.0;
  double cache_size = 0.0;
};

// Quantities implied by a design.
struct DerivedState {
  double hit_prob = 0.0;      // h in [0, 1]
  double avg_capacity = 1.0;  // R = (delta_r + beta) h + 1
  double qoe = 0.0;           // Q = log R
  double demand = 0.0;        // D = A / p^eps
  double subscribers = 0.0;   // n = D Q
};

// Unit prices the ISP charges one CP outside a coalition.
struct UnitPrices {
  double cache_price = 0.0;
  double capacity_price = 0.0;
};

// h = log(S + 1) / log(Sigma). Requires Sigma > 1 and 0 <= S <= Sigma - 1;
// throws std::domain_error otherwise.
double HitProbability(double cache_size, double content_size);

// Throws std::domain_error for a nonpositive price or an out-of-range design.
DerivedState EvaluateDesign(const CpDesign& design, const CpParams& cp,
                            const MarketParams& market);

// Operational profit of the virtual ISP/CP consortium at an arbitrary price:
// (p - c - eta_beta beta) n - (c_S + eta_S) S - f.
double OperationalProfit(const CpDesign& design, const CpParams& cp,
                         const MarketParams& market);

struct NoncoalitionalProfits {
  double isp = 0.0;
  std::vector<double> cps;
};

// Profits when the ISP resells cache and capacity at the given unit prices.
// If no CP has a cache (no agreement) every profit is zero, F included.
NoncoalitionalProfits EvaluateNoncoalitionalProfits(
    std::span<const CpDesign> designs, std::span<const UnitPrices> prices,
    std::span<const CpParams> cps, const MarketParams& market);

// Joint profit of the ISP with all given CPs: sum of operational profits
// minus F. Unit prices cancel out of this sum.
double IntegratedProfit(std::span<const CpDesign> designs,
                        std::span<const CpParams> cps,
                        const MarketParams& market);

}  // namespace consortium

#endif  // CONSORTIUM_MODEL_H_
