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

#include "consortium/model.h"

#include <cmath>
#include <stdexcept>
#include <string>

#include <fmt/core.h>

namespace consortium {
namespace {

void Require(bool ok, const char* field, const char* reason, double value) {
  if (!ok) {
    throw std::invalid_argument(
        fmt::format("{}: {} (got {})", field, reason, value));
  }
}

}  // namespace

void CpParams::Validate() const {
  Require(std::isfinite(demand_pool) && demand_pool >= 0, "demand_pool",
          "must be finite and nonnegative", demand_pool);
  Require(std::isfinite(elasticity) && elasticity > 1, "elasticity",
          "must exceed 1", elasticity);
  Require(std::isfinite(content_size) && content_size > 1, "content_size",
          "must exceed 1", content_size);
  Require(std::isfinite(cache_unit_cost) && cache_unit_cost >= 0,
          "cache_unit_cost", "must be finite and nonnegative",
          cache_unit_cost);
  Require(std::isfinite(fixed_cost) && fixed_cost >= 0, "fixed_cost",
          "must be finite and nonnegative", fixed_cost);
}

void MarketParams::Validate() const {
  Require(std::isfinite(isp_fixed_cost) && isp_fixed_cost >= 0,
          "isp_fixed_cost", "must be finite and nonnegative", isp_fixed_cost);
  Require(std::isfinite(isp_cache_unit_cost) && isp_cache_unit_cost >= 0,
          "isp_cache_unit_cost", "must be finite and nonnegative",
          isp_cache_unit_cost);
  Require(std::isfinite(isp_capacity_unit_cost) &&
              isp_capacity_unit_cost >= 0,
          "isp_capacity_unit_cost", "must be finite and nonnegative",
          isp_capacity_unit_cost);
  Require(std::isfinite(subscriber_cost) && subscriber_cost > 0,
          "subscriber_cost", "must be positive", subscriber_cost);
  Require(std::isfinite(hit_capacity) && hit_capacity > kMissCapacity,
          "hit_capacity", "must exceed the miss capacity of 1", hit_capacity);
}

double HitProbability(double cache_size, double content_size) {
  if (!(content_size > 1) || !std::isfinite(content_size)) {
    throw std::domain_error(
        fmt::format("content size must exceed 1 (got {})", content_size));
  }
  if (!(cache_size >= 0) || cache_size > content_size - 1) {
    throw std::domain_error(fmt::format(
        "cache size {} outside [0, {}]", cache_size, content_size - 1));
  }
  return std::log1p(cache_size) / std::log(content_size);
}

DerivedState EvaluateDesign(const CpDesign& design, const CpParams& cp,
                            const MarketParams& market) {
  if (!(design.price > 0) || !std::isfinite(design.price)) {
    throw std::domain_error(
        fmt::format("price must be positive (got {})", design.price));
  }
  if (!(design.capacity_increment >= 0) ||
      !std::isfinite(design.capacity_increment)) {
    throw std::domain_error(fmt::format(
        "capacity increment must be nonnegative (got {})",
        design.capacity_increment));
  }
  DerivedState state;
  state.hit_prob = HitProbability(design.cache_size, cp.content_size);
  const double gain =
      (market.capacity_gap() + design.capacity_increment) * state.hit_prob;
  state.avg_capacity = gain + 1.0;
  state.qoe = std::log1p(gain);
  state.demand = cp.demand_pool * std::pow(design.price, -cp.elasticity);
  state.subscribers = state.demand * state.qoe;
  return state;
}

double OperationalProfit(const CpDesign& design, const CpParams& cp,
                         const MarketParams& market) {
  const DerivedState state = EvaluateDesign(design, cp, market);
  const double margin = design.price - market.subscriber_cost -
                        market.isp_capacity_unit_cost *
                            design.capacity_increment;
  return margin * state.subscribers -
         (cp.cache_unit_cost + market.isp_cache_unit_cost) *
             design.cache_size -
         cp.fixed_cost;
}

NoncoalitionalProfits EvaluateNoncoalitionalProfits(
    std::span<const CpDesign> designs, std::span<const UnitPrices> prices,
    std::span<const CpParams> cps, const MarketParams& market) {
  if (designs.size() != cps.size() || prices.size() != cps.size()) {
    throw std::invalid_argument(fmt::format(
        "got {} designs and {} price pairs for {} CPs", designs.size(),
        prices.size(), cps.size()));
  }
  NoncoalitionalProfits out;
  out.cps.assign(cps.size(), 0.0);

  bool agreement = false;
  for (const CpDesign& d : designs) agreement |= d.cache_size > 0;
  if (!agreement) return out;

  out.isp = -market.isp_fixed_cost;
  for (std::size_t k = 0; k < cps.size(); ++k) {
    const CpDesign& d = designs[k];
    const UnitPrices& t = prices[k];
    const DerivedState state = EvaluateDesign(d, cps[k], market);
    const double capacity_volume = d.capacity_increment * state.subscribers;
    out.isp += (t.capacity_price - market.isp_capacity_unit_cost) *
                   capacity_volume +
               (t.cache_price - market.isp_cache_unit_cost) * d.cache_size;
    out.cps[k] = (d.price - market.subscriber_cost) * state.subscribers -
                 t.capacity_price * capacity_volume -
                 (cps[k].cache_unit_cost + t.cache_price) * d.cache_size -
                 cps[k].fixed_cost;
  }
  return out;
}

double IntegratedProfit(std::span<const CpDesign> designs,
                        std::span<const CpParams> cps,
                        const MarketParams& market) {
  if (designs.size() != cps.size()) {
    throw std::invalid_argument("designs and CPs differ in length");
  }
  double total = -market.isp_fixed_cost;
  for (std::size_t k = 0; k < cps.size(); ++k) {
    total += OperationalProfit(designs[k], cps[k], market);
  }
  return total;
}

}  // namespace consortium
