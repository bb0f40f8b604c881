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

#include "consortium/game.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/core.h>

#include "consortium/errors.h"

namespace consortium {
namespace {

double Sum(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0);
}

// Value of every ISP-containing coalition, indexed by CP mask.
std::vector<double> ValuesByCpMask(const CoalitionGame& game) {
  const int k = game.cp_count();
  std::vector<double> values(std::size_t{1} << k);
  for (std::uint32_t m = 0; m < values.size(); ++m) {
    values[m] = game.Value(Coalition(m).with(game.isp()));
  }
  return values;
}

}  // namespace

Coalition Coalition::Of(std::initializer_list<int> players) {
  Coalition c;
  for (int p : players) c = c.with(p);
  return c;
}

int Coalition::size() const { return std::popcount(mask_); }

std::vector<int> Coalition::members() const {
  std::vector<int> out;
  for (std::uint32_t m = mask_; m != 0; m &= m - 1) {
    out.push_back(std::countr_zero(m));
  }
  return out;
}

CoalitionGame::CoalitionGame(std::vector<double> cp_values,
                             double isp_fixed_cost)
    : cp_values_(std::move(cp_values)), isp_fixed_cost_(isp_fixed_cost) {
  if (cp_values_.empty() || cp_count() > kMaxCps) {
    throw std::invalid_argument(fmt::format(
        "a game needs between 1 and {} CPs (got {})", kMaxCps, cp_count()));
  }
  if (!(isp_fixed_cost_ >= 0) || !std::isfinite(isp_fixed_cost_)) {
    throw std::invalid_argument(fmt::format(
        "isp_fixed_cost must be finite and nonnegative (got {})",
        isp_fixed_cost_));
  }
  for (double v : cp_values_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("CP values must be finite");
    }
  }
}

double CoalitionGame::Value(Coalition coalition) const {
  if (!coalition.contains(isp())) return 0.0;
  const Coalition cps = coalition.without(isp());
  if (cps.empty()) return 0.0;
  double total = -isp_fixed_cost_;
  for (int k : cps.members()) total += cp_values_[k];
  return total;
}

double CoalitionGame::PerCapita(Coalition coalition) const {
  if (coalition.empty()) return 0.0;
  return Value(coalition) / coalition.size();
}

CoalitionGame CoalitionGame::Restrict(std::span<const int> cps) const {
  std::vector<double> values;
  values.reserve(cps.size());
  for (int k : cps) values.push_back(cp_values_.at(k));
  return CoalitionGame(std::move(values), isp_fixed_cost_);
}

bool AdmissionCondition(const CoalitionGame& game) {
  const auto& v = game.cp_values();
  const double v_min = *std::min_element(v.begin(), v.end());
  return v_min >= game.Value(game.grand()) / game.player_count();
}

bool SubsidyGapCondition(const CoalitionGame& game) {
  const auto& v = game.cp_values();
  const double v_min = *std::min_element(v.begin(), v.end());
  const double v_avg = Sum(v) / game.cp_count();
  return (v_avg + game.isp_fixed_cost()) / game.player_count() >=
         v_avg - v_min;
}

std::optional<PerCapitaViolation> FindPerCapitaViolation(
    const CoalitionGame& game) {
  if (game.cp_count() > 15) {
    throw std::invalid_argument(
        "per-capita monotonicity enumerates 3^K pairs; K <= 15");
  }
  const std::vector<double> values = ValuesByCpMask(game);
  for (std::uint32_t psi = static_cast<std::uint32_t>(values.size()) - 1;
       psi != 0; --psi) {
    const double pc_psi = values[psi] / (std::popcount(psi) + 1);
    for (std::uint32_t theta = (psi - 1) & psi; theta != 0;
         theta = (theta - 1) & psi) {
      if (values[theta] / (std::popcount(theta) + 1) > pc_psi) {
        return PerCapitaViolation{Coalition(psi).with(game.isp()),
                                  Coalition(theta).with(game.isp())};
      }
    }
  }
  return std::nullopt;
}

bool PerCapitaMonotone(const CoalitionGame& game) {
  return !FindPerCapitaViolation(game).has_value();
}

AdmissionResult AdmissionControl(const CoalitionGame& game) {
  AdmissionResult result;
  for (int k = 0; k < game.cp_count(); ++k) {
    if (game.cp_value(k) > 0) {
      result.admitted.push_back(k);
    } else {
      result.removals.push_back({k, game.cp_value(k), "nonpositive value"});
    }
  }
  while (!result.admitted.empty() &&
         !AdmissionCondition(game.Restrict(result.admitted))) {
    auto smallest = std::min_element(
        result.admitted.begin(), result.admitted.end(), [&](int a, int b) {
          return game.cp_value(a) < game.cp_value(b);
        });
    result.removals.push_back(
        {*smallest, game.cp_value(*smallest), "smallest contributor"});
    result.admitted.erase(smallest);
  }
  return result;
}

std::vector<double> EgalitarianPayoffs(const CoalitionGame& game) {
  if (!AdmissionCondition(game)) {
    throw ContractViolation(
        "egalitarian payoffs requested for a game that fails admission");
  }
  return std::vector<double>(game.player_count(),
                             game.Value(game.grand()) / game.player_count());
}

Settlements ComputeSettlements(const CoalitionGame& game,
                               std::span<const CpOutcome> outcomes,
                               std::span<const CpParams> cps,
                               const MarketParams& market,
                               std::span<const double> payoffs) {
  const int k_count = game.cp_count();
  if (static_cast<int>(outcomes.size()) != k_count ||
      static_cast<int>(cps.size()) != k_count ||
      static_cast<int>(payoffs.size()) != game.player_count()) {
    throw std::invalid_argument("settlement inputs do not match the game");
  }
  Settlements out;
  double capacity_cost = 0.0;
  double cache_cost = 0.0;
  double scale = market.isp_fixed_cost + std::abs(payoffs[game.isp()]);
  for (int k = 0; k < k_count; ++k) {
    const CpDesign& d = outcomes[k].design;
    const double n = EvaluateDesign(d, cps[k], market).subscribers;
    const double revenue = (d.price - market.subscriber_cost) * n;
    out.transfers.push_back(revenue - cps[k].cache_unit_cost * d.cache_size -
                            cps[k].fixed_cost - payoffs[k]);
    capacity_cost +=
        market.isp_capacity_unit_cost * d.capacity_increment * n;
    cache_cost += market.isp_cache_unit_cost * d.cache_size;
    scale += std::abs(revenue) + cps[k].fixed_cost + std::abs(payoffs[k]);
  }
  out.isp_payoff = Sum(out.transfers) - capacity_cost - cache_cost -
                   market.isp_fixed_cost;
  const double expected = payoffs[game.isp()];
  if (std::abs(out.isp_payoff - expected) > 1e-9 * scale) {
    throw ConsistencyError(fmt::format(
        "settlements imply an ISP payoff of {:.12g}, expected {:.12g}",
        out.isp_payoff, expected));
  }
  return out;
}

std::vector<double> ShapleyClosedForm(const CoalitionGame& game) {
  const double k = game.cp_count();
  const double f = game.isp_fixed_cost();
  std::vector<double> x;
  x.reserve(game.player_count());
  for (double v : game.cp_values()) x.push_back(v / 2 - f / (k * (k + 1)));
  x.push_back(Sum(game.cp_values()) / 2 - k * f / (k + 1));
  return x;
}

std::vector<double> ShapleyBruteForce(const CoalitionGame& game) {
  if (game.cp_count() > 10) {
    throw std::invalid_argument(fmt::format(
        "brute-force Shapley enumerates (K+1)! orderings; K <= 10 (got {})",
        game.cp_count()));
  }
  const int n = game.player_count();
  std::vector<double> value(std::size_t{1} << n);
  for (std::uint32_t m = 0; m < value.size(); ++m) {
    value[m] = game.Value(Coalition(m));
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> total(n, 0.0);
  double orderings = 0;
  do {
    std::uint32_t mask = 0;
    for (int player : order) {
      const std::uint32_t next = mask | (1u << player);
      total[player] += value[next] - value[mask];
      mask = next;
    }
    orderings += 1;
  } while (std::next_permutation(order.begin(), order.end()));
  for (double& t : total) t /= orderings;
  return total;
}

std::vector<double> ShapleyValues(const CoalitionGame& game) {
  const auto& v = game.cp_values();
  const bool positive =
      std::all_of(v.begin(), v.end(), [](double x) { return x > 0; });
  if (positive || game.cp_count() > 10) return ShapleyClosedForm(game);
  return ShapleyBruteForce(game);
}

bool SustainabilityCheck(const CoalitionGame& game, Coalition dropouts) {
  std::vector<int> remaining;
  for (int k = 0; k < game.cp_count(); ++k) {
    if (!dropouts.contains(k)) remaining.push_back(k);
  }
  if (remaining.empty()) return true;
  return AdmissionCondition(game.Restrict(remaining));
}

}  // namespace consortium
