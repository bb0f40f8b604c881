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

#include "consortium/design.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <fmt/core.h>

namespace consortium {
namespace {

double ProfitCoefficient(double beta, const CpParams& cp,
                         const MarketParams& market) {
  const double eps = cp.elasticity;
  const double markup = std::pow(eps - 1, eps - 1) / std::pow(eps, eps);
  const double marginal_cost =
      market.subscriber_cost + market.isp_capacity_unit_cost * beta;
  return markup * cp.demand_pool / std::pow(marginal_cost, eps - 1);
}

double CombinedCacheCost(const CpParams& cp, const MarketParams& market) {
  return cp.cache_unit_cost + market.isp_cache_unit_cost;
}

// Bisects a function that is positive at lo and nonpositive at hi.
double BisectSignChange(const std::function<double(double)>& f, double lo,
                        double hi, double tolerance) {
  while (hi - lo > tolerance) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) > 0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo + 0.5 * (hi - lo);
}

std::vector<double> GeometricGrid(double lo, double hi, int points) {
  std::vector<double> grid(points);
  const double ratio = std::log(hi / lo) / (points - 1);
  for (int i = 0; i < points; ++i) grid[i] = lo * std::exp(ratio * i);
  grid.back() = hi;
  return grid;
}

bool Settled(double previous, double current, double tolerance) {
  return std::abs(current - previous) <=
         tolerance * std::max(std::abs(previous), std::abs(current));
}

CpOutcome MakeOutcome(double beta, const CacheOptimum& cache,
                      const CpParams& cp, const MarketParams& market) {
  CpOutcome out;
  out.design.capacity_increment = beta;
  out.design.cache_size = cache.cache_size;
  out.design.price = OptimalPrice(cp.elasticity, market.subscriber_cost,
                                  market.isp_capacity_unit_cost, beta);
  const VirtualProfit vp =
      EvaluateVirtualProfit(beta, cache.cache_size, cp, market);
  out.virtual_profit = vp.value;
  out.profit_coefficient = vp.coefficient;
  out.interior_cache = cache.interior;
  out.cache_at_boundary = cache.at_boundary;
  out.capacity_condition =
      CapacitySignFactor(0.0, cache.cache_size, cp, market) > 0;
  return out;
}

struct Alternation {
  CpOutcome outcome;
  bool converged = false;
};

Alternation Alternate(double beta, const CpParams& cp,
                      const MarketParams& market,
                      const DesignOptions& options) {
  Alternation run;
  double cache_size = 0.0;
  CacheOptimum cache;
  CapacityOptimum capacity;
  bool first = true;
  int iteration = 0;
  for (; iteration < options.max_iterations; ++iteration) {
    cache = OptimizeCache(beta, cp, market, options);
    capacity = OptimizeCapacity(cache.cache_size, cp, market,
                                Regime::kNonNeutral, options);
    const bool settled =
        !first &&
        Settled(cache_size, cache.cache_size, options.relative_tolerance) &&
        Settled(beta, capacity.beta, options.relative_tolerance);
    first = false;
    cache_size = cache.cache_size;
    beta = capacity.beta;
    if (settled) {
      run.converged = true;
      break;
    }
  }
  // The last capacity step may have moved beta; re-fit the cache to it.
  cache = OptimizeCache(beta, cp, market, options);
  run.outcome = MakeOutcome(beta, cache, cp, market);
  run.outcome.interior_beta = beta > 0 && !capacity.at_cap;
  run.outcome.beta_at_cap = capacity.at_cap;
  run.outcome.iterations = iteration + 1;
  return run;
}

}  // namespace

const char* RegimeName(Regime regime) {
  return regime == Regime::kNetNeutral ? "NN" : "NNN";
}

void DesignOptions::Validate() const {
  if (!(beta_max > 0) || !std::isfinite(beta_max)) {
    throw std::invalid_argument(
        fmt::format("design.beta_max: must be positive (got {})", beta_max));
  }
  if (max_iterations < 1) {
    throw std::invalid_argument("design.max_iterations: must be at least 1");
  }
  if (!(relative_tolerance > 0) || !(root_tolerance > 0)) {
    throw std::invalid_argument("design tolerances must be positive");
  }
  if (beta_scan_points < 2 || grid_points < 2) {
    throw std::invalid_argument("design grids need at least 2 points");
  }
}

double OptimalPrice(double elasticity, double subscriber_cost,
                    double capacity_unit_cost, double beta) {
  if (!(elasticity > 1)) {
    throw std::domain_error(fmt::format(
        "elasticity must exceed 1 for an interior price (got {})",
        elasticity));
  }
  return elasticity / (elasticity - 1) *
         (subscriber_cost + capacity_unit_cost * beta);
}

VirtualProfit EvaluateVirtualProfit(double beta, double cache_size,
                                    const CpParams& cp,
                                    const MarketParams& market) {
  const double h = HitProbability(cache_size, cp.content_size);
  VirtualProfit out;
  out.coefficient = ProfitCoefficient(beta, cp, market);
  out.value = out.coefficient * std::log1p((market.capacity_gap() + beta) * h) -
              CombinedCacheCost(cp, market) * cache_size - cp.fixed_cost;
  return out;
}

double CacheDerivative(double beta, double cache_size, const CpParams& cp,
                       const MarketParams& market) {
  const double h = HitProbability(cache_size, cp.content_size);
  const double slope = market.capacity_gap() + beta;
  const double avg_capacity = slope * h + 1;
  return ProfitCoefficient(beta, cp, market) * slope /
             (std::log(cp.content_size) * avg_capacity * (cache_size + 1)) -
         CombinedCacheCost(cp, market);
}

double CapacitySignFactor(double beta, double cache_size, const CpParams& cp,
                          const MarketParams& market) {
  const double h = HitProbability(cache_size, cp.content_size);
  if (h == 0) return 0.0;
  const double gain = (market.capacity_gap() + beta) * h;
  const double qoe_term = h / ((gain + 1) * std::log1p(gain));
  const double cost_term =
      (cp.elasticity - 1) * market.isp_capacity_unit_cost /
      (market.subscriber_cost + market.isp_capacity_unit_cost * beta);
  return qoe_term - cost_term;
}

double CapacityDerivative(double beta, double cache_size, const CpParams& cp,
                          const MarketParams& market) {
  const double h = HitProbability(cache_size, cp.content_size);
  const double log_r = std::log1p((market.capacity_gap() + beta) * h);
  return CapacitySignFactor(beta, cache_size, cp, market) *
         ProfitCoefficient(beta, cp, market) * log_r;
}

bool CacheWorthwhile(double beta, const CpParams& cp,
                     const MarketParams& market) {
  const double marginal_profit = ProfitCoefficient(beta, cp, market) *
                                 (market.capacity_gap() + beta) /
                                 std::log(cp.content_size);
  return CombinedCacheCost(cp, market) < marginal_profit;
}

CacheOptimum OptimizeCache(double beta, const CpParams& cp,
                           const MarketParams& market,
                           const DesignOptions& options) {
  CacheOptimum out;
  if (!CacheWorthwhile(beta, cp, market)) return out;
  const double upper = cp.content_size - 1;
  if (CacheDerivative(beta, upper, cp, market) >= 0) {
    out.cache_size = upper;
    out.interior = true;
    out.at_boundary = true;
    return out;
  }
  out.cache_size = BisectSignChange(
      [&](double s) { return CacheDerivative(beta, s, cp, market); }, 0.0,
      upper, options.root_tolerance);
  out.interior = true;
  return out;
}

CapacityOptimum OptimizeCapacity(double cache_size, const CpParams& cp,
                                 const MarketParams& market, Regime regime,
                                 const DesignOptions& options) {
  CapacityOptimum out;
  if (regime == Regime::kNetNeutral) return out;
  if (market.isp_capacity_unit_cost == 0) {
    throw std::domain_error(
        "unbounded profit: capacity increments are free, so the virtual "
        "profit grows without bound in beta");
  }
  const auto psi = [&](double b) {
    return CapacitySignFactor(b, cache_size, cp, market);
  };
  out.existence_condition = psi(0.0) > 0;
  if (cache_size == 0) return out;

  std::vector<double> nodes{0.0};
  const std::vector<double> scan =
      GeometricGrid(options.beta_max * 1e-9, options.beta_max,
                    options.beta_scan_points);
  nodes.insert(nodes.end(), scan.begin(), scan.end());

  std::vector<double> candidates{0.0};
  double prev = psi(nodes[0]);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double cur = psi(nodes[i]);
    if (prev > 0 && cur <= 0) {
      candidates.push_back(BisectSignChange(psi, nodes[i - 1], nodes[i],
                                            options.root_tolerance));
    }
    prev = cur;
  }
  if (prev > 0) candidates.push_back(options.beta_max);

  double best_value = -HUGE_VAL;
  for (double b : candidates) {
    const double value =
        EvaluateVirtualProfit(b, cache_size, cp, market).value;
    if (value > best_value) {
      best_value = value;
      out.beta = b;
    }
  }
  out.at_cap = out.beta == options.beta_max && prev > 0;
  out.interior = out.beta > 0 && !out.at_cap;
  return out;
}

CpOutcome OptimizeCp(const CpParams& cp, const MarketParams& market,
                     Regime regime, const DesignOptions& options) {
  cp.Validate();
  market.Validate();
  options.Validate();

  if (regime == Regime::kNetNeutral) {
    return OptimizeCpAtCapacity(cp, market, 0.0, options);
  }
  if (market.isp_capacity_unit_cost == 0) {
    throw std::domain_error(
        "unbounded profit: isp_capacity_unit_cost is zero with capacity "
        "increments allowed");
  }

  Alternation best = Alternate(0.0, cp, market, options);

  // Coordinate-wise ascent can stall at a point that is optimal along each
  // axis separately, e.g. (0, 0) when caching only pays with a large beta.
  double grid_beta = 0.0;
  double grid_value = -HUGE_VAL;
  const std::vector<double> betas =
      GeometricGrid(1e-3, options.beta_max, options.grid_points);
  const std::vector<double> caches =
      GeometricGrid(1e-3, cp.content_size - 1, options.grid_points);
  for (double b : betas) {
    for (double s : caches) {
      const double value = EvaluateVirtualProfit(b, s, cp, market).value;
      if (value > grid_value) {
        grid_value = value;
        grid_beta = b;
      }
    }
  }
  if (grid_value > best.outcome.virtual_profit) {
    Alternation polished = Alternate(grid_beta, cp, market, options);
    if (polished.outcome.virtual_profit > best.outcome.virtual_profit) {
      best = polished;
    }
  }
  if (!best.converged) {
    throw ConvergenceError(
        fmt::format("design optimization did not converge in {} iterations",
                    options.max_iterations),
        best.outcome);
  }
  return best.outcome;
}

CpOutcome OptimizeCpAtCapacity(const CpParams& cp, const MarketParams& market,
                               double beta, const DesignOptions& options) {
  cp.Validate();
  market.Validate();
  if (!(beta >= 0) || !std::isfinite(beta)) {
    throw std::invalid_argument(
        fmt::format("capacity increment must be nonnegative (got {})", beta));
  }
  const CacheOptimum cache = OptimizeCache(beta, cp, market, options);
  CpOutcome out = MakeOutcome(beta, cache, cp, market);
  out.interior_beta = false;
  out.iterations = 1;
  return out;
}

}  // namespace consortium
