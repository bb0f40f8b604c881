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

#ifndef CONSORTIUM_DESIGN_H_
#define CONSORTIUM_DESIGN_H_

// Profit-maximizing design of the virtual consortium formed by the ISP and a
// single CP. Once the subscriber price is set to its closed-form optimum the
// profit is a function V(beta, S) of the capacity increment and cache size:
//
//   V(beta, S) = a(beta) log R(beta, S) - (c_S + eta_S) S - f
//   a(beta)    = (eps-1)^(eps-1) / eps^eps * A / (c + eta_beta beta)^(eps-1)
//
// V is concave in S, so the cache optimum is either zero or the unique root
// of dV/dS. In beta it is not concave; dV/dbeta = psi(beta, S) a log R and
// the optimizer enumerates every sign change of psi.

#include <stdexcept>
#include <string>

#include "consortium/model.h"

namespace consortium {

enum class Regime {
  kNetNeutral,     // capacity increments forbidden, beta = 0
  kNonNeutral,     // beta chosen freely
};

const char* RegimeName(Regime regime);

struct DesignOptions {
  double beta_max = 1e4;        // search cap for the capacity increment
  int max_iterations = 200;     // alternating (S, beta) sweeps
  double relative_tolerance = 1e-8;
  double root_tolerance = 1e-10;  // absolute, in the root's argument
  int beta_scan_points = 400;   // geometric grid for psi sign changes
  int grid_points = 48;         // per axis for the joint cross-check

  void Validate() const;
};

struct CpOutcome {
  CpDesign design;
  double virtual_profit = 0.0;      // v = V(beta*, S*)
  double profit_coefficient = 0.0;  // a(beta*)
  bool interior_cache = false;      // cache condition held, so S* > 0
  bool cache_at_boundary = false;   // S* pinned at Sigma - 1
  bool interior_beta = false;       // a positive stationary beta was chosen
  bool beta_at_cap = false;         // beta* pinned at beta_max
  bool capacity_condition = false;  // psi(0, S*) > 0 held
  int iterations = 0;

  bool profitable() const { return virtual_profit > 0; }
};

// Optimization did not settle; best() holds the best point visited.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, CpOutcome best)
      : std::runtime_error(what), best_(best) {}
  const CpOutcome& best() const { return best_; }

 private:
  CpOutcome best_;
};

// p* = eps / (eps - 1) * (c + eta_beta beta). Throws std::domain_error when
// eps <= 1.
double OptimalPrice(double elasticity, double subscriber_cost,
                    double capacity_unit_cost, double beta);

struct VirtualProfit {
  double value = 0.0;        // V
  double coefficient = 0.0;  // a
};

VirtualProfit EvaluateVirtualProfit(double beta, double cache_size,
                                    const CpParams& cp,
                                    const MarketParams& market);

// Analytic dV/dS.
double CacheDerivative(double beta, double cache_size, const CpParams& cp,
                       const MarketParams& market);

// psi(beta, S). Zero at S = 0, where V does not depend on beta.
double CapacitySignFactor(double beta, double cache_size, const CpParams& cp,
                          const MarketParams& market);

// Analytic dV/dbeta = psi a log R.
double CapacityDerivative(double beta, double cache_size, const CpParams& cp,
                          const MarketParams& market);

// Strict inequality (c_S + eta_S) < a(beta) (delta_r + beta) / log Sigma,
// i.e. dV/dS > 0 at S = 0.
bool CacheWorthwhile(double beta, const CpParams& cp,
                     const MarketParams& market);

struct CacheOptimum {
  double cache_size = 0.0;
  bool interior = false;     // cache condition held
  bool at_boundary = false;
};

// Maximizer of V(beta, .) over [0, Sigma - 1].
CacheOptimum OptimizeCache(double beta, const CpParams& cp,
                           const MarketParams& market,
                           const DesignOptions& options = {});

struct CapacityOptimum {
  double beta = 0.0;
  bool interior = false;
  bool at_cap = false;
  bool existence_condition = false;  // psi(0, S) > 0
};

// Best capacity increment for a fixed cache size: brackets every sign change
// of psi on a geometric grid over (0, beta_max], bisects each, and keeps the
// candidate (0, roots, beta_max) with the largest V. Under Net Neutrality
// returns zero without searching. Throws std::domain_error if eta_beta is
// zero with capacity increments allowed, since V then grows without bound.
CapacityOptimum OptimizeCapacity(double cache_size, const CpParams& cp,
                                 const MarketParams& market, Regime regime,
                                 const DesignOptions& options = {});

// Joint optimum of price, capacity increment and cache size for one CP.
//
// Net Neutrality: beta = 0 and S from OptimizeCache. Otherwise alternates
// OptimizeCache / OptimizeCapacity from (0, 0) until both coordinates move by
// less than the relative tolerance, then cross-checks against a log-spaced
// (beta, S) grid whose best point seeds a second alternation; the better of
// the two results is returned. Throws ConvergenceError if the winning
// alternation did not converge.
CpOutcome OptimizeCp(const CpParams& cp, const MarketParams& market,
                     Regime regime, const DesignOptions& options = {});

// Cache-only optimum with beta pinned to a given value.
CpOutcome OptimizeCpAtCapacity(const CpParams& cp, const MarketParams& market,
                               double beta, const DesignOptions& options = {});

}  // namespace consortium

#endif  // CONSORTIUM_DESIGN_H_
