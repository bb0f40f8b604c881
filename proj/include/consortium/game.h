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

#ifndef CONSORTIUM_GAME_H_
#define CONSORTIUM_GAME_H_

// The characteristic-function game between K CPs and one ISP.
//
// Players 0..K-1 are the CPs and player K is the ISP. A coalition that
// contains the ISP and a nonempty CP set T is worth sum_{k in T} v_k - F;
// every other coalition, the ISP alone included, is worth zero.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "consortium/design.h"
#include "consortium/model.h"

namespace consortium {

// Largest K the bitmask representation supports.
inline constexpr int kMaxCps = 30;

// A set of players stored as a bitmask; bit i is player i.
class Coalition {
 public:
  constexpr Coalition() = default;
  constexpr explicit Coalition(std::uint32_t mask) : mask_(mask) {}

  static Coalition Of(std::initializer_list<int> players);

  constexpr std::uint32_t mask() const { return mask_; }
  constexpr bool empty() const { return mask_ == 0; }
  constexpr bool contains(int player) const {
    return (mask_ >> player) & 1u;
  }
  int size() const;
  std::vector<int> members() const;

  constexpr Coalition with(int player) const {
    return Coalition(mask_ | (1u << player));
  }
  constexpr Coalition without(int player) const {
    return Coalition(mask_ & ~(1u << player));
  }
  constexpr bool subset_of(Coalition other) const {
    return (mask_ & ~other.mask_) == 0;
  }

  friend constexpr bool operator==(Coalition, Coalition) = default;

 private:
  std::uint32_t mask_ = 0;
};

class CoalitionGame {
 public:
  // Throws std::invalid_argument for K < 1, K > kMaxCps, negative F or
  // nonfinite values.
  CoalitionGame(std::vector<double> cp_values, double isp_fixed_cost);

  int cp_count() const { return static_cast<int>(cp_values_.size()); }
  int player_count() const { return cp_count() + 1; }
  int isp() const { return cp_count(); }
  const std::vector<double>& cp_values() const { return cp_values_; }
  double cp_value(int k) const { return cp_values_[k]; }
  double isp_fixed_cost() const { return isp_fixed_cost_; }

  Coalition grand() const {
    return Coalition((std::uint32_t{1} << player_count()) - 1);
  }
  Coalition all_cps() const { return grand().without(isp()); }

  // Characteristic function value. Not clamped at zero.
  double Value(Coalition coalition) const;
  double PerCapita(Coalition coalition) const;

  // The game among the listed CPs (in the given order) and the same ISP.
  CoalitionGame Restrict(std::span<const int> cps) const;

 private:
  std::vector<double> cp_values_;
  double isp_fixed_cost_;
};

// min_k v_k >= v(grand) / (K + 1).
bool AdmissionCondition(const CoalitionGame& game);

// (v_avg + F) / (K + 1) >= v_avg - v_min; equivalent to AdmissionCondition.
bool SubsidyGapCondition(const CoalitionGame& game);

// PC(Psi+) >= PC(Theta+) for every nested pair of CP sets with Theta
// nonempty and Theta a strict subset of Psi. Exhaustive; K <= 15.
bool PerCapitaMonotone(const CoalitionGame& game);

struct PerCapitaViolation {
  Coalition larger;   // Psi+, ISP included
  Coalition smaller;  // Theta+, with PC(Theta+) > PC(Psi+)
};

// First violating pair found, scanning Psi in descending mask order.
std::optional<PerCapitaViolation> FindPerCapitaViolation(
    const CoalitionGame& game);

struct Removal {
  int cp = 0;  // index in the original game
  double value = 0.0;
  std::string reason;
};

struct AdmissionResult {
  std::vector<int> admitted;  // original indices, ascending
  std::vector<Removal> removals;

  bool any_admitted() const { return !admitted.empty(); }
};

// Drops CPs with v_k <= 0, then repeatedly drops the smallest remaining
// contributor (lowest index on ties) until the admission condition holds.
AdmissionResult AdmissionControl(const CoalitionGame& game);

// v(grand) / (K + 1) for every player. Throws ContractViolation if the
// admission condition fails.
std::vector<double> EgalitarianPayoffs(const CoalitionGame& game);

struct Settlements {
  std::vector<double> transfers;  // T_k, paid by CP k to the ISP
  double isp_payoff = 0.0;        // recomputed from the transfers
};

// T_k = (p_k - c) n_k - c_S S_k - f_k - w_k. Verifies that the ISP's payoff
// rebuilt from the transfers equals w_ISP to 1e-9 relative and throws
// ConsistencyError otherwise.
Settlements ComputeSettlements(const CoalitionGame& game,
                               std::span<const CpOutcome> outcomes,
                               std::span<const CpParams> cps,
                               const MarketParams& market,
                               std::span<const double> payoffs);

// x_k = v_k / 2 - F / (K (K + 1)); x_ISP = sum v / 2 - K F / (K + 1).
std::vector<double> ShapleyClosedForm(const CoalitionGame& game);

// Marginal contributions averaged over all (K + 1)! orderings.
// Throws std::invalid_argument for K > 10.
std::vector<double> ShapleyBruteForce(const CoalitionGame& game);

// Closed form when every v_k > 0, brute force otherwise (K <= 10).
std::vector<double> ShapleyValues(const CoalitionGame& game);

// Admission condition of the game left after the given CPs drop out.
// Dropping every CP leaves no coalition to test and returns true.
bool SustainabilityCheck(const CoalitionGame& game, Coalition dropouts);

}  // namespace consortium

#endif  // CONSORTIUM_GAME_H_
