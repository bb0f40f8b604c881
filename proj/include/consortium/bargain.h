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

#ifndef CONSORTIUM_BARGAIN_H_
#define CONSORTIUM_BARGAIN_H_

// Random-proposer coalitional bargaining.
//
// Each round a proposer is drawn uniformly from the active players and
// proposes a coalition containing itself together with a payoff split; the
// other members answer in ascending id order. Agreement at round t pays each
// member delta^(t-1) times its share and removes the coalition from play.
//
// The candidate stationary profile studied here: every proposer offers the
// full active set, paying each responder delta times its continuation value;
// responders accept any offer at least that large.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "consortium/game.h"

namespace consortium {

struct BargainConfig {
  double discount = 0.99;
  std::int64_t trials = 100000;
  std::uint64_t seed = 20190801;
  int max_rounds = 1000;
  int threads = 1;

  void Validate() const;
};

// Solves, for every player i of the subgame N (n = |N|),
//   c_i = (1/n) [v(N) - delta sum_{j != i} c_j] + ((n-1)/n) delta c_i.
// Returns a vector indexed by player id, zero outside the subgame.
// Requires v(N) > 0 unless N is the ISP alone.
std::vector<double> SolveContinuation(const CoalitionGame& game,
                                      Coalition subgame, double discount);

struct DeviationWitness {
  Coalition subgame;
  int proposer = 0;
  Coalition deviation;
  double deviation_surplus = 0.0;
  double full_surplus = 0.0;
};

struct EquilibriumReport {
  std::vector<double> continuation;  // for the grand coalition
  bool subgame_efficient = false;    // no profitable one-shot deviation
  bool per_capita_monotone = false;  // per-capita profit grows with size
  std::optional<DeviationWitness> witness;
  std::optional<PerCapitaViolation> per_capita_witness;
};

// Checks the candidate profile in every ISP-containing subgame, for every
// proposer and every strict sub-coalition with positive value, and evaluates
// the per-capita monotonicity condition directly. K <= 15.
EquilibriumReport VerifySubgameEfficiency(const CoalitionGame& game,
                                          double discount);

struct TrialRecord {
  int round = 0;  // 0 when no agreement was reached
  Coalition coalition;
  std::vector<double> payoffs;  // discounted, per player
};

struct SimulationReport {
  bool efficient_regime = false;
  std::vector<double> mean_payoff;
  std::vector<double> std_error;
  std::vector<double> continuation;
  double agreement_rate = 0.0;
  double mean_agreement_round = 0.0;
  std::vector<TrialRecord> trials;

  std::string regime_label() const;
};

// Trial i draws from std::mt19937_64 seeded with TrialSeed(seed, i), so the
// output depends only on (game, config) and not on the thread count.
std::uint64_t TrialSeed(std::uint64_t seed, std::uint64_t trial);

// Uniform integer in [0, bound) by rejection on the raw 64-bit output.
std::uint64_t UniformBelow(std::mt19937_64& rng, std::uint64_t bound);

SimulationReport Simulate(const CoalitionGame& game,
                          const BargainConfig& config);

}  // namespace consortium

#endif  // CONSORTIUM_BARGAIN_H_
