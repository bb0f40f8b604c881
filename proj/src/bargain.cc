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

#include "consortium/bargain.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include <Eigen/Dense>
#include <fmt/core.h>

#include "consortium/errors.h"

namespace consortium {
namespace {

// Relative slack when comparing surpluses that are equal in exact
// arithmetic.
constexpr double kSurplusSlack = 1e-12;

double SumOver(const std::vector<double>& values, Coalition members) {
  double total = 0.0;
  for (int j : members.members()) total += values[j];
  return total;
}

// Best proposal of one proposer against fixed continuation values.
struct Proposal {
  bool made = false;
  Coalition coalition;
  double surplus = 0.0;
};

Proposal BestProposal(const CoalitionGame& game, Coalition active,
                      int proposer, const std::vector<double>& continuation,
                      double discount) {
  const int isp = game.isp();
  Proposal best;
  const double scale =
      std::abs(game.Value(active)) + game.isp_fixed_cost() + 1.0;
  const auto consider = [&](Coalition theta) {
    const double value = game.Value(theta);
    if (!(value > 0)) return;
    const double surplus =
        value - discount * SumOver(continuation, theta.without(proposer));
    if (!best.made || surplus > best.surplus + kSurplusSlack * scale) {
      best = {true, theta, surplus};
    }
  };
  // The full active set goes first so that it wins ties.
  consider(active);
  const std::uint32_t required =
      Coalition().with(proposer).with(isp).mask();
  const std::uint32_t free_bits = active.mask() & ~required;
  for (std::uint32_t sub = free_bits;; sub = (sub - 1) & free_bits) {
    const Coalition theta(sub | required);
    if (theta != active && theta.subset_of(active)) consider(theta);
    if (sub == 0) break;
  }
  // Proposing is only worthwhile if it beats waiting a round.
  if (best.made &&
      best.surplus < discount * continuation[proposer] - kSurplusSlack * scale) {
    best.made = false;
  }
  return best;
}

struct ActivePlan {
  std::vector<int> members;
  std::vector<double> continuation;
  std::vector<Proposal> proposals;  // indexed like members
  bool terminal = false;            // no coalition with positive value
};

// Some ISP-containing coalition inside `active` has positive value iff the
// positive contributions alone outweigh F.
bool HasPositiveCoalition(const CoalitionGame& game, Coalition active) {
  if (!active.contains(game.isp())) return false;
  double best = -game.isp_fixed_cost();
  for (int k : active.without(game.isp()).members()) {
    best += std::max(0.0, game.cp_value(k));
  }
  return best > 0;
}

ActivePlan PlanFor(const CoalitionGame& game, Coalition active,
                   double discount) {
  ActivePlan plan;
  plan.members = active.members();
  if (!HasPositiveCoalition(game, active)) {
    plan.terminal = true;
    return plan;
  }
  if (game.Value(active) > 0) {
    plan.continuation = SolveContinuation(game, active, discount);
  } else {
    plan.continuation.assign(game.player_count(), 0.0);
  }
  for (int proposer : plan.members) {
    plan.proposals.push_back(
        BestProposal(game, active, proposer, plan.continuation, discount));
  }
  return plan;
}

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

TrialRecord RunTrial(const CoalitionGame& game, const BargainConfig& config,
                     std::uint64_t trial,
                     std::unordered_map<std::uint32_t, ActivePlan>& plans) {
  std::mt19937_64 rng(TrialSeed(config.seed, trial));
  TrialRecord record;
  record.payoffs.assign(game.player_count(), 0.0);
  Coalition active = game.grand();
  double weight = 1.0;
  for (int round = 1; round <= config.max_rounds; ++round) {
    auto it = plans.find(active.mask());
    if (it == plans.end()) {
      it = plans.emplace(active.mask(), PlanFor(game, active, config.discount))
               .first;
    }
    const ActivePlan& plan = it->second;
    if (plan.terminal) break;

    const std::size_t pick = UniformBelow(rng, plan.members.size());
    const int proposer = plan.members[pick];
    const Proposal& proposal = plan.proposals[pick];
    if (proposal.made) {
      // Responders are offered exactly discount * continuation and accept.
      for (int j : proposal.coalition.members()) {
        record.payoffs[j] +=
            weight * (j == proposer
                          ? proposal.surplus
                          : config.discount * plan.continuation[j]);
      }
      if (proposal.coalition.contains(game.isp())) {
        record.round = round;
        record.coalition = proposal.coalition;
      }
      active = Coalition(active.mask() & ~proposal.coalition.mask());
    }
    weight *= config.discount;
  }
  if (record.round == 0) {
    std::fill(record.payoffs.begin(), record.payoffs.end(), 0.0);
  }
  return record;
}

}  // namespace

void BargainConfig::Validate() const {
  if (!(discount > 0 && discount < 1)) {
    throw std::invalid_argument(fmt::format(
        "bargain.discount: must lie strictly inside (0, 1) (got {})",
        discount));
  }
  if (trials < 1) {
    throw std::invalid_argument("bargain.trials: must be positive");
  }
  if (max_rounds < 1) {
    throw std::invalid_argument("bargain.max_rounds: must be positive");
  }
  if (threads < 1) {
    throw std::invalid_argument("bargain.threads: must be positive");
  }
}

std::vector<double> SolveContinuation(const CoalitionGame& game,
                                      Coalition subgame, double discount) {
  if (!(discount > 0 && discount < 1)) {
    throw std::invalid_argument("discount must lie strictly inside (0, 1)");
  }
  if (!subgame.contains(game.isp()) || !subgame.subset_of(game.grand())) {
    throw std::invalid_argument("subgame must contain the ISP");
  }
  const double value = game.Value(subgame);
  if (subgame.size() > 1 && !(value > 0)) {
    throw std::invalid_argument(fmt::format(
        "continuation values need a subgame with positive value (got {})",
        value));
  }
  const std::vector<int> members = subgame.members();
  const int n = static_cast<int>(members.size());
  // n c_i - (n-1) delta c_i + delta sum_{j != i} c_j = v(N)
  Eigen::MatrixXd system = Eigen::MatrixXd::Constant(n, n, discount);
  system.diagonal().setConstant(n - (n - 1) * discount);
  const Eigen::VectorXd rhs = Eigen::VectorXd::Constant(n, value);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  if (!lu.isInvertible()) {
    throw ConsistencyError("continuation system is singular");
  }
  const Eigen::VectorXd solution = lu.solve(rhs);
  std::vector<double> out(game.player_count(), 0.0);
  for (int i = 0; i < n; ++i) out[members[i]] = solution[i];
  return out;
}

EquilibriumReport VerifySubgameEfficiency(const CoalitionGame& game,
                                          double discount) {
  if (game.cp_count() > 15) {
    throw std::invalid_argument(
        "subgame efficiency is checked exhaustively; K <= 15");
  }
  EquilibriumReport report;
  const int isp = game.isp();
  const double grand_value = game.Value(game.grand());
  report.continuation =
      grand_value > 0 ? SolveContinuation(game, game.grand(), discount)
                      : std::vector<double>(game.player_count(), 0.0);

  const std::uint32_t cp_masks = std::uint32_t{1} << game.cp_count();
  for (std::uint32_t m = cp_masks - 1; m != 0 && !report.witness; --m) {
    const Coalition subgame = Coalition(m).with(isp);
    const double value = game.Value(subgame);
    const double scale = std::abs(value) + game.isp_fixed_cost() + 1.0;
    if (!(value > 0)) {
      // The full coalition cannot be proposed; any positive sub-coalition
      // is a deviation the protocol allows.
      for (std::uint32_t sub = (m - 1) & m; sub != 0; sub = (sub - 1) & m) {
        const Coalition theta = Coalition(sub).with(isp);
        if (game.Value(theta) > 0) {
          report.witness = DeviationWitness{subgame, isp, theta,
                                            game.Value(theta), value};
          break;
        }
      }
      continue;
    }
    const std::vector<double> c = SolveContinuation(game, subgame, discount);
    for (int proposer : subgame.members()) {
      const double full =
          value - discount * SumOver(c, subgame.without(proposer));
      const std::uint32_t required = Coalition().with(proposer).with(isp).mask();
      const std::uint32_t free_bits = subgame.mask() & ~required;
      for (std::uint32_t sub = free_bits;; sub = (sub - 1) & free_bits) {
        const Coalition theta(sub | required);
        const double theta_value = game.Value(theta);
        if (theta != subgame && theta_value > 0) {
          const double surplus =
              theta_value - discount * SumOver(c, theta.without(proposer));
          if (surplus > full + kSurplusSlack * scale) {
            report.witness =
                DeviationWitness{subgame, proposer, theta, surplus, full};
            break;
          }
        }
        if (sub == 0) break;
      }
      if (report.witness) break;
    }
  }
  report.subgame_efficient = !report.witness.has_value();
  report.per_capita_witness = FindPerCapitaViolation(game);
  report.per_capita_monotone = !report.per_capita_witness.has_value();
  return report;
}

std::string SimulationReport::regime_label() const {
  return efficient_regime
             ? "efficient regime"
             : "non-efficient regime - payoffs protocol-dependent";
}

std::uint64_t TrialSeed(std::uint64_t seed, std::uint64_t trial) {
  return SplitMix64(seed ^ SplitMix64(trial));
}

std::uint64_t UniformBelow(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("empty range");
  // Largest multiple of bound that fits, so every residue is equally likely.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return draw % bound;
}

SimulationReport Simulate(const CoalitionGame& game,
                          const BargainConfig& config) {
  config.Validate();
  SimulationReport report;
  report.efficient_regime =
      VerifySubgameEfficiency(game, config.discount).subgame_efficient;
  report.continuation =
      game.Value(game.grand()) > 0
          ? SolveContinuation(game, game.grand(), config.discount)
          : std::vector<double>(game.player_count(), 0.0);

  const auto trials = static_cast<std::size_t>(config.trials);
  report.trials.resize(trials);
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(config.threads), trials);
  const auto run_range = [&](std::size_t begin, std::size_t end) {
    std::unordered_map<std::uint32_t, ActivePlan> plans;
    for (std::size_t t = begin; t < end; ++t) {
      report.trials[t] = RunTrial(game, config, t, plans);
    }
  };
  if (workers <= 1) {
    run_range(0, trials);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (trials + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(trials, begin + chunk);
      if (begin < end) pool.emplace_back(run_range, begin, end);
    }
  }

  const int players = game.player_count();
  const double n = static_cast<double>(trials);
  double agreements = 0.0;
  double round_sum = 0.0;
  for (const TrialRecord& r : report.trials) {
    if (r.round > 0) {
      agreements += 1;
      round_sum += r.round;
    }
  }
  for (int i = 0; i < players; ++i) {
    double sum = 0.0;
    for (const TrialRecord& r : report.trials) sum += r.payoffs[i];
    const double mean = sum / n;
    double squares = 0.0;
    for (const TrialRecord& r : report.trials) {
      squares += (r.payoffs[i] - mean) * (r.payoffs[i] - mean);
    }
    const double var = n > 1 ? squares / (n - 1) : 0.0;
    report.mean_payoff.push_back(mean);
    report.std_error.push_back(std::sqrt(var / n));
  }
  report.agreement_rate = agreements / n;
  report.mean_agreement_round = agreements > 0 ? round_sum / agreements : 0.0;
  return report;
}

}  // namespace consortium
