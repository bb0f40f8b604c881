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

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "consortium/design.h"
#include "consortium/errors.h"
#include "gtest/gtest.h"
#include "oracle.h"

namespace consortium {
namespace {

double Sum(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

TEST(CoalitionTest, Basics) {
  const Coalition c = Coalition::Of({0, 2, 5});
  EXPECT_EQ(c.size(), 3);
  EXPECT_TRUE(c.contains(2));
  EXPECT_FALSE(c.contains(1));
  EXPECT_EQ(c.members(), (std::vector<int>{0, 2, 5}));
  EXPECT_TRUE(c.without(5).subset_of(c));
  EXPECT_EQ(c.without(2).with(2), c);
}

TEST(CharacteristicTest, CoalitionsWithoutIspAreWorthless) {
  const CoalitionGame g({10, 20, 30}, 5);
  EXPECT_EQ(g.Value(Coalition::Of({0, 1, 2})), 0);
  EXPECT_EQ(g.Value(Coalition::Of({g.isp()})), 0);
  EXPECT_EQ(g.Value(g.grand()), 55);
  EXPECT_EQ(g.Value(Coalition::Of({1, g.isp()})), 15);
}

TEST(CharacteristicTest, NotClamped) {
  const CoalitionGame g({1, 2}, 10);
  EXPECT_EQ(g.Value(g.grand()), -7);
}

TEST(CharacteristicTest, MarginalContributionIsOwnValue) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const auto r = oracle::DrawGame(rng, 8);
    const CoalitionGame g(r.values, r.fixed_cost);
    for (std::uint32_t m = 1; m < (1u << g.cp_count()); ++m) {
      const Coalition theta = Coalition(m).with(g.isp());
      for (int k = 0; k < g.cp_count(); ++k) {
        if (theta.contains(k)) continue;
        EXPECT_NEAR(g.Value(theta.with(k)) - g.Value(theta), r.values[k],
                    1e-9 * (1 + r.fixed_cost));
        EXPECT_GT(g.Value(theta.with(k)), g.Value(theta));
      }
    }
  }
}

TEST(AdmissionTest, HomogeneousCpsAlwaysAdmissible) {
  for (double f : {0.0, 1.0, 1e3, 1e9}) {
    EXPECT_TRUE(AdmissionCondition(CoalitionGame({7, 7, 7, 7}, f)));
  }
}

TEST(AdmissionTest, SubsidyGapFormAgrees) {
  std::mt19937_64 rng(2);
  int admissible = 0;
  for (int t = 0; t < 2000; ++t) {
    const auto r = oracle::DrawGame(rng, 8);
    const CoalitionGame g(r.values, r.fixed_cost);
    EXPECT_EQ(AdmissionCondition(g), SubsidyGapCondition(g));
    admissible += AdmissionCondition(g);
  }
  EXPECT_GT(admissible, 200);
  EXPECT_LT(admissible, 1800);
}

// Direct enumeration of nested pairs of nonempty CP sets.
bool PerCapitaByEnumeration(const std::vector<double>& v, double f) {
  const int k = static_cast<int>(v.size());
  const auto pc = [&](std::uint32_t m) {
    double total = -f;
    int size = 1;
    for (int j = 0; j < k; ++j) {
      if (m >> j & 1) {
        total += v[j];
        ++size;
      }
    }
    return total / size;
  };
  for (std::uint32_t psi = 1; psi < (1u << k); ++psi) {
    for (std::uint32_t theta = 1; theta < (1u << k); ++theta) {
      if ((theta & psi) != theta || theta == psi) continue;
      if (pc(theta) > pc(psi)) return false;
    }
  }
  return true;
}

TEST(AdmissionTest, EquivalentToPerCapitaMonotonicity) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 500; ++t) {
    const auto r = oracle::DrawGame(rng, 8);
    const CoalitionGame g(r.values, r.fixed_cost);
    const bool direct = PerCapitaByEnumeration(r.values, r.fixed_cost);
    EXPECT_EQ(AdmissionCondition(g), direct) << "game " << t;
    EXPECT_EQ(PerCapitaMonotone(g), direct) << "game " << t;
  }
}

TEST(AdmissionTest, PerCapitaWitnessIsAViolation) {
  const CoalitionGame g({1, 100}, 0);
  const auto w = FindPerCapitaViolation(g);
  ASSERT_TRUE(w.has_value());
  EXPECT_TRUE(w->smaller.subset_of(w->larger));
  EXPECT_GT(g.PerCapita(w->smaller), g.PerCapita(w->larger));
}

TEST(AdmissionControlTest, AdmissibleGameUnchanged) {
  const CoalitionGame g({50, 60, 70}, 30);
  ASSERT_TRUE(AdmissionCondition(g));
  const AdmissionResult r = AdmissionControl(g);
  EXPECT_EQ(r.admitted, (std::vector<int>{0, 1, 2}));
  EXPECT_TRUE(r.removals.empty());
}

TEST(AdmissionControlTest, NonpositiveValuesRemovedFirst) {
  const AdmissionResult r = AdmissionControl(CoalitionGame({-1, 0, -5}, 0));
  EXPECT_TRUE(r.admitted.empty());
  EXPECT_EQ(r.removals.size(), 3u);
  EXPECT_FALSE(r.any_admitted());
}

TEST(AdmissionControlTest, SmallestContributorLowestIndexFirst) {
  // v(K+)/(K+1) = (10 + 10 + 100 + 100 - 0) / 5 = 44 > 10: fails; drop CP 0,
  // then (220 - 10)/4 = 52.5 > 10: drop CP 1; finally 200/3 < 100.
  const AdmissionResult r =
      AdmissionControl(CoalitionGame({10, 10, 100, 100}, 0));
  ASSERT_EQ(r.removals.size(), 2u);
  EXPECT_EQ(r.removals[0].cp, 0);
  EXPECT_EQ(r.removals[1].cp, 1);
  EXPECT_EQ(r.admitted, (std::vector<int>{2, 3}));
}

TEST(AdmissionControlTest, ResultAlwaysAdmissible) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 500; ++t) {
    const auto r = oracle::DrawGame(rng, 8);
    const CoalitionGame g(r.values, r.fixed_cost);
    const AdmissionResult a = AdmissionControl(g);
    if (a.any_admitted()) {
      EXPECT_TRUE(AdmissionCondition(g.Restrict(a.admitted)));
    }
    EXPECT_EQ(a.admitted.size() + a.removals.size(),
              static_cast<std::size_t>(g.cp_count()));
  }
}

TEST(EgalitarianTest, EqualSplit) {
  EXPECT_EQ(EgalitarianPayoffs(CoalitionGame({10}, 4)),
            (std::vector<double>{3, 3}));
}

TEST(EgalitarianTest, RefusesInadmissibleGame) {
  EXPECT_THROW(EgalitarianPayoffs(CoalitionGame({1, 100}, 0)),
               ContractViolation);
}

TEST(EgalitarianTest, BudgetBalancedAndInCore) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    const auto r = oracle::DrawAdmissibleGame(rng, 8);
    const CoalitionGame g(r.values, r.fixed_cost);
    const std::vector<double> w = EgalitarianPayoffs(g);
    const double total = g.Value(g.grand());
    EXPECT_NEAR(Sum(w), total, 1e-9 * std::abs(total) + 1e-9);
    for (std::uint32_t m = 1; m < (1u << g.player_count()); ++m) {
      double share = 0;
      for (int i : Coalition(m).members()) share += w[i];
      EXPECT_GE(share, g.Value(Coalition(m)) - 1e-9 * (1 + r.fixed_cost));
    }
  }
}

TEST(ShapleyTest, TwoPlayers) {
  const CoalitionGame g({10}, 4);
  EXPECT_EQ(ShapleyClosedForm(g), (std::vector<double>{3, 3}));
  const auto b = ShapleyBruteForce(g);
  EXPECT_NEAR(b[0], 3, 1e-12);
  EXPECT_NEAR(b[1], 3, 1e-12);
}

TEST(ShapleyTest, NoFixedCostHalves) {
  const CoalitionGame g({2, 6, 10}, 0);
  const auto x = ShapleyBruteForce(g);
  EXPECT_NEAR(x[0], 1, 1e-12);
  EXPECT_NEAR(x[1], 3, 1e-12);
  EXPECT_NEAR(x[2], 5, 1e-12);
  EXPECT_NEAR(x[3], 9, 1e-12);
}

TEST(ShapleyTest, ClosedFormMatchesSubsetFormula) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 200; ++t) {
    const auto r = oracle::DrawGame(rng, 8);
    const CoalitionGame g(r.values, r.fixed_cost);
    const auto closed = ShapleyClosedForm(g);
    const auto brute = ShapleyBruteForce(g);
    const auto subsets = oracle::ShapleyBySubsets(r.values, r.fixed_cost);
    for (int i = 0; i < g.player_count(); ++i) {
      const double ref = static_cast<double>(subsets[i]);
      const double tol = 1e-9 * std::max(1.0, std::abs(ref));
      EXPECT_NEAR(closed[i], ref, tol);
      EXPECT_NEAR(brute[i], ref, tol);
    }
    EXPECT_NEAR(Sum(closed), g.Value(g.grand()),
                1e-9 * (Sum(r.values) + r.fixed_cost));
  }
}

TEST(ShapleyTest, NonpositiveValuesUseEnumeration) {
  const CoalitionGame g({-5, 10, 20}, 4);
  const auto x = ShapleyValues(g);
  const auto ref = oracle::ShapleyBySubsets({-5, 10, 20}, 4);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(x[i], static_cast<double>(ref[i]), 1e-12);
  }
}

TEST(ShapleyTest, RefusesLargeEnumeration) {
  EXPECT_THROW(ShapleyBruteForce(CoalitionGame(std::vector<double>(11, 1), 0)),
               std::invalid_argument);
}

TEST(SustainabilityTest, AnyDropoutPreservesAdmission) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 200; ++t) {
    const auto r = oracle::DrawAdmissibleGame(rng, 8);
    const CoalitionGame g(r.values, r.fixed_cost);
    for (std::uint32_t d = 0; d < (1u << g.cp_count()); ++d) {
      EXPECT_TRUE(SustainabilityCheck(g, Coalition(d)));
    }
  }
}

TEST(SustainabilityTest, SingleSurvivor) {
  const CoalitionGame g({100, 100, 100}, 50);
  EXPECT_TRUE(SustainabilityCheck(g, Coalition::Of({0, 1})));
}

TEST(SettlementTest, IdentityHoldsAndMatchesFormula) {
  CpParams cp;
  cp.elasticity = 1.5;
  cp.fixed_cost = 0;
  MarketParams m;
  m.isp_fixed_cost = 0;
  m.isp_cache_unit_cost = 1;
  const CpOutcome o = OptimizeCp(cp, m, Regime::kNonNeutral);
  const CoalitionGame g({o.virtual_profit}, 0);
  const std::vector<double> w = EgalitarianPayoffs(g);
  EXPECT_NEAR(w[0], o.virtual_profit / 2, 1e-9 * o.virtual_profit);
  const std::vector<CpOutcome> outcomes{o};
  const std::vector<CpParams> cps{cp};
  const Settlements s = ComputeSettlements(g, outcomes, cps, m, w);
  const double n = EvaluateDesign(o.design, cp, m).subscribers;
  const double expected = (o.design.price - 1) * n -
                          0.5 * o.design.cache_size - w[0];
  EXPECT_NEAR(s.transfers[0], expected, 1e-9 * std::abs(expected));
  EXPECT_NEAR(s.isp_payoff, w[1], 1e-9 * o.virtual_profit);
}

TEST(SettlementTest, EmptyDesign) {
  CpOutcome o;
  o.design = {3.0, 0.0, 0.0};
  CpParams cp;
  cp.fixed_cost = 42;
  MarketParams m;
  m.isp_fixed_cost = 0;
  const CoalitionGame g({-42}, 0);
  const std::vector<double> w{-21, -21};
  const Settlements s =
      ComputeSettlements(g, std::vector<CpOutcome>{o},
                         std::vector<CpParams>{cp}, m, w);
  EXPECT_DOUBLE_EQ(s.transfers[0], -42 - w[0]);
}

TEST(SettlementTest, InconsistentPayoffsDetected) {
  CpOutcome o;
  o.design = {3.0, 0.0, 100.0};
  o.virtual_profit =
      EvaluateVirtualProfit(0, 100, CpParams{}, MarketParams{}).value;
  const CoalitionGame g({o.virtual_profit}, 1e5);
  const std::vector<double> bogus{0, 12345};
  EXPECT_THROW(ComputeSettlements(g, std::vector<CpOutcome>{o},
                                  std::vector<CpParams>{CpParams{}},
                                  MarketParams{}, bogus),
               ConsistencyError);
}

TEST(SettlementTest, RandomizedIdentity) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const int k = 1 + static_cast<int>(6 * u(rng));
    MarketParams m;
    m.isp_fixed_cost = 1e4 * u(rng);
    std::vector<CpParams> cps(k);
    std::vector<CpOutcome> outcomes;
    std::vector<double> values;
    for (auto& cp : cps) {
      cp.elasticity = 1.2 + u(rng);
      cp.fixed_cost = 100 * u(rng);
      outcomes.push_back(OptimizeCp(cp, m, Regime::kNonNeutral));
      values.push_back(outcomes.back().virtual_profit);
    }
    const CoalitionGame g(values, m.isp_fixed_cost);
    if (!AdmissionCondition(g)) continue;
    EXPECT_NO_THROW(
        ComputeSettlements(g, outcomes, cps, m, EgalitarianPayoffs(g)));
    EXPECT_NO_THROW(
        ComputeSettlements(g, outcomes, cps, m, ShapleyValues(g)));
  }
}

}  // namespace
}  // namespace consortium
