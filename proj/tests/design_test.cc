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

#include <cmath>
#include <cstring>
#include <random>
#include <stdexcept>

#include "gtest/gtest.h"
#include "oracle.h"

namespace consortium {
namespace {

CpParams Benchmark() {
  CpParams cp;
  cp.elasticity = 1.5;
  cp.fixed_cost = 0;
  return cp;
}

MarketParams BenchmarkMarket(double eta_s) {
  MarketParams m;
  m.isp_fixed_cost = 0;
  m.isp_cache_unit_cost = eta_s;
  return m;
}

struct Draw {
  CpParams cp;
  MarketParams market;
};

Draw RandomInstance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Draw d;
  d.cp.demand_pool = std::pow(10.0, 3 + 3 * u(rng));
  d.cp.elasticity = 1.05 + 2.5 * u(rng);
  d.cp.content_size = std::pow(10.0, 2 + 4 * u(rng));
  d.cp.cache_unit_cost = 2 * u(rng);
  d.cp.fixed_cost = 1e4 * u(rng);
  d.market.isp_cache_unit_cost = std::pow(10.0, -1 + 4 * u(rng));
  d.market.isp_capacity_unit_cost = 0.01 + u(rng);
  d.market.subscriber_cost = 0.2 + 2 * u(rng);
  d.market.hit_capacity = 1.5 + 8 * u(rng);
  return d;
}

TEST(OptimalPriceTest, Markup) {
  EXPECT_DOUBLE_EQ(OptimalPrice(1.5, 1, 0.1, 0), 3);
  EXPECT_NEAR(OptimalPrice(1.5, 1, 0.1, 14.4), 7.32, 1e-12);
  EXPECT_DOUBLE_EQ(OptimalPrice(2, 1, 0, 0), 2);
  EXPECT_GT(OptimalPrice(1.2, 1, 0.1, 3), 1 + 0.1 * 3);
}

TEST(OptimalPriceTest, RejectsInelasticDemand) {
  EXPECT_THROW(OptimalPrice(1.0, 1, 0.1, 0), std::domain_error);
  EXPECT_THROW(OptimalPrice(0.5, 1, 0.1, 0), std::domain_error);
}

TEST(VirtualProfitTest, NothingInstalledCostsFixedCost) {
  const CpParams cp;
  EXPECT_EQ(EvaluateVirtualProfit(0, 0, cp, MarketParams{}).value,
            -cp.fixed_cost);
}

TEST(VirtualProfitTest, Coefficient) {
  const double expected = std::sqrt(0.5) / std::pow(1.5, 1.5) * 2e5;
  const VirtualProfit vp =
      EvaluateVirtualProfit(0, 0, Benchmark(), BenchmarkMarket(1));
  EXPECT_NEAR(vp.coefficient, expected, 1e-9 * expected);
  EXPECT_NEAR(vp.coefficient, 76980, 1);
}

TEST(VirtualProfitTest, ReferenceDesign) {
  EXPECT_NEAR(EvaluateVirtualProfit(0, 4211, Benchmark(), BenchmarkMarket(1))
                  .value,
              82612, 0.01 * 82612);
}

TEST(VirtualProfitTest, AgreesWithOracle) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const Draw d = RandomInstance(rng);
    const double beta = 100 * u(rng);
    const double s = (d.cp.content_size - 1) * u(rng);
    const double got = EvaluateVirtualProfit(beta, s, d.cp, d.market).value;
    const double want = static_cast<double>(
        oracle::Profit(oracle::From(d.cp, d.market), beta, s));
    EXPECT_NEAR(got, want, 1e-10 * (std::abs(want) + d.cp.fixed_cost + 1));
  }
}

TEST(OptimizeCacheTest, ReferenceCacheSize) {
  const CacheOptimum c = OptimizeCache(0, Benchmark(), BenchmarkMarket(1));
  EXPECT_TRUE(c.interior);
  EXPECT_NEAR(c.cache_size, 4211, 0.01 * 4211);
}

TEST(OptimizeCacheTest, ExpensiveCacheIsNotInstalled) {
  const CacheOptimum c = OptimizeCache(0, Benchmark(), BenchmarkMarket(1e5));
  EXPECT_FALSE(c.interior);
  EXPECT_EQ(c.cache_size, 0);
}

TEST(OptimizeCacheTest, ExactThresholdIsNotWorthwhile) {
  CpParams cp = Benchmark();
  cp.cache_unit_cost = 0;
  const double a = EvaluateVirtualProfit(0, 0, cp, BenchmarkMarket(0))
                       .coefficient;
  const MarketParams m = BenchmarkMarket(a * (4.0 - 1.0) / std::log(1e5));
  EXPECT_FALSE(CacheWorthwhile(0, cp, m));
  EXPECT_EQ(OptimizeCache(0, cp, m).cache_size, 0);
}

TEST(OptimizeCacheTest, PositiveIffConditionHolds) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int positive = 0;
  for (int i = 0; i < 500; ++i) {
    const Draw d = RandomInstance(rng);
    const double beta = u(rng) < 0.3 ? 0 : 50 * u(rng);
    const CacheOptimum c = OptimizeCache(beta, d.cp, d.market);
    // Independent form of the condition: dV/dS > 0 at S = 0.
    const auto p = oracle::From(d.cp, d.market);
    const oracle::Real slope = oracle::Coefficient(p, beta) *
                                   (p.r1 - 1 + beta) / std::log(p.sigma) -
                               (p.c_s + p.eta_s);
    EXPECT_EQ(c.cache_size > 0, slope > 0) << "draw " << i;
    EXPECT_EQ(c.interior, c.cache_size > 0);
    positive += c.cache_size > 0;
    if (c.cache_size > 0 && !c.at_boundary) {
      EXPECT_NEAR(CacheDerivative(beta, c.cache_size, d.cp, d.market), 0,
                  1e-6 * (p.c_s + p.eta_s));
    }
  }
  EXPECT_GT(positive, 50);
  EXPECT_LT(positive, 450);
}

TEST(OptimizeCacheTest, ConcaveInCache) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const Draw d = RandomInstance(rng);
    const double beta = 50 * u(rng);
    const double sigma = d.cp.content_size;
    for (int j = 0; j < 100; ++j) {
      const double s = 1 + (sigma - 3) * u(rng);
      const double h = std::min(0.1 * s, (sigma - 1 - s) / 2);
      const auto v = [&](double x) {
        return EvaluateVirtualProfit(beta, x, d.cp, d.market).value;
      };
      const double second = (v(s + h) - 2 * v(s) + v(s - h)) / (h * h);
      const double noise = 1e-15 * std::abs(v(s)) / (h * h);
      EXPECT_LE(second, 1e-9 + 8 * noise);
    }
  }
}

TEST(OptimizeCapacityTest, ReferenceCapacity) {
  const CapacityOptimum c = OptimizeCapacity(
      3699.7, Benchmark(), BenchmarkMarket(1), Regime::kNonNeutral);
  EXPECT_TRUE(c.interior);
  EXPECT_NEAR(c.beta, 14.4, 0.02 * 14.4);
  EXPECT_TRUE(c.existence_condition);
}

TEST(OptimizeCapacityTest, NetNeutralityForbidsCapacity) {
  EXPECT_EQ(OptimizeCapacity(3699.7, Benchmark(), BenchmarkMarket(1),
                             Regime::kNetNeutral)
                .beta,
            0);
}

TEST(OptimizeCapacityTest, FreeCapacityIsRejected) {
  MarketParams m = BenchmarkMarket(1);
  m.isp_capacity_unit_cost = 0;
  EXPECT_THROW(
      OptimizeCapacity(100, Benchmark(), m, Regime::kNonNeutral),
      std::domain_error);
}

TEST(OptimizeCapacityTest, CostlyCapacityStaysAtZero) {
  MarketParams m = BenchmarkMarket(1);
  m.isp_capacity_unit_cost = 50;
  const CpParams cp = Benchmark();
  EXPECT_LT(CapacitySignFactor(0, 100, cp, m), 0);
  const CapacityOptimum c = OptimizeCapacity(100, cp, m, Regime::kNonNeutral);
  EXPECT_EQ(c.beta, 0);
  EXPECT_FALSE(c.existence_condition);
}

TEST(CapacityDerivativeTest, SignFollowsSignFactor) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Draw d = RandomInstance(rng);
    const double beta = 200 * u(rng);
    const double s = 1 + (d.cp.content_size - 2) * u(rng);
    const double psi = CapacitySignFactor(beta, s, d.cp, d.market);
    const double dv = CapacityDerivative(beta, s, d.cp, d.market);
    if (psi != 0) {
      EXPECT_EQ(std::signbit(psi), std::signbit(dv));
    }
  }
}

TEST(DerivativesTest, MatchFiniteDifferences) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Draw d = RandomInstance(rng);
    const auto p = oracle::From(d.cp, d.market);
    const double beta = 0.01 * std::pow(1e4, u(rng));
    const double s = std::pow(d.cp.content_size - 2, u(rng)) * 0.999;
    const oracle::Real fd_s = oracle::Derivative(
        [&](oracle::Real x) { return oracle::Profit(p, beta, x); }, s,
        1e-4L * s);
    const oracle::Real fd_b = oracle::Derivative(
        [&](oracle::Real x) { return oracle::Profit(p, x, s); }, beta,
        1e-4L * beta);
    const double an_s = CacheDerivative(beta, s, d.cp, d.market);
    const double an_b = CapacityDerivative(beta, s, d.cp, d.market);
    EXPECT_LT(std::abs(an_s - fd_s) / std::abs(fd_s), 1e-6) << "draw " << i;
    EXPECT_LT(std::abs(an_b - fd_b) / std::abs(fd_b), 1e-6) << "draw " << i;
  }
}

TEST(OptimizeCpTest, NonNeutralColumn) {
  const CpOutcome o =
      OptimizeCp(Benchmark(), BenchmarkMarket(100), Regime::kNonNeutral);
  const double h = HitProbability(o.design.cache_size, 1e5);
  EXPECT_NEAR(o.design.price, 9.3, 0.02 * 9.3);
  EXPECT_NEAR(h, 0.388, 0.02 * 0.388);
  EXPECT_NEAR(o.design.cache_size, 86.8, 0.02 * 86.8);
  EXPECT_NEAR(o.design.capacity_increment, 21, 0.02 * 21);
  EXPECT_NEAR(o.virtual_profit, 93360, 0.02 * 93360);
  EXPECT_TRUE(o.interior_cache);
  EXPECT_TRUE(o.interior_beta);
}

TEST(OptimizeCpTest, NeutralColumn) {
  const CpOutcome o =
      OptimizeCp(Benchmark(), BenchmarkMarket(100), Regime::kNetNeutral);
  EXPECT_EQ(o.design.capacity_increment, 0);
  EXPECT_NEAR(o.design.cache_size, 90.7, 0.02 * 90.7);
  EXPECT_NEAR(o.virtual_profit, 50786, 0.02 * 50786);
}

TEST(OptimizeCpTest, HugeFixedCostIsUnprofitable) {
  CpParams cp;
  cp.fixed_cost = 1e9;
  const CpOutcome o = OptimizeCp(cp, MarketParams{}, Regime::kNonNeutral);
  EXPECT_LT(o.virtual_profit, 0);
  EXPECT_FALSE(o.profitable());
}

TEST(OptimizeCpTest, Deterministic) {
  const CpOutcome a =
      OptimizeCp(Benchmark(), BenchmarkMarket(1e4), Regime::kNonNeutral);
  const CpOutcome b =
      OptimizeCp(Benchmark(), BenchmarkMarket(1e4), Regime::kNonNeutral);
  EXPECT_EQ(0, std::memcmp(&a.design, &b.design, sizeof(CpDesign)));
  EXPECT_EQ(0, std::memcmp(&a.virtual_profit, &b.virtual_profit,
                           sizeof(double)));
}

TEST(OptimizeCpTest, NeutralPriceIgnoresCacheParameters) {
  std::mt19937_64 rng(37);
  for (int i = 0; i < 100; ++i) {
    const Draw d = RandomInstance(rng);
    const CpOutcome o = OptimizeCp(d.cp, d.market, Regime::kNetNeutral);
    const double eps = d.cp.elasticity;
    EXPECT_DOUBLE_EQ(o.design.price,
                     eps / (eps - 1) * d.market.subscriber_cost);
  }
}

TEST(OptimizeCpTest, OutcomeInvariants) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 100; ++i) {
    const Draw d = RandomInstance(rng);
    for (Regime r : {Regime::kNetNeutral, Regime::kNonNeutral}) {
      const CpOutcome o = OptimizeCp(d.cp, d.market, r);
      EXPECT_EQ(o.virtual_profit,
                EvaluateVirtualProfit(o.design.capacity_increment,
                                      o.design.cache_size, d.cp, d.market)
                    .value);
      if (!o.interior_cache) {
        EXPECT_EQ(o.design.cache_size, 0);
      }
      EXPECT_GE(o.design.cache_size, 0);
      EXPECT_LE(o.design.cache_size, d.cp.content_size - 1);
      EXPECT_GE(o.virtual_profit, -d.cp.fixed_cost);
      if (r == Regime::kNetNeutral) {
        EXPECT_EQ(o.design.capacity_increment, 0);
      }
    }
  }
}

// The joint optimum dominates a dense independent scan of V.
TEST(OptimizeCpTest, BeatsDenseScan) {
  const CpParams cp = Benchmark();
  for (double eta_s : {1.0, 100.0, 1e4}) {
    const MarketParams m = BenchmarkMarket(eta_s);
    const CpOutcome o = OptimizeCp(cp, m, Regime::kNonNeutral);
    const auto p = oracle::From(cp, m);
    oracle::Real best = 0;
    for (int i = 0; i <= 300; ++i) {
      const oracle::Real beta = 1e-2L * std::pow(1e6L, i / 300.0L);
      for (int j = 0; j <= 300; ++j) {
        const oracle::Real s = 1e-3L * std::pow(1e8L, j / 300.0L);
        if (s > p.sigma - 1) continue;
        best = std::max(best, oracle::Profit(p, beta, s));
      }
    }
    EXPECT_GE(o.virtual_profit, static_cast<double>(best) * (1 - 1e-12))
        << "eta_S = " << eta_s;
  }
}

}  // namespace
}  // namespace consortium
