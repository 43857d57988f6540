#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "plcsim/traffic.hpp"

using namespace plcsim;

TEST(Demand, ZeroUsersMeansZeroDemand) {
  TrafficParams params;
  params.mean_users_per_cell = 0.0;
  Rng rng(1);
  for (const double d : generate_demand(500, params, rng)) EXPECT_EQ(d, 0.0);
}

TEST(Demand, SameSeedSameVector) {
  Rng a(99), b(99);
  const auto va = generate_demand(1000, TrafficParams{}, a);
  const auto vb = generate_demand(1000, TrafficParams{}, b);
  EXPECT_EQ(va, vb);
  EXPECT_EQ(va.size(), 1000u);
  EXPECT_TRUE(generate_demand(0, TrafficParams{}, a).empty());
}

TEST(Demand, NonNegativeAndCapped) {
  TrafficParams params;
  params.max_cell_demand_bps = 20e6;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    for (const double d : generate_demand(2000, params, rng)) {
      EXPECT_GE(d, 0.0);
      EXPECT_LE(d, 20e6);
    }
  }
}

TEST(Demand, CompoundPoissonLognormalMean) {
  TrafficParams params;
  params.max_cell_demand_bps = 1e15;  // effectively uncapped
  const double expected = 4.0 * 4e6 * std::exp(0.125);
  EXPECT_NEAR(params.uncapped_mean_bps(), expected, 1e-6);
  Rng rng(314159);
  const auto demand = generate_demand(100000, params, rng);
  const double mean = std::accumulate(demand.begin(), demand.end(), 0.0) / 1e5;
  EXPECT_NEAR(mean, expected, 0.05 * expected);
}

TEST(Demand, LargeMeanPoissonStaysAccurate) {
  // Chunked sampling keeps exp(-mean) away from underflow.
  Rng rng(8);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) sum += static_cast<double>(rng.poisson(900.0));
  EXPECT_NEAR(sum / 20000.0, 900.0, 1.0);
}

TEST(Demand, RejectsInvalidParams) {
  Rng rng(0);
  TrafficParams params;
  params.max_cell_demand_bps = 0.0;
  EXPECT_THROW(generate_demand(3, params, rng), DomainError);
  params = TrafficParams{};
  params.user_rate_sigma_ln = -1.0;
  EXPECT_THROW(generate_demand(3, params, rng), DomainError);
}
