#pragma once

// Per-cell backhaul demand: a Poisson number of users per femto-cell, each with a lognormal
// rate, summed and capped.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "plcsim/errors.hpp"
#include "plcsim/rng.hpp"

namespace plcsim {

struct TrafficParams {
  double mean_users_per_cell = 4.0;
  double user_rate_median_bps = 4e6;
  double user_rate_sigma_ln = 0.5;
  double max_cell_demand_bps = 100e6;

  void validate() const {
    if (!(mean_users_per_cell >= 0.0) || !(user_rate_median_bps >= 0.0) || !(user_rate_sigma_ln >= 0.0)) {
      throw DomainError("traffic parameters must be non-negative");
    }
    if (!(max_cell_demand_bps > 0.0)) throw DomainError("max_cell_demand_bps must be positive");
  }

  /// Mean cell demand before the cap: users * median * exp(sigma^2 / 2).
  double uncapped_mean_bps() const {
    return mean_users_per_cell * user_rate_median_bps * std::exp(user_rate_sigma_ln * user_rate_sigma_ln / 2.0);
  }

  bool operator==(const TrafficParams&) const = default;
};

/// Requested throughput per cell id.
using DemandVector = std::vector<double>;

inline DemandVector generate_demand(std::size_t n_cells, const TrafficParams& params, Rng& rng) {
  params.validate();
  DemandVector demand(n_cells, 0.0);
  for (auto& d : demand) {
    const std::uint64_t users = rng.poisson(params.mean_users_per_cell);
    double total = 0.0;
    for (std::uint64_t u = 0; u < users; ++u) total += rng.lognormal(params.user_rate_median_bps, params.user_rate_sigma_ln);
    d = std::min(total, params.max_cell_demand_bps);
  }
  return demand;
}

}  // namespace plcsim
