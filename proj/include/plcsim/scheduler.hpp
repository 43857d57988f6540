#pragma once

// Per-sector TDMA time sharing and the network-wide throughput / grade-of-service metrics.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "plcsim/errors.hpp"

namespace plcsim {

struct SectorAllocation {
  std::vector<int> cell_ids;
  std::vector<double> demand_bps;
  std::vector<double> capacity_bps;
  std::vector<double> tau;
  std::vector<double> effective_bps;
};

/// Each cell asks for the time fraction demand / capacity. If the sector's requests fit in one
/// frame everybody is served in full, otherwise every fraction is scaled down by the same
/// factor. Cells with zero demand or zero capacity get no airtime.
inline SectorAllocation tdma_allocate(std::span<const int> cell_ids, std::span<const double> demands,
                                      std::span<const double> capacities) {
  if (demands.size() != cell_ids.size() || capacities.size() != cell_ids.size()) {
    throw ShapeError("demands and capacities must cover the same cells");
  }
  const std::size_t n = cell_ids.size();
  SectorAllocation out;
  out.cell_ids.assign(cell_ids.begin(), cell_ids.end());
  out.demand_bps.assign(demands.begin(), demands.end());
  out.capacity_bps.assign(capacities.begin(), capacities.end());
  out.tau.assign(n, 0.0);
  out.effective_bps.assign(n, 0.0);

  std::vector<double> required(n, 0.0);
  double total_required = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(demands[i] >= 0.0) || !(capacities[i] >= 0.0)) throw DomainError("demands and capacities must be non-negative");
    if (demands[i] > 0.0 && capacities[i] > 0.0) required[i] = demands[i] / capacities[i];
    total_required += required[i];
  }
  const bool overloaded = total_required > 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (required[i] == 0.0) continue;
    if (overloaded) {
      out.tau[i] = required[i] / total_required;
      out.effective_bps[i] = out.tau[i] * capacities[i];
    } else {
      out.tau[i] = required[i];
      out.effective_bps[i] = demands[i];  // tau * capacity, exactly
    }
  }
  return out;
}

/// Mean of effective / demand over demand-positive cells; 1 when no cell asks for anything.
inline double grade_of_service(std::span<const double> demands, const SectorAllocation& allocation) {
  if (demands.size() != allocation.effective_bps.size()) throw ShapeError("demand and allocation sizes differ");
  double ratio_sum = 0.0;
  std::size_t active = 0;
  for (std::size_t i = 0; i < demands.size(); ++i) {
    if (demands[i] > 0.0) {
      ratio_sum += allocation.effective_bps[i] / demands[i];
      ++active;
    }
  }
  return active == 0 ? 1.0 : ratio_sum / static_cast<double>(active);
}

inline double grade_of_service(const SectorAllocation& allocation) {
  return grade_of_service(allocation.demand_bps, allocation);
}

struct NetworkMetrics {
  double avg_cell_throughput_bps = 0.0;
  double aggregate_throughput_bps = 0.0;
  double gos = 1.0;
  double avg_acg_db = std::numeric_limits<double>::quiet_NaN();  // NaN with no cells
  std::size_t n_cells = 0;
  std::size_t n_sectors = 0;
};

/// Network-wide reduction. GoS averages per-cell ratios over all demand-positive cells, not
/// sector means. demands and acg_db are indexed by cell id and must be covered exactly once by
/// the sectors.
inline NetworkMetrics network_metrics(std::span<const SectorAllocation> sectors, std::span<const double> demands,
                                      std::span<const double> acg_db) {
  if (acg_db.size() != demands.size()) throw ShapeError("demand and ACG vectors differ in length");
  std::vector<bool> seen(demands.size(), false);
  NetworkMetrics m;
  m.n_sectors = sectors.size();
  double ratio_sum = 0.0;
  std::size_t active = 0;
  for (const auto& sector : sectors) {
    if (sector.effective_bps.size() != sector.cell_ids.size()) throw ShapeError("malformed sector allocation");
    for (std::size_t i = 0; i < sector.cell_ids.size(); ++i) {
      const int id = sector.cell_ids[i];
      if (id < 0 || static_cast<std::size_t>(id) >= demands.size()) throw PartitionError("sector references unknown cell " + std::to_string(id));
      if (seen[static_cast<std::size_t>(id)]) throw PartitionError("cell " + std::to_string(id) + " appears in more than one sector");
      seen[static_cast<std::size_t>(id)] = true;
      const double demand = demands[static_cast<std::size_t>(id)];
      m.aggregate_throughput_bps += sector.effective_bps[i];
      if (demand > 0.0) {
        ratio_sum += sector.effective_bps[i] / demand;
        ++active;
      }
    }
  }
  for (std::size_t id = 0; id < seen.size(); ++id) {
    if (!seen[id]) throw PartitionError("cell " + std::to_string(id) + " is not assigned to any sector");
  }
  m.n_cells = demands.size();
  m.avg_cell_throughput_bps = active == 0 ? 0.0 : m.aggregate_throughput_bps / static_cast<double>(active);
  m.gos = active == 0 ? 1.0 : ratio_sum / static_cast<double>(active);
  if (!acg_db.empty()) {
    double acg_sum = 0.0;
    for (const double a : acg_db) acg_sum += a;
    m.avg_acg_db = acg_sum / static_cast<double>(acg_db.size());
  }
  return m;
}

}  // namespace plcsim
