#pragma once

// Random femto-cell deployments and the radial low-voltage grid that connects every house to
// the central coordinator (CCo).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "plcsim/errors.hpp"
#include "plcsim/rng.hpp"

namespace plcsim {

struct Territory {
  double width_m = 500.0;
  double height_m = 500.0;
  double cell_coverage_area_m2 = 1000.0;

  void validate() const {
    if (!(width_m > 0.0) || !(height_m > 0.0) || !(cell_coverage_area_m2 > 0.0)) {
      throw DomainError("territory dimensions and cell coverage area must be positive");
    }
  }

  bool operator==(const Territory&) const = default;
};

/// House resistance, fixed when low_ohm == high_ohm, otherwise uniform on [low_ohm, high_ohm].
struct HouseLoad {
  double low_ohm = 50.0;
  double high_ohm = 50.0;

  static HouseLoad fixed(double ohm) { return {ohm, ohm}; }

  void validate() const {
    if (!(low_ohm > 0.0) || !(high_ohm >= low_ohm)) {
      throw DomainError("house load must satisfy 0 < low <= high");
    }
  }

  double draw(Rng& rng) const {
    if (low_ohm == high_ohm) return low_ohm;
    return rng.uniform(low_ohm, high_ohm);
  }

  bool operator==(const HouseLoad&) const = default;
};

struct CellSite {
  int id = 0;
  double x_m = 0.0;
  double y_m = 0.0;
  double house_load_ohm = 50.0;

  bool operator==(const CellSite&) const = default;
};

struct Deployment {
  Territory territory;
  double density = 0.0;
  std::vector<CellSite> cells;

  bool operator==(const Deployment&) const = default;
};

enum class NodeKind { Cco, Tap, House };

struct GridNode {
  int id = 0;
  NodeKind kind = NodeKind::Tap;
  double x_m = 0.0;
  double y_m = 0.0;
  int cell_id = -1;  // HOUSE nodes only
  double load_ohm = std::numeric_limits<double>::infinity();  // open unless HOUSE

  bool operator==(const GridNode&) const = default;
};

/// One cable run. from_node is the end nearer the CCo.
struct CableSegment {
  int from_node = 0;
  int to_node = 0;
  double length_m = 0.0;
  std::string cable;
  int feeder = 0;

  bool operator==(const CableSegment&) const = default;
};

struct GridParams {
  int n_feeders = 4;
  std::string backbone_cable = "backbone";
  std::string drop_cable = "drop";
  double min_drop_length_m = 5.0;
  HouseLoad house_load;

  void validate() const {
    if (n_feeders < 1) throw DomainError("n_feeders must be >= 1");
    if (!(min_drop_length_m >= 0.0)) throw DomainError("min_drop_length_m must be >= 0");
    house_load.validate();
  }

  bool operator==(const GridParams&) const = default;
};

struct PowerGrid {
  std::vector<GridNode> nodes;
  std::vector<CableSegment> segments;
  std::vector<int> house_of_cell;  // cell id -> HOUSE node id, -1 when absent
  std::vector<int> sector_of;      // cell id -> sector index
  int cco = 0;

  int house_node(int cell_id) const {
    if (cell_id < 0 || static_cast<std::size_t>(cell_id) >= house_of_cell.size() ||
        house_of_cell[static_cast<std::size_t>(cell_id)] < 0) {
      throw LookupError("unknown cell id " + std::to_string(cell_id));
    }
    return house_of_cell[static_cast<std::size_t>(cell_id)];
  }

  std::size_t cell_count() const {
    return static_cast<std::size_t>(std::count_if(house_of_cell.begin(), house_of_cell.end(),
                                                  [](int n) { return n >= 0; }));
  }

  bool operator==(const PowerGrid&) const = default;
};

/// Neighbour lists of the segment graph: (segment index, neighbour node id).
inline std::vector<std::vector<std::pair<int, int>>> adjacency(const PowerGrid& grid) {
  std::vector<std::vector<std::pair<int, int>>> adj(grid.nodes.size());
  for (std::size_t s = 0; s < grid.segments.size(); ++s) {
    const auto& seg = grid.segments[s];
    if (seg.from_node < 0 || seg.to_node < 0 || static_cast<std::size_t>(seg.from_node) >= adj.size() ||
        static_cast<std::size_t>(seg.to_node) >= adj.size()) {
      throw LookupError("segment " + std::to_string(s) + " references an unknown node");
    }
    adj[static_cast<std::size_t>(seg.from_node)].emplace_back(static_cast<int>(s), seg.to_node);
    adj[static_cast<std::size_t>(seg.to_node)].emplace_back(static_cast<int>(s), seg.from_node);
  }
  return adj;
}

/// Tree rooted at the CCo: parent links and a breadth-first order (root first).
struct RootedTree {
  std::vector<int> parent;          // -1 at the root
  std::vector<int> parent_segment;  // -1 at the root
  std::vector<int> order;
  std::vector<std::vector<std::pair<int, int>>> children;  // (segment, child)
};

/// Roots the grid at its CCo. Throws DomainError unless the segment graph is a spanning tree.
inline RootedTree root_tree(const PowerGrid& grid) {
  const std::size_t n = grid.nodes.size();
  if (grid.cco < 0 || static_cast<std::size_t>(grid.cco) >= n) throw LookupError("CCo node missing");
  if (grid.segments.size() + 1 != n) throw DomainError("power grid is not a tree: |segments| != |nodes| - 1");
  const auto adj = adjacency(grid);
  RootedTree tree;
  tree.parent.assign(n, -1);
  tree.parent_segment.assign(n, -1);
  tree.children.resize(n);
  std::vector<bool> seen(n, false);
  tree.order.reserve(n);
  tree.order.push_back(grid.cco);
  seen[static_cast<std::size_t>(grid.cco)] = true;
  for (std::size_t head = 0; head < tree.order.size(); ++head) {
    const int u = tree.order[head];
    for (const auto& [seg, v] : adj[static_cast<std::size_t>(u)]) {
      if (seen[static_cast<std::size_t>(v)]) {
        if (seg != tree.parent_segment[static_cast<std::size_t>(u)]) {
          throw DomainError("power grid contains a cycle");
        }
        continue;
      }
      seen[static_cast<std::size_t>(v)] = true;
      tree.parent[static_cast<std::size_t>(v)] = u;
      tree.parent_segment[static_cast<std::size_t>(v)] = seg;
      tree.children[static_cast<std::size_t>(u)].emplace_back(seg, v);
      tree.order.push_back(v);
    }
  }
  if (tree.order.size() != n) throw DomainError("power grid is not connected");
  return tree;
}

/// Total cable length between a cell's house and the CCo.
inline double cable_distance_to_cco(const PowerGrid& grid, const RootedTree& tree, int cell_id) {
  double total = 0.0;
  for (int v = grid.house_node(cell_id); tree.parent[static_cast<std::size_t>(v)] >= 0;
       v = tree.parent[static_cast<std::size_t>(v)]) {
    total += grid.segments[static_cast<std::size_t>(tree.parent_segment[static_cast<std::size_t>(v)])].length_m;
  }
  return total;
}

inline std::size_t cell_count(const Territory& territory, double density) {
  territory.validate();
  if (!(density >= 0.0 && density <= 1.0)) {
    throw DomainError("density must lie in [0, 1], got " + std::to_string(density));
  }
  return static_cast<std::size_t>(
      std::llround(density * territory.width_m * territory.height_m / territory.cell_coverage_area_m2));
}

/// Uniform random placement. Per cell: x, y, then the house load draw.
inline Deployment generate_deployment(const Territory& territory, double density, const HouseLoad& load,
                                      Rng& rng) {
  const std::size_t n = cell_count(territory, density);
  load.validate();
  Deployment out{territory, density, {}};
  out.cells.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    CellSite site;
    site.id = static_cast<int>(i);
    site.x_m = rng.uniform(0.0, territory.width_m);
    site.y_m = rng.uniform(0.0, territory.height_m);
    site.house_load_ohm = load.draw(rng);
    out.cells.push_back(site);
  }
  return out;
}

/// Sector of each cell = feeder index of its house drop.
inline std::vector<int> assign_sectors(const PowerGrid& grid) {
  std::vector<int> sectors(grid.house_of_cell.size(), -1);
  std::vector<int> drop_of_node(grid.nodes.size(), -1);
  for (std::size_t s = 0; s < grid.segments.size(); ++s) {
    const auto& seg = grid.segments[s];
    for (int end : {seg.from_node, seg.to_node}) {
      if (grid.nodes[static_cast<std::size_t>(end)].kind == NodeKind::House) {
        drop_of_node[static_cast<std::size_t>(end)] = static_cast<int>(s);
      }
    }
  }
  for (std::size_t c = 0; c < grid.house_of_cell.size(); ++c) {
    const int node = grid.house_of_cell[c];
    if (node < 0) continue;
    const int seg = drop_of_node[static_cast<std::size_t>(node)];
    if (seg < 0) throw DomainError("house of cell " + std::to_string(c) + " has no drop segment");
    sectors[c] = grid.segments[static_cast<std::size_t>(seg)].feeder;
  }
  return sectors;
}

/// Radial feeders from the territory centre at angles 2*pi*k/n. Each house hangs from a tap on
/// its nearest feeder ray (ties go to the lowest index) by a drop of length
/// max(distance to the ray, min_drop_length_m). Taps are ordered along each feeder by distance
/// from the CCo, then by cell id.
inline PowerGrid build_power_grid(const Deployment& deployment, const GridParams& params) {
  params.validate();
  const double cx = deployment.territory.width_m / 2.0;
  const double cy = deployment.territory.height_m / 2.0;
  const auto n_feeders = static_cast<std::size_t>(params.n_feeders);

  std::vector<double> ux(n_feeders), uy(n_feeders);
  for (std::size_t k = 0; k < n_feeders; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_feeders);
    ux[k] = std::cos(angle);
    uy[k] = std::sin(angle);
  }

  struct Attachment {
    double along_m;
    double offset_m;
    std::size_t cell_index;
  };
  std::vector<std::vector<Attachment>> per_feeder(n_feeders);

  for (std::size_t i = 0; i < deployment.cells.size(); ++i) {
    const auto& cell = deployment.cells[i];
    const double dx = cell.x_m - cx;
    const double dy = cell.y_m - cy;
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    double best_along = 0.0;
    for (std::size_t k = 0; k < n_feeders; ++k) {
      const double t = dx * ux[k] + dy * uy[k];
      const double dist = t >= 0.0 ? std::abs(ux[k] * dy - uy[k] * dx) : std::hypot(dx, dy);
      if (dist < best_dist) {
        best = k;
        best_dist = dist;
        best_along = std::max(t, 0.0);
      }
    }
    per_feeder[best].push_back({best_along, best_dist, i});
  }

  PowerGrid grid;
  grid.cco = 0;
  grid.nodes.push_back({0, NodeKind::Cco, cx, cy, -1, std::numeric_limits<double>::infinity()});
  std::size_t max_id = 0;
  for (const auto& cell : deployment.cells) max_id = std::max(max_id, static_cast<std::size_t>(cell.id) + 1);
  grid.house_of_cell.assign(deployment.cells.empty() ? 0 : max_id, -1);

  for (std::size_t k = 0; k < n_feeders; ++k) {
    auto& taps = per_feeder[k];
    std::sort(taps.begin(), taps.end(), [&](const Attachment& a, const Attachment& b) {
      if (a.along_m != b.along_m) return a.along_m < b.along_m;
      return deployment.cells[a.cell_index].id < deployment.cells[b.cell_index].id;
    });
    int previous = grid.cco;
    double previous_along = 0.0;
    for (const auto& tap : taps) {
      const auto& cell = deployment.cells[tap.cell_index];
      const int tap_id = static_cast<int>(grid.nodes.size());
      grid.nodes.push_back({tap_id, NodeKind::Tap, cx + tap.along_m * ux[k], cy + tap.along_m * uy[k], -1,
                            std::numeric_limits<double>::infinity()});
      const int house_id = tap_id + 1;
      grid.nodes.push_back({house_id, NodeKind::House, cell.x_m, cell.y_m, cell.id, cell.house_load_ohm});
      grid.segments.push_back({previous, tap_id, tap.along_m - previous_along, params.backbone_cable,
                               static_cast<int>(k)});
      grid.segments.push_back({tap_id, house_id, std::max(tap.offset_m, params.min_drop_length_m),
                               params.drop_cable, static_cast<int>(k)});
      grid.house_of_cell[static_cast<std::size_t>(cell.id)] = house_id;
      previous = tap_id;
      previous_along = tap.along_m;
    }
  }
  grid.sector_of = assign_sectors(grid);
  return grid;
}

}  // namespace plcsim
