#pragma once

// Nodal-analysis reference solver for the grid transfer function. It stamps every segment's
// exact two-port admittance parameters into one network matrix and solves it per frequency,
// sharing nothing with the branch-collapsing route in channel.hpp beyond the cable model.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <numeric>
#include <vector>

#include "plcsim/channel.hpp"
#include "plcsim/errors.hpp"
#include "plcsim/topology.hpp"

namespace plcsim {

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

  std::size_t find(std::size_t v) {
    while (parent_[v] != v) v = parent_[v] = parent_[parent_[v]];
    return v;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace detail

/// Unknowns: one voltage per electrical node (zero-length segments merge their end nodes) and
/// the source branch current. The modem is a unit voltage source behind z_source at the
/// transmitting house; the receiver is z_load from the CCo to ground.
inline ChannelResponse mna_solve(const PowerGrid& grid, const CableCatalog& cables, const FrequencyGrid& fgrid,
                                 const PortImpedances& ports, int cell_id) {
  fgrid.validate();
  ports.validate();
  root_tree(grid);
  const int house = grid.house_node(cell_id);
  if (ports.z_load_ohm == Complex(0.0, 0.0)) throw SingularLoadError("load impedance must be non-zero");

  const std::size_t n_nodes = grid.nodes.size();
  detail::DisjointSets merged(n_nodes);
  for (const auto& seg : grid.segments) {
    if (!cables.contains(seg.cable)) throw LookupError("unknown cable type '" + seg.cable + "'");
    if (seg.length_m == 0.0) merged.unite(static_cast<std::size_t>(seg.from_node), static_cast<std::size_t>(seg.to_node));
  }
  std::vector<Eigen::Index> index(n_nodes, -1);
  Eigen::Index n_unknowns = 0;
  for (std::size_t v = 0; v < n_nodes; ++v) {
    const std::size_t root = merged.find(v);
    if (index[root] < 0) index[root] = n_unknowns++;
    index[v] = index[root];
  }
  const Eigen::Index source_row = n_unknowns++;
  const Eigen::Index source_node = index[static_cast<std::size_t>(house)];
  const Eigen::Index load_node = index[static_cast<std::size_t>(grid.cco)];

  ChannelResponse out;
  out.h.resize(fgrid.n_points);
  Eigen::MatrixXcd system(n_unknowns, n_unknowns);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n_unknowns);
  rhs(source_row) = 1.0;

  for (std::size_t k = 0; k < fgrid.n_points; ++k) {
    const double f = fgrid.at(k);
    system.setZero();
    for (const auto& seg : grid.segments) {
      if (seg.length_m == 0.0) continue;
      const LineParams lp = line_params(cables.at(seg.cable), f);
      const Complex x = lp.gamma * seg.length_m;
      const Complex y_self = detail::stable_coth(x) / lp.z0;
      const Complex y_mutual = -detail::stable_csch(x) / lp.z0;
      const Eigen::Index i = index[static_cast<std::size_t>(seg.from_node)];
      const Eigen::Index j = index[static_cast<std::size_t>(seg.to_node)];
      system(i, i) += y_self;
      system(j, j) += y_self;
      system(i, j) += y_mutual;
      system(j, i) += y_mutual;
    }
    for (std::size_t v = 0; v < n_nodes; ++v) {
      const Eigen::Index i = index[v];
      system(i, i) += detail::admittance_of(Complex(grid.nodes[v].load_ohm, 0.0));
    }
    system(load_node, load_node) += detail::admittance_of(ports.z_load_ohm);
    // KCL at the source node receives the branch current; the branch obeys V + z_s I = 1.
    system(source_node, source_row) -= 1.0;
    system(source_row, source_node) = 1.0;
    system(source_row, source_row) = ports.z_source_ohm;

    if (!system.allFinite()) throw NumericalError("non-finite nodal admittance", k);
    const Eigen::FullPivLU<Eigen::MatrixXcd> lu(system);
    if (!lu.isInvertible()) throw NumericalError("singular nodal admittance matrix", k);
    const Eigen::VectorXcd solution = lu.solve(rhs);
    if (!solution.allFinite()) throw NumericalError("non-finite nodal solution", k);
    out.h[k] = solution(load_node);
  }
  out.acg_db = average_channel_gain(out.h);
  return out;
}

}  // namespace plcsim
