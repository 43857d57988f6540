#pragma once

// Power-line channel model: per-unit-length cable parameters, ABCD two-port algebra and the
// cell-to-CCo transfer function of a tree grid with every side branch collapsed into an exact
// shunt admittance.

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "plcsim/errors.hpp"
#include "plcsim/topology.hpp"

namespace plcsim {

using Complex = std::complex<double>;

/// Line segments whose |Re(gamma * l)| exceeds this are treated as fully attenuating; e^x leaves
/// the double range near x = 709.
inline constexpr double kAttenuationCap = 700.0;

struct CableType {
  double r0_ohm_per_m = 0.0;  // at f0_hz
  double f0_hz = 1e6;
  double l_h_per_m = 0.0;
  double g0_s_per_m = 0.0;    // at f0_hz
  double c_f_per_m = 0.0;

  void validate() const {
    if (!(r0_ohm_per_m >= 0.0) || !(g0_s_per_m >= 0.0) || !(f0_hz > 0.0) || !(l_h_per_m > 0.0) ||
        !(c_f_per_m > 0.0)) {
      throw DomainError("cable parameters must be non-negative with f0, L and C strictly positive");
    }
  }

  bool operator==(const CableType&) const = default;
};

using CableCatalog = std::map<std::string, CableType>;

/// Placeholder catalog: a feeder backbone and a thinner service drop.
inline CableCatalog default_cables() {
  return {
      {"backbone", CableType{1e-3, 1e6, 0.3e-6, 1e-9, 0.15e-9}},
      {"drop", CableType{5e-3, 1e6, 0.4e-6, 2e-9, 0.1e-9}},
  };
}

/// Uniform grid of n_points bins over [f_min_hz, f_max_hz], sampled at bin centres.
struct FrequencyGrid {
  double f_min_hz = 2e6;
  double f_max_hz = 86e6;
  std::size_t n_points = 1024;

  void validate() const {
    if (!(f_min_hz > 0.0) || !(f_max_hz > f_min_hz) || n_points < 1) {
      throw DomainError("frequency grid needs 0 < f_min < f_max and n_points >= 1");
    }
  }

  double spacing() const { return (f_max_hz - f_min_hz) / static_cast<double>(n_points); }
  double bandwidth() const { return f_max_hz - f_min_hz; }
  double at(std::size_t k) const { return f_min_hz + (static_cast<double>(k) + 0.5) * spacing(); }

  bool operator==(const FrequencyGrid&) const = default;
};

struct Rlgc {
  double r_ohm_per_m;
  double l_h_per_m;
  double g_s_per_m;
  double c_f_per_m;
};

/// Skin-effect resistance R = r0*sqrt(f/f0), dielectric conductance G = g0*f/f0, constant L and C.
inline Rlgc rlgc_at(const CableType& cable, double f_hz) {
  if (!(f_hz > 0.0)) throw DomainError("frequency must be positive");
  const double ratio = f_hz / cable.f0_hz;
  return {cable.r0_ohm_per_m * std::sqrt(ratio), cable.l_h_per_m, cable.g0_s_per_m * ratio, cable.c_f_per_m};
}

struct LineParams {
  Complex z0;     // characteristic impedance
  Complex gamma;  // propagation constant, Re >= 0
};

/// Telegrapher relations with principal square roots.
inline LineParams secondary_params(const Rlgc& p, double f_hz) {
  if (!(f_hz > 0.0)) throw DomainError("frequency must be positive");
  const double omega = 2.0 * std::numbers::pi * f_hz;
  const Complex series(p.r_ohm_per_m, omega * p.l_h_per_m);
  const Complex shunt(p.g_s_per_m, omega * p.c_f_per_m);
  return {std::sqrt(series / shunt), std::sqrt(series * shunt)};
}

inline LineParams line_params(const CableType& cable, double f_hz) {
  return secondary_params(rlgc_at(cable, f_hz), f_hz);
}

namespace detail {

/// tanh without overflow: (1 - e^{-2x}) / (1 + e^{-2x}) for Re(x) >= 0, odd extension otherwise.
inline Complex stable_tanh(Complex x) {
  if (x.real() < 0.0) return -stable_tanh(-x);
  const Complex e = std::exp(-2.0 * x);
  return (1.0 - e) / (1.0 + e);
}

/// coth and csch for Re(x) >= 0 without forming e^{x}.
inline Complex stable_coth(Complex x) {
  const Complex e = std::exp(-2.0 * x);
  return (1.0 + e) / (1.0 - e);
}

inline Complex stable_csch(Complex x) {
  const Complex e = std::exp(-2.0 * x);
  return 2.0 * std::exp(-x) / (1.0 - e);
}

inline bool is_open(Complex z) { return std::isinf(z.real()) || std::isinf(z.imag()); }

/// 1/z with 1/inf = 0.
inline Complex admittance_of(Complex z) {
  if (is_open(z)) return {0.0, 0.0};
  return 1.0 / z;
}

/// Admittance at the input of a line whose far end is terminated in y_term, given tanh(gamma*l).
inline Complex input_admittance(Complex z0, Complex tanh_gl, Complex y_term) {
  const Complex y0 = 1.0 / z0;
  return y0 * (y_term + y0 * tanh_gl) / (y0 + y_term * tanh_gl);
}

}  // namespace detail

/// Chain matrix at one frequency: [V1; I1] = [[a, b], [c, d]] [V2; I2].
struct Abcd {
  Complex a{1.0, 0.0};
  Complex b{0.0, 0.0};
  Complex c{0.0, 0.0};
  Complex d{1.0, 0.0};

  Complex det() const { return a * d - b * c; }

  Abcd operator*(const Abcd& rhs) const {
    return {a * rhs.a + b * rhs.c, a * rhs.b + b * rhs.d, c * rhs.a + d * rhs.c, c * rhs.b + d * rhs.d};
  }

  bool operator==(const Abcd&) const = default;
};

/// Line section of length_m. Throws std::overflow_error past kAttenuationCap.
inline Abcd abcd_line(const LineParams& line, double length_m) {
  if (!(length_m >= 0.0)) throw DomainError("line length must be >= 0");
  const Complex x = line.gamma * length_m;
  if (std::abs(x.real()) > kAttenuationCap) {
    throw std::overflow_error("line attenuation exceeds the representable range");
  }
  const Complex ch = std::cosh(x);
  const Complex sh = std::sinh(x);
  return {ch, line.z0 * sh, sh / line.z0, ch};
}

/// Shunt element to ground. An infinite impedance is an open circuit (identity).
inline Abcd abcd_shunt(Complex z) {
  if (z == Complex(0.0, 0.0)) throw SingularLoadError("shunt impedance must be non-zero");
  return {1.0, 0.0, detail::admittance_of(z), 1.0};
}

/// Impedance seen at the input of a line terminated in z_term; z_term may be infinite (open).
inline Complex input_impedance(const LineParams& line, double length_m, Complex z_term) {
  if (!(length_m >= 0.0)) throw DomainError("line length must be >= 0");
  const Complex t = detail::stable_tanh(line.gamma * length_m);
  if (detail::is_open(z_term)) return line.z0 / t;
  return line.z0 * (z_term + line.z0 * t) / (line.z0 + z_term * t);
}

/// A two-port sampled on a frequency grid.
struct TwoPortAbcd {
  FrequencyGrid fgrid;
  std::vector<Abcd> points;

  static TwoPortAbcd identity(const FrequencyGrid& fgrid) { return {fgrid, std::vector<Abcd>(fgrid.n_points)}; }
};

inline TwoPortAbcd abcd_line(const CableType& cable, const FrequencyGrid& fgrid, double length_m) {
  fgrid.validate();
  TwoPortAbcd out{fgrid, {}};
  out.points.reserve(fgrid.n_points);
  for (std::size_t k = 0; k < fgrid.n_points; ++k) out.points.push_back(abcd_line(line_params(cable, fgrid.at(k)), length_m));
  return out;
}

inline TwoPortAbcd abcd_shunt(Complex z, const FrequencyGrid& fgrid) {
  return {fgrid, std::vector<Abcd>(fgrid.n_points, abcd_shunt(z))};
}

/// Product in source-to-load order. An empty list is the identity on fgrid.
inline TwoPortAbcd cascade(std::span<const TwoPortAbcd> ports, const FrequencyGrid& fgrid) {
  TwoPortAbcd out = TwoPortAbcd::identity(fgrid);
  for (const auto& port : ports) {
    if (!(port.fgrid == fgrid) || port.points.size() != fgrid.n_points) {
      throw ShapeError("cascade operands are sampled on different frequency grids");
    }
    for (std::size_t k = 0; k < fgrid.n_points; ++k) out.points[k] = out.points[k] * port.points[k];
  }
  return out;
}

struct PortImpedances {
  Complex z_source_ohm{50.0, 0.0};
  Complex z_load_ohm{50.0, 0.0};

  void validate() const {
    if (z_source_ohm.real() < 0.0 || z_load_ohm.real() < 0.0) {
      throw DomainError("port impedances must have non-negative real parts");
    }
  }

  bool operator==(const PortImpedances&) const = default;
};

struct ChannelResponse {
  std::vector<Complex> h;
  double acg_db = 0.0;
};

/// 10*log10 of the mean squared magnitude.
inline double average_channel_gain(std::span<const Complex> h) {
  if (h.empty()) throw DomainError("average channel gain of an empty response");
  double power = 0.0;
  for (const auto& v : h) power += std::norm(v);
  return 10.0 * std::log10(power / static_cast<double>(h.size()));
}

inline double average_channel_gain(const ChannelResponse& response) { return average_channel_gain(response.h); }

/// Voltage transfer V_load / V_source of a two-port between the modem ports.
inline Complex port_transfer(const Abcd& m, const PortImpedances& ports) {
  const Complex zs = ports.z_source_ohm;
  const Complex zl = ports.z_load_ohm;
  if (detail::is_open(zl)) return 1.0 / (m.a + zs * m.c);
  return zl / (m.a * zl + m.b + zs * (m.c * zl + m.d));
}

/// Transfer functions from each listed cell's house to the CCo, sharing the per-frequency work.
///
/// The transmitting house's own load sits in shunt at the source port. Every subtree hanging
/// off the house-to-CCo path, including other houses' drops and the remaining feeders at the
/// CCo, is folded into a shunt admittance by repeated line input-admittance transforms.
inline std::vector<ChannelResponse> path_transfers(const PowerGrid& grid, std::span<const int> cell_ids,
                                                   const CableCatalog& cables, const FrequencyGrid& fgrid,
                                                   const PortImpedances& ports) {
  fgrid.validate();
  ports.validate();
  const RootedTree tree = root_tree(grid);
  const std::size_t n_nodes = grid.nodes.size();
  const std::size_t n_seg = grid.segments.size();

  // Cable lookups resolved once.
  std::vector<const CableType*> cable_list;
  std::vector<std::size_t> seg_cable_index(n_seg);
  for (std::size_t s = 0; s < n_seg; ++s) {
    const auto it = cables.find(grid.segments[s].cable);
    if (it == cables.end()) throw LookupError("unknown cable type '" + grid.segments[s].cable + "'");
    it->second.validate();
    std::size_t idx = 0;
    while (idx < cable_list.size() && cable_list[idx] != &it->second) ++idx;
    if (idx == cable_list.size()) cable_list.push_back(&it->second);
    seg_cable_index[s] = idx;
  }

  std::vector<Complex> house_admittance(n_nodes);
  for (std::size_t v = 0; v < n_nodes; ++v) {
    house_admittance[v] = detail::admittance_of(Complex(grid.nodes[v].load_ohm, 0.0));
  }

  std::vector<std::vector<int>> paths;
  paths.reserve(cell_ids.size());
  for (const int cell : cell_ids) {
    std::vector<int> path;
    for (int v = grid.house_node(cell); v >= 0; v = tree.parent[static_cast<std::size_t>(v)]) path.push_back(v);
    paths.push_back(std::move(path));
  }

  std::vector<ChannelResponse> out(cell_ids.size());
  for (auto& r : out) r.h.resize(fgrid.n_points);

  std::vector<LineParams> cable_params(cable_list.size());
  std::vector<Complex> seg_tanh(n_seg);
  std::vector<Abcd> seg_abcd(n_seg);
  std::vector<bool> seg_opaque(n_seg);
  std::vector<Complex> seg_input_admittance(n_seg);  // looking from parent into the child subtree

  for (std::size_t k = 0; k < fgrid.n_points; ++k) {
    const double f = fgrid.at(k);
    for (std::size_t c = 0; c < cable_list.size(); ++c) cable_params[c] = line_params(*cable_list[c], f);
    for (std::size_t s = 0; s < n_seg; ++s) {
      const LineParams& lp = cable_params[seg_cable_index[s]];
      const Complex x = lp.gamma * grid.segments[s].length_m;
      seg_tanh[s] = detail::stable_tanh(x);
      seg_opaque[s] = std::abs(x.real()) > kAttenuationCap;
      if (!seg_opaque[s]) seg_abcd[s] = abcd_line(lp, grid.segments[s].length_m);
    }
    // Leaves first.
    for (auto it = tree.order.rbegin(); it != tree.order.rend(); ++it) {
      const auto v = static_cast<std::size_t>(*it);
      const int up = tree.parent_segment[v];
      if (up < 0) continue;
      Complex y_beyond = house_admittance[v];
      for (const auto& [seg, child] : tree.children[v]) y_beyond += seg_input_admittance[static_cast<std::size_t>(seg)];
      const auto us = static_cast<std::size_t>(up);
      seg_input_admittance[us] = detail::input_admittance(cable_params[seg_cable_index[us]].z0, seg_tanh[us], y_beyond);
    }

    for (std::size_t i = 0; i < paths.size(); ++i) {
      const auto& path = paths[i];
      Abcd chain;
      bool opaque = false;
      for (std::size_t j = 0; j < path.size(); ++j) {
        const auto v = static_cast<std::size_t>(path[j]);
        const int arrived_from = j > 0 ? path[j - 1] : -1;
        Complex y_shunt = house_admittance[v];
        for (const auto& [seg, child] : tree.children[v]) {
          if (child != arrived_from) y_shunt += seg_input_admittance[static_cast<std::size_t>(seg)];
        }
        if (y_shunt != Complex(0.0, 0.0)) chain = chain * Abcd{1.0, 0.0, y_shunt, 1.0};
        if (j + 1 < path.size()) {
          const auto s = static_cast<std::size_t>(tree.parent_segment[v]);
          if (seg_opaque[s]) {
            opaque = true;
            break;
          }
          chain = chain * seg_abcd[s];
        }
      }
      out[i].h[k] = opaque ? Complex(0.0, 0.0) : port_transfer(chain, ports);
    }
  }

  for (auto& r : out) r.acg_db = average_channel_gain(r.h);
  return out;
}

inline ChannelResponse path_transfer(const PowerGrid& grid, int cell_id, const CableCatalog& cables,
                                     const FrequencyGrid& fgrid, const PortImpedances& ports) {
  const int ids[] = {cell_id};
  return std::move(path_transfers(grid, ids, cables, fgrid, ports).front());
}

/// CSV dump of one link: f_hz,re_h,im_h.
inline void write_response_csv(std::ostream& os, const FrequencyGrid& fgrid, const ChannelResponse& response) {
  if (response.h.size() != fgrid.n_points) throw ShapeError("response length does not match the frequency grid");
  const auto old_precision = os.precision(9);
  os << "f_hz,re_h,im_h\n";
  for (std::size_t k = 0; k < fgrid.n_points; ++k) {
    os << fgrid.at(k) << ',' << response.h[k].real() << ',' << response.h[k].imag() << '\n';
  }
  os.precision(old_precision);
}

}  // namespace plcsim
