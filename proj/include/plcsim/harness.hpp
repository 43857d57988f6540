#pragma once

// Simulation driver: configuration, seed derivation, one replication end to end, density
// sweeps and CSV output.

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <mutex>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "plcsim/capacity.hpp"
#include "plcsim/channel.hpp"
#include "plcsim/errors.hpp"
#include "plcsim/rng.hpp"
#include "plcsim/scheduler.hpp"
#include "plcsim/topology.hpp"
#include "plcsim/traffic.hpp"

namespace plcsim {

struct SweepConfig {
  std::vector<double> densities{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  int replications = 20;
  std::uint64_t master_seed = 20240601;

  bool operator==(const SweepConfig&) const = default;
};

struct SimConfig {
  Territory territory;
  GridParams grid;
  CableCatalog cables = default_cables();
  FrequencyGrid band;
  PortImpedances ports;
  PsdConfig psd;
  TrafficParams traffic;
  SweepConfig sweep;

  /// Throws ConfigError describing the first violated constraint.
  void validate() const {
    try {
      territory.validate();
      grid.validate();
      for (const auto& [key, cable] : cables) cable.validate();
      for (const auto& key : {grid.backbone_cable, grid.drop_cable}) {
        if (!cables.contains(key)) throw DomainError("grid references unknown cable '" + key + "'");
      }
      band.validate();
      ports.validate();
      psd.validate();
      traffic.validate();
    } catch (const std::logic_error& e) {
      throw ConfigError(e.what());
    }
    if (sweep.densities.empty()) throw ConfigError("sweep.densities must not be empty");
    for (const double d : sweep.densities) {
      if (!(d >= 0.0 && d <= 1.0)) throw ConfigError("sweep densities must lie in [0, 1]");
    }
    if (sweep.replications < 1) throw ConfigError("sweep.replications must be >= 1");
  }

  bool operator==(const SimConfig&) const = default;
};

namespace detail {

using nlohmann::json;

inline void expect_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& target) {
  if (const auto it = obj.find(key); it != obj.end()) target = it->template get<T>();
}

inline Complex read_complex(const json& value) {
  if (value.is_number()) return {value.get<double>(), 0.0};
  if (value.is_array() && value.size() == 2) return {value[0].get<double>(), value[1].get<double>()};
  throw ConfigError("impedance must be a number or a [re, im] pair");
}

inline json write_complex(Complex z) {
  if (z.imag() == 0.0) return z.real();
  return json::array({z.real(), z.imag()});
}

}  // namespace detail

/// Builds a config from JSON. Absent keys keep their defaults; unknown keys are rejected.
inline SimConfig parse_config(const nlohmann::json& doc) {
  using detail::expect_keys;
  using detail::read;
  SimConfig cfg;
  try {
    expect_keys(doc, {"territory", "grid", "cables", "band", "ports", "psd", "traffic", "sweep"}, "config");
    if (const auto it = doc.find("territory"); it != doc.end()) {
      expect_keys(*it, {"width_m", "height_m", "cell_coverage_area_m2"}, "territory");
      read(*it, "width_m", cfg.territory.width_m);
      read(*it, "height_m", cfg.territory.height_m);
      read(*it, "cell_coverage_area_m2", cfg.territory.cell_coverage_area_m2);
    }
    if (const auto it = doc.find("grid"); it != doc.end()) {
      expect_keys(*it, {"n_feeders", "backbone_cable", "drop_cable", "min_drop_length_m", "house_load_ohm"}, "grid");
      read(*it, "n_feeders", cfg.grid.n_feeders);
      read(*it, "backbone_cable", cfg.grid.backbone_cable);
      read(*it, "drop_cable", cfg.grid.drop_cable);
      read(*it, "min_drop_length_m", cfg.grid.min_drop_length_m);
      if (const auto load = it->find("house_load_ohm"); load != it->end()) {
        if (load->is_number()) {
          cfg.grid.house_load = HouseLoad::fixed(load->get<double>());
        } else {
          expect_keys(*load, {"low", "high"}, "grid.house_load_ohm");
          cfg.grid.house_load = {load->at("low").get<double>(), load->at("high").get<double>()};
        }
      }
    }
    if (const auto it = doc.find("cables"); it != doc.end()) {
      if (!it->is_object()) throw ConfigError("cables must be an object");
      for (const auto& [key, entry] : it->items()) {
        expect_keys(entry, {"r0_ohm_per_m", "f0_hz", "l_h_per_m", "g0_s_per_m", "c_f_per_m"}, "cables." + key);
        CableType cable = cfg.cables.contains(key) ? cfg.cables.at(key) : CableType{};
        read(entry, "r0_ohm_per_m", cable.r0_ohm_per_m);
        read(entry, "f0_hz", cable.f0_hz);
        read(entry, "l_h_per_m", cable.l_h_per_m);
        read(entry, "g0_s_per_m", cable.g0_s_per_m);
        read(entry, "c_f_per_m", cable.c_f_per_m);
        cfg.cables[key] = cable;
      }
    }
    if (const auto it = doc.find("band"); it != doc.end()) {
      expect_keys(*it, {"f_min_hz", "f_max_hz", "n_points"}, "band");
      read(*it, "f_min_hz", cfg.band.f_min_hz);
      read(*it, "f_max_hz", cfg.band.f_max_hz);
      read(*it, "n_points", cfg.band.n_points);
    }
    if (const auto it = doc.find("ports"); it != doc.end()) {
      expect_keys(*it, {"z_source_ohm", "z_load_ohm"}, "ports");
      if (it->contains("z_source_ohm")) cfg.ports.z_source_ohm = detail::read_complex(it->at("z_source_ohm"));
      if (it->contains("z_load_ohm")) cfg.ports.z_load_ohm = detail::read_complex(it->at("z_load_ohm"));
    }
    if (const auto it = doc.find("psd"); it != doc.end()) {
      expect_keys(*it, {"tx_dbm_per_hz", "noise_dbm_per_hz", "eta_max_bits_per_s_per_hz"}, "psd");
      read(*it, "tx_dbm_per_hz", cfg.psd.tx_dbm_per_hz);
      read(*it, "noise_dbm_per_hz", cfg.psd.noise_dbm_per_hz);
      read(*it, "eta_max_bits_per_s_per_hz", cfg.psd.eta_max_bits_per_s_per_hz);
    }
    if (const auto it = doc.find("traffic"); it != doc.end()) {
      expect_keys(*it, {"mean_users_per_cell", "user_rate_median_bps", "user_rate_sigma_ln", "max_cell_demand_bps"},
                  "traffic");
      read(*it, "mean_users_per_cell", cfg.traffic.mean_users_per_cell);
      read(*it, "user_rate_median_bps", cfg.traffic.user_rate_median_bps);
      read(*it, "user_rate_sigma_ln", cfg.traffic.user_rate_sigma_ln);
      read(*it, "max_cell_demand_bps", cfg.traffic.max_cell_demand_bps);
    }
    if (const auto it = doc.find("sweep"); it != doc.end()) {
      expect_keys(*it, {"densities", "replications", "master_seed"}, "sweep");
      read(*it, "densities", cfg.sweep.densities);
      read(*it, "replications", cfg.sweep.replications);
      read(*it, "master_seed", cfg.sweep.master_seed);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

inline nlohmann::json config_to_json(const SimConfig& cfg) {
  nlohmann::json doc;
  doc["territory"] = {{"width_m", cfg.territory.width_m},
                      {"height_m", cfg.territory.height_m},
                      {"cell_coverage_area_m2", cfg.territory.cell_coverage_area_m2}};
  nlohmann::json load = cfg.grid.house_load.low_ohm == cfg.grid.house_load.high_ohm
                            ? nlohmann::json(cfg.grid.house_load.low_ohm)
                            : nlohmann::json{{"low", cfg.grid.house_load.low_ohm}, {"high", cfg.grid.house_load.high_ohm}};
  doc["grid"] = {{"n_feeders", cfg.grid.n_feeders},
                 {"backbone_cable", cfg.grid.backbone_cable},
                 {"drop_cable", cfg.grid.drop_cable},
                 {"min_drop_length_m", cfg.grid.min_drop_length_m},
                 {"house_load_ohm", load}};
  doc["cables"] = nlohmann::json::object();
  for (const auto& [key, c] : cfg.cables) {
    doc["cables"][key] = {{"r0_ohm_per_m", c.r0_ohm_per_m},
                          {"f0_hz", c.f0_hz},
                          {"l_h_per_m", c.l_h_per_m},
                          {"g0_s_per_m", c.g0_s_per_m},
                          {"c_f_per_m", c.c_f_per_m}};
  }
  doc["band"] = {{"f_min_hz", cfg.band.f_min_hz}, {"f_max_hz", cfg.band.f_max_hz}, {"n_points", cfg.band.n_points}};
  doc["ports"] = {{"z_source_ohm", detail::write_complex(cfg.ports.z_source_ohm)},
                  {"z_load_ohm", detail::write_complex(cfg.ports.z_load_ohm)}};
  doc["psd"] = {{"tx_dbm_per_hz", cfg.psd.tx_dbm_per_hz},
                {"noise_dbm_per_hz", cfg.psd.noise_dbm_per_hz},
                {"eta_max_bits_per_s_per_hz", cfg.psd.eta_max_bits_per_s_per_hz}};
  doc["traffic"] = {{"mean_users_per_cell", cfg.traffic.mean_users_per_cell},
                    {"user_rate_median_bps", cfg.traffic.user_rate_median_bps},
                    {"user_rate_sigma_ln", cfg.traffic.user_rate_sigma_ln},
                    {"max_cell_demand_bps", cfg.traffic.max_cell_demand_bps}};
  doc["sweep"] = {{"densities", cfg.sweep.densities},
                  {"replications", cfg.sweep.replications},
                  {"master_seed", cfg.sweep.master_seed}};
  return doc;
}

/// Seed of replication rep_index at sweep position density_index:
///   mix64(mix64(mix64(master) ^ density_index) ^ rep_index)
/// with mix64 the splitmix64 finalizer. For a fixed (master, density_index) the map is a
/// bijection in rep_index, so replications of one density never share a seed.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t density_index, std::uint64_t rep_index) {
  return mix64(mix64(mix64(master_seed) ^ density_index) ^ rep_index);
}

/// Sweep position of a density, or its IEEE-754 bit pattern when it is not in the sweep list.
inline std::uint64_t density_key(const SimConfig& cfg, double density) {
  const auto it = std::find(cfg.sweep.densities.begin(), cfg.sweep.densities.end(), density);
  if (it != cfg.sweep.densities.end()) return static_cast<std::uint64_t>(it - cfg.sweep.densities.begin());
  return std::bit_cast<std::uint64_t>(density);
}

struct HeatmapRow {
  int cell_id = 0;
  double x_m = 0.0;
  double y_m = 0.0;
  int sector = 0;
  double acg_db = 0.0;
  double capacity_bps = 0.0;
  double demand_bps = 0.0;
  double effective_bps = 0.0;
};

/// Everything one replication produced, kept for inspection and the heatmap.
struct Replication {
  Deployment deployment;
  PowerGrid grid;
  std::vector<double> acg_db;
  std::vector<double> capacity_bps;
  DemandVector demand_bps;
  std::vector<SectorAllocation> sectors;
  NetworkMetrics metrics;
  std::vector<HeatmapRow> heatmap;
};

inline constexpr std::uint64_t kDeploymentStream = 1;
inline constexpr std::uint64_t kTrafficStream = 2;

/// deployment -> grid -> channels -> capacities -> demand -> per-sector TDMA -> metrics.
inline Replication run_replication(const SimConfig& cfg, double density, std::uint64_t seed) {
  Replication rep;
  Rng deployment_rng = Rng::substream(seed, kDeploymentStream);
  Rng traffic_rng = Rng::substream(seed, kTrafficStream);

  rep.deployment = generate_deployment(cfg.territory, density, cfg.grid.house_load, deployment_rng);
  rep.grid = build_power_grid(rep.deployment, cfg.grid);
  const std::size_t n = rep.deployment.cells.size();

  std::vector<int> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<int>(i);
  const auto responses = path_transfers(rep.grid, ids, cfg.cables, cfg.band, cfg.ports);
  rep.acg_db.resize(n);
  rep.capacity_bps.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    rep.acg_db[i] = responses[i].acg_db;
    rep.capacity_bps[i] = link_capacity(responses[i], cfg.psd, cfg.band).bps;
  }
  rep.demand_bps = generate_demand(n, cfg.traffic, traffic_rng);

  const auto n_sectors = static_cast<std::size_t>(cfg.grid.n_feeders);
  std::vector<std::vector<int>> members(n_sectors);
  for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(rep.grid.sector_of[i])].push_back(static_cast<int>(i));
  rep.sectors.reserve(n_sectors);
  for (const auto& cells : members) {
    std::vector<double> demand, capacity;
    for (const int c : cells) {
      demand.push_back(rep.demand_bps[static_cast<std::size_t>(c)]);
      capacity.push_back(rep.capacity_bps[static_cast<std::size_t>(c)]);
    }
    rep.sectors.push_back(tdma_allocate(cells, demand, capacity));
  }
  rep.metrics = network_metrics(rep.sectors, rep.demand_bps, rep.acg_db);

  rep.heatmap.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& cell = rep.deployment.cells[i];
    rep.heatmap[i] = {cell.id, cell.x_m, cell.y_m, rep.grid.sector_of[i], rep.acg_db[i], rep.capacity_bps[i],
                      rep.demand_bps[i], 0.0};
  }
  for (const auto& sector : rep.sectors) {
    for (std::size_t j = 0; j < sector.cell_ids.size(); ++j) {
      rep.heatmap[static_cast<std::size_t>(sector.cell_ids[j])].effective_bps = sector.effective_bps[j];
    }
  }
  return rep;
}

struct SweepRow {
  double density = 0.0;
  int rep = 0;
  double avg_cell_throughput_bps = 0.0;
  double aggregate_throughput_bps = 0.0;
  double gos = 1.0;
  double avg_acg_db = 0.0;
};

struct HeatmapTable {
  double density = 0.0;
  int rep = 0;
  std::vector<HeatmapRow> rows;
};

struct SweepOptions {
  unsigned threads = 1;  // 0: one per hardware thread
  bool keep_heatmaps = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<HeatmapTable> heatmaps;
};

/// One row per (density, replication), density-major. Each replication owns its seed, so the
/// rows do not depend on the thread count or completion order.
inline SweepResult run_sweep(const SimConfig& cfg, const SweepOptions& options = {}) {
  cfg.validate();
  const std::size_t reps = static_cast<std::size_t>(cfg.sweep.replications);
  const std::size_t jobs = cfg.sweep.densities.size() * reps;
  SweepResult result;
  result.rows.resize(jobs);
  if (options.keep_heatmaps) result.heatmaps.resize(jobs);

  auto run_job = [&](std::size_t job) {
    const std::size_t d = job / reps;
    const std::size_t r = job % reps;
    const double density = cfg.sweep.densities[d];
    const Replication rep = run_replication(cfg, density, derive_seed(cfg.sweep.master_seed, d, r));
    result.rows[job] = {density, static_cast<int>(r), rep.metrics.avg_cell_throughput_bps,
                        rep.metrics.aggregate_throughput_bps, rep.metrics.gos, rep.metrics.avg_acg_db};
    if (options.keep_heatmaps) result.heatmaps[job] = {density, static_cast<int>(r), rep.heatmap};
  };

  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(jobs, 1)));
  if (threads <= 1) {
    for (std::size_t job = 0; job < jobs; ++job) run_job(job);
    return result;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t job = next++; job < jobs; job = next++) {
          try {
            run_job(job);
          } catch (...) {
            const std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = jobs;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

/// printf %.9g.
inline std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

inline constexpr const char* kSweepHeader = "density,rep,avg_cell_throughput_bps,aggregate_throughput_bps,gos,avg_acg_db";
inline constexpr const char* kHeatmapHeader = "cell_id,x_m,y_m,sector,acg_db,capacity_bps,demand_bps,effective_bps";

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << kSweepHeader << '\n';
  for (const auto& r : rows) {
    os << format_number(r.density) << ',' << r.rep << ',' << format_number(r.avg_cell_throughput_bps) << ','
       << format_number(r.aggregate_throughput_bps) << ',' << format_number(r.gos) << ','
       << format_number(r.avg_acg_db) << '\n';
  }
}

inline void write_heatmap_csv(std::ostream& os, const std::vector<HeatmapRow>& rows) {
  os << kHeatmapHeader << '\n';
  for (const auto& r : rows) {
    os << r.cell_id << ',' << format_number(r.x_m) << ',' << format_number(r.y_m) << ',' << r.sector << ','
       << format_number(r.acg_db) << ',' << format_number(r.capacity_bps) << ',' << format_number(r.demand_bps)
       << ',' << format_number(r.effective_bps) << '\n';
  }
}

inline std::string heatmap_filename(double density, int rep) {
  return "heatmap_" + format_number(density) + "_" + std::to_string(rep) + ".csv";
}

namespace detail {

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  writer(out);
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace detail

/// One heatmap_<density>_<rep>.csv per table in out_dir.
inline void write_heatmaps(const std::vector<HeatmapTable>& heatmaps, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + out_dir.string() + ": " + ec.message());
  for (const auto& table : heatmaps) {
    detail::write_file(out_dir / heatmap_filename(table.density, table.rep),
                       [&](std::ostream& os) { write_heatmap_csv(os, table.rows); });
  }
}

/// sweep.csv plus the heatmap files.
inline void write_outputs(const std::vector<SweepRow>& rows, const std::vector<HeatmapTable>& heatmaps,
                          const std::filesystem::path& out_dir) {
  write_heatmaps(heatmaps, out_dir);
  detail::write_file(out_dir / "sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, rows); });
}

}  // namespace plcsim
