// sim: command-line driver for the PLC backhaul simulator.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "plcsim/plcsim.hpp"

namespace {

struct Options {
  std::string config;
  std::string out = ".";
  double density = 0.0;
  int rep = 0;
  std::optional<std::uint64_t> master_seed;
  unsigned threads = 1;
  bool heatmaps = false;
  std::optional<int> dump_cell;
};

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--config", opt.config, "simulation config (JSON)")->required();
  cmd->add_option("--out", opt.out, "output directory");
  cmd->add_option("--master-seed", opt.master_seed, "override sweep.master_seed");
}

void add_single(CLI::App* cmd, Options& opt) {
  add_common(cmd, opt);
  cmd->add_option("--density", opt.density, "normalized density in [0, 1]")->required();
  cmd->add_option("--rep", opt.rep, "replication index")->required()->check(CLI::NonNegativeNumber);
  cmd->add_option("--dump-channel", opt.dump_cell, "also write channel_<cell>.csv for this cell");
}

plcsim::SimConfig load(const Options& opt) {
  plcsim::SimConfig cfg = plcsim::load_config(opt.config);
  if (opt.master_seed) cfg.sweep.master_seed = *opt.master_seed;
  return cfg;
}

plcsim::Replication run_one(const plcsim::SimConfig& cfg, const Options& opt) {
  if (!(opt.density >= 0.0 && opt.density <= 1.0)) throw plcsim::ConfigError("--density must lie in [0, 1]");
  const std::uint64_t seed = plcsim::derive_seed(cfg.sweep.master_seed, plcsim::density_key(cfg, opt.density),
                                                 static_cast<std::uint64_t>(opt.rep));
  return plcsim::run_replication(cfg, opt.density, seed);
}

void dump_channel(const plcsim::SimConfig& cfg, const plcsim::Replication& rep, const Options& opt) {
  if (!opt.dump_cell) return;
  const auto response = plcsim::path_transfer(rep.grid, *opt.dump_cell, cfg.cables, cfg.band, cfg.ports);
  const auto path = std::filesystem::path(opt.out) / ("channel_" + std::to_string(*opt.dump_cell) + ".csv");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  plcsim::write_response_csv(out, cfg.band, response);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte-Carlo simulator for power-line backhaul of femto-cell networks"};
  app.require_subcommand(1);
  Options opt;

  auto* single = app.add_subcommand("single", "one replication: sweep.csv row plus its heatmap");
  add_single(single, opt);
  auto* heatmap = app.add_subcommand("heatmap", "per-cell heatmap of one replication");
  add_single(heatmap, opt);
  auto* sweep = app.add_subcommand("sweep", "all densities x replications into sweep.csv");
  add_common(sweep, opt);
  sweep->add_option("--threads", opt.threads, "worker threads, 0 for one per hardware thread");
  sweep->add_flag("--heatmaps", opt.heatmaps, "also write every replication's heatmap");

  CLI11_PARSE(app, argc, argv);

  try {
    const plcsim::SimConfig cfg = load(opt);
    if (*single || *heatmap) {
      const auto rep = run_one(cfg, opt);
      std::vector<plcsim::HeatmapTable> tables{{opt.density, opt.rep, rep.heatmap}};
      if (*single) {
        const std::vector<plcsim::SweepRow> rows{{opt.density, opt.rep, rep.metrics.avg_cell_throughput_bps,
                                                  rep.metrics.aggregate_throughput_bps, rep.metrics.gos,
                                                  rep.metrics.avg_acg_db}};
        plcsim::write_outputs(rows, tables, opt.out);
      } else {
        plcsim::write_heatmaps(tables, opt.out);
      }
      dump_channel(cfg, rep, opt);
    } else {
      const auto result = plcsim::run_sweep(cfg, {opt.threads, opt.heatmaps});
      plcsim::write_outputs(result.rows, result.heatmaps, opt.out);
    }
  } catch (const plcsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
