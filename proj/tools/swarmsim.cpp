// swarmsim: single runs, parameter sweeps and report tables for the
// delayed-attraction ring swarm with collision avoidance.
//
// Exit codes: 0 success, 1 invalid configuration, 2 runtime abort of a
// single run.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ringswarm/sim.hpp"
#include "ringswarm/sweep.hpp"

namespace fs = std::filesystem;
using namespace ringswarm;

namespace {

constexpr int kExitInvalid = 1;
constexpr int kExitAbort = 2;

std::ofstream open_out(const fs::path &path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::vector<SweepRecord> read_records(const fs::path &path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  return read_records_csv(in);
}

void write_reports(const fs::path &dir, const std::vector<SweepRecord> &records) {
  const auto cells = aggregate_cells(records);
  const auto flat = flatten_best_cr(cells);
  {
    auto out = open_out(dir / "cells.csv");
    write_cells_csv(out, cells);
  }
  {
    auto out = open_out(dir / "best_cr.csv");
    write_flat_csv(out, flat);
  }
  {
    auto out = open_out(dir / "lambda_vs_r.csv");
    write_size_csv(out, average_over_lr(flat));
  }
  {
    auto out = open_out(dir / "lambda_vs_n_cr.csv");
    write_scaling_csv(out, scaling_table(cells));
  }
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Ring-state swarm simulator with collision avoidance"};
  app.require_subcommand(1);

  // run
  SimConfig cfg;
  std::string strategy = "none";
  bool no_collisions = false;
  std::string metrics_out, summary_out, trajectory_out;
  auto *run_cmd = app.add_subcommand("run", "Run a single simulation");
  run_cmd->add_option("--n", cfg.params.n, "Number of agents")->capture_default_str();
  run_cmd->add_option("--alpha", cfg.params.alpha, "Attraction gain")->capture_default_str();
  run_cmd->add_option("--beta", cfg.params.beta, "Speed gain")->capture_default_str();
  run_cmd->add_option("--v0", cfg.params.v0, "Set-point speed")->capture_default_str();
  run_cmd->add_option("--t-d", cfg.params.t_d, "Attraction delay [s]")->capture_default_str();
  run_cmd->add_option("--r", cfg.params.r, "Agent radius [m]")->capture_default_str();
  run_cmd->add_option("--l-r", cfg.params.l_r, "Sensing radius [m]")->capture_default_str();
  run_cmd->add_option("--c-r", cfg.params.c_r, "Cautiousness")->capture_default_str();
  run_cmd->add_option("--a-max", cfg.params.a_max, "Acceleration cap")->capture_default_str();
  run_cmd->add_option("--strategy", strategy, "none|potential|gyro|cbc|orca")->capture_default_str();
  run_cmd->add_option("--seed", cfg.seed, "Initial-condition seed")->capture_default_str();
  auto *t_total_opt =
      run_cmd->add_option("--t-total", cfg.t_total, "Terminal time [s] (default 12000; 32000 for potential/gyro)");
  run_cmd->add_option("--t-measure", cfg.t_measure, "Averaging window [s]")->capture_default_str();
  run_cmd->add_option("--dt-cap", cfg.dt_cap, "Upper bound on the time step")->capture_default_str();
  run_cmd->add_option("--record-stride", cfg.record_stride, "Steps between metric samples")
      ->capture_default_str();
  run_cmd->add_option("--snapshot", cfg.snapshot_times, "Trajectory snapshot time (repeatable)");
  run_cmd->add_flag("--no-collisions", no_collisions, "Disable collision detection and respawn");
  run_cmd->add_option("--metrics-out", metrics_out, "CSV of t,fatness,tangentness");
  run_cmd->add_option("--summary-out", summary_out, "JSON summary (default: stdout)");
  run_cmd->add_option("--trajectory-out", trajectory_out, "CSV of t,index,x,y,vx,vy");

  // sweep
  std::string spec_path, out_dir;
  std::size_t workers = 1;
  bool resume = false;
  bool scaling = false;
  auto *sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep from a JSON spec");
  sweep_cmd->add_option("spec", spec_path, "Sweep spec file")->required();
  sweep_cmd->add_option("--out", out_dir, "Output directory")->required();
  sweep_cmd->add_option("--workers", workers, "Parallel simulations")->capture_default_str();
  sweep_cmd->add_flag("--resume", resume, "Continue from out/checkpoint.jsonl");
  sweep_cmd->add_flag("--scaling", scaling,
                      "Pin the non-swept parameters to the N-scaling study values");

  // flatten
  std::string flat_in, flat_out;
  auto *flat_cmd = app.add_subcommand("flatten", "Best lambda over c_r per (r, l_r)");
  flat_cmd->add_option("records", flat_in, "records.csv from a sweep")->required();
  flat_cmd->add_option("--out", flat_out, "Output CSV (default: stdout)");

  // report
  std::string report_in, report_dir;
  auto *report_cmd = app.add_subcommand("report", "Write all reduction tables for a sweep");
  report_cmd->add_option("records", report_in, "records.csv from a sweep")->required();
  report_cmd->add_option("--out", report_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*run_cmd) {
      cfg.strategy = parse_strategy(strategy);
      if (t_total_opt->count() == 0) cfg.t_total = default_t_total(cfg.strategy);
      cfg.detect_collisions = !no_collisions;
      cfg.validate();
      std::vector<TrajectoryRecord> traj;
      MetricsSeries series;
      try {
        series = run(cfg, trajectory_out.empty() ? nullptr : &traj);
      } catch (const SimulationAborted &e) {
        std::cerr << "run aborted: " << e.what() << '\n';
        return kExitAbort;
      }
      if (!metrics_out.empty()) {
        auto out = open_out(metrics_out);
        write_metrics_csv(out, series);
      }
      if (!trajectory_out.empty()) {
        auto out = open_out(trajectory_out);
        write_trajectory_csv(out, traj);
      }
      if (!summary_out.empty()) {
        auto out = open_out(summary_out);
        write_summary_json(out, cfg, series);
      } else {
        write_summary_json(std::cout, cfg, series);
      }
      return 0;
    }

    if (*sweep_cmd) {
      SweepSpec spec = load_sweep_spec(spec_path);
      const fs::path dir(out_dir);
      fs::create_directories(dir);
      SweepOptions opts;
      opts.workers = workers;
      opts.checkpoint = dir / "checkpoint.jsonl";
      opts.resume = resume;
      opts.progress = [](std::size_t done, std::size_t total) {
        std::cerr << "\r" << done << "/" << total << std::flush;
      };
      if (scaling) {
        // Same pinning as scaling_study(), but keep the raw records too.
        if (spec.base.strategy != Strategy::cbc && spec.base.strategy != Strategy::orca)
          throw std::invalid_argument("--scaling requires strategy cbc or orca");
        SwarmParams &p = spec.base.params;
        p = SwarmParams{.n = p.n, .c_r = p.c_r};
        spec.r = {p.r};
        spec.l_r = {p.l_r};
      }
      const SweepResult result = run_sweep(spec, opts);
      std::cerr << '\n';
      {
        auto out = open_out(dir / "records.csv");
        write_records_csv(out, result.records);
      }
      {
        auto out = open_out(dir / "summary.json");
        write_sweep_summary_json(out, spec, result);
      }
      write_reports(dir, result.records);
      return 0;
    }

    if (*flat_cmd) {
      const auto flat = flatten_best_cr(aggregate_cells(read_records(flat_in)));
      if (flat_out.empty()) {
        write_flat_csv(std::cout, flat);
      } else {
        auto out = open_out(flat_out);
        write_flat_csv(out, flat);
      }
      return 0;
    }

    if (*report_cmd) {
      write_reports(report_dir, read_records(report_in));
      return 0;
    }
  } catch (const std::invalid_argument &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitAbort;
  }
  return 0;
}
