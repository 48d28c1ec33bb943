#pragma once

// Parameter sweeps over (r, l_r, c_r, N) x seeds, with a resumable
// append-only checkpoint and the reductions used to tune c_r: seed averages,
// best-c_r flattening, averaging over l_r, and the N-scaling table.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ringswarm/sim.hpp"

namespace ringswarm {

enum class AxisScale { linear, log };

AxisScale parse_axis_scale(std::string_view s);
std::string_view to_string(AxisScale s);

/// `count` points from lo to hi inclusive, evenly spaced in the value
/// (linear) or log10 (log) domain. count == 1 yields {lo}.
std::vector<double> make_axis(double lo, double hi, std::size_t count, AxisScale scale);

struct CrRange {
  double lo;
  double hi;
  AxisScale scale;
};

/// Tested c_r range per strategy: potential/gyro [0,1] linear,
/// cbc [1e-5,1e5] log, orca [0.1,10] log.
CrRange default_cr_range(Strategy s);

struct SweepSpec {
  SimConfig base;
  std::vector<double> r;
  std::vector<double> l_r;
  std::vector<double> c_r;
  std::vector<std::size_t> n;
  std::vector<std::uint64_t> seeds;

  /// Throws std::invalid_argument for empty axes or invalid cell configs.
  void validate() const;
};

/// Parses the JSON sweep spec (schema documented in README.md).
SweepSpec parse_sweep_spec(std::string_view json_text);
SweepSpec load_sweep_spec(const std::filesystem::path &path);

struct CellKey {
  double r = 0.0;
  double l_r = 0.0;
  double c_r = 0.0;
  std::size_t n = 0;

  friend bool operator==(const CellKey &, const CellKey &) = default;
};

/// Stable hex digest of the cell parameters; keys the checkpoint log.
std::string cell_hash(const CellKey &cell);

struct SweepJob {
  CellKey cell;
  std::uint64_t seed = 0;
};

/// Jobs in canonical order: r, then l_r, then c_r, then N, then seed.
std::vector<SweepJob> enumerate_jobs(const SweepSpec &spec);

/// The single-run configuration of one job.
SimConfig job_config(const SweepSpec &spec, const SweepJob &job);

struct SweepRecord {
  CellKey cell;
  std::uint64_t seed = 0;
  std::optional<double> lambda;  ///< empty when the run aborted
  double mean_fatness = 0.0;
  double mean_tangentness = 0.0;
  std::uint64_t collisions = 0;
  Diagnostics diagnostics;
  std::string error;
};

struct SweepResult {
  std::vector<SweepRecord> records;  ///< canonical job order
  std::size_t computed = 0;          ///< jobs simulated in this call
  std::size_t resumed = 0;           ///< jobs taken from the checkpoint
  bool complete = true;
};

struct SweepOptions {
  std::size_t workers = 1;
  /// Append-only JSON-lines log; empty disables checkpointing.
  std::filesystem::path checkpoint;
  /// Reuse records already in `checkpoint` instead of truncating it.
  bool resume = false;
  /// Stop after simulating this many jobs (interruption testing).
  std::optional<std::size_t> stop_after;
  std::function<void(std::size_t done, std::size_t total)> progress;
};

SweepRecord run_job(const SweepSpec &spec, const SweepJob &job);

/// Runs every job. Output is independent of worker count and of how the
/// work was split across interrupted and resumed invocations.
SweepResult run_sweep(const SweepSpec &spec, const SweepOptions &options = {});

struct CellAggregate {
  CellKey cell;
  std::optional<double> mean_lambda;  ///< over seeds that completed
  std::size_t seeds_ok = 0;
  std::size_t seeds_total = 0;
  double mean_collisions = 0.0;
};

/// Seed-averaged lambda per cell, in first-appearance order of the records.
std::vector<CellAggregate> aggregate_cells(const std::vector<SweepRecord> &records);

struct FlatRow {
  double r = 0.0;
  double l_r = 0.0;
  std::size_t n = 0;
  std::optional<double> best_lambda;
  std::optional<double> best_c_r;
};

/// Per (r, l_r, N): the best seed-averaged lambda over c_r and its c_r.
/// Ties go to the smaller c_r.
std::vector<FlatRow> flatten_best_cr(const std::vector<CellAggregate> &cells);

struct SizeRow {
  double r = 0.0;
  std::size_t n = 0;
  std::optional<double> mean_lambda;
  std::size_t count = 0;  ///< l_r values that contributed
};

/// Mean of best lambda across l_r per (r, N); missing cells are excluded.
std::vector<SizeRow> average_over_lr(const std::vector<FlatRow> &flat);

struct ScalingRow {
  std::size_t n = 0;
  double c_r = 0.0;
  std::optional<double> mean_lambda;
  std::size_t seeds_ok = 0;
};

/// Seed-averaged lambda per (N, c_r), averaged over any other axes.
std::vector<ScalingRow> scaling_table(const std::vector<CellAggregate> &cells);

/// Fixes the non-swept parameters to the scaling-study values (r = 0.15,
/// l_r = 1, alpha = 0.001, t_d = 2.5, beta = 1, v0 = 0.12, a_max = 0.6),
/// runs the sweep over the N and c_r axes and reduces it to a table.
/// Only cbc and orca are accepted.
std::vector<ScalingRow> scaling_study(SweepSpec spec, const SweepOptions &options = {});

// Delimited-text I/O. Missing values are written as "NA".
void write_records_csv(std::ostream &out, const std::vector<SweepRecord> &records);
std::vector<SweepRecord> read_records_csv(std::istream &in);
void write_cells_csv(std::ostream &out, const std::vector<CellAggregate> &cells);
void write_flat_csv(std::ostream &out, const std::vector<FlatRow> &rows);
void write_size_csv(std::ostream &out, const std::vector<SizeRow> &rows);
void write_scaling_csv(std::ostream &out, const std::vector<ScalingRow> &rows);
/// Machine-readable JSON summary of a sweep.
void write_sweep_summary_json(std::ostream &out, const SweepSpec &spec, const SweepResult &result);

}  // namespace ringswarm
