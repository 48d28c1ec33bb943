#pragma once

// Fixed-step simulation of the delayed-attraction swarm with physical size,
// collision respawn and a pluggable collision-avoidance strategy, plus the
// ring-quality metrics (fatness, tangentness, lambda).

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ringswarm/avoidance.hpp"
#include "ringswarm/swarm.hpp"

namespace ringswarm {

struct SimConfig {
  SwarmParams params;
  Strategy strategy = Strategy::none;
  std::uint64_t seed = 0;
  double t_total = 12000.0;  ///< terminal time [s]
  double t_measure = 2000.0; ///< averaging window T ending at t_total [s]
  double dt_cap = 0.015;
  std::size_t record_stride = 10;  ///< steps between metric samples
  std::vector<double> snapshot_times;
  /// When false, overlaps are never detected (point-agent baseline).
  bool detect_collisions = true;
  /// Replaces the spiral initialization when set; size must equal params.n.
  std::optional<SwarmState> initial_state;

  /// Throws std::invalid_argument describing the first problem found.
  void validate() const;
};

struct MetricSample {
  double t = 0.0;
  double fatness = 0.0;
  double tangentness = 0.0;
};

struct CollisionEvent {
  double time = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
};

struct MetricsSeries {
  double dt = 0.0;
  std::uint64_t steps = 0;
  std::vector<MetricSample> samples;
  double mean_fatness = 0.0;
  double mean_tangentness = 0.0;
  double lambda = 0.0;
  std::uint64_t collisions = 0;
  std::vector<CollisionEvent> events;
  Diagnostics diagnostics;
  /// Smallest center-to-center distance over all step boundaries.
  double min_pair_distance = 0.0;
  /// Largest applied input magnitude over all agents and steps.
  double max_input_norm = 0.0;
};

struct TrajectoryRecord {
  double t = 0.0;
  std::size_t index = 0;
  Vec2 pos;
  Vec2 vel;
};

/// Raised when the state becomes non-finite; this indicates a numerical
/// bug rather than a model outcome.
class SimulationAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Default terminal time: 32000 s for potential and gyro, 12000 s otherwise.
double default_t_total(Strategy s);

/// min(r / v_max, dt_cap) with v_max = 2 v0. Point agents (r <= 0) use the cap.
double compute_dt(double r, double v0, double dt_cap = 0.015);

/// Initial inter-agent spacing max(5r, l_r); 0.01 m when both are zero.
double spiral_spacing(const SwarmParams &params);

/// Agents on an Archimedean spiral with pairwise spacing >= spiral_spacing,
/// all moving at v0 with headings drawn from a counter-based generator.
SwarmState init_spiral(const SwarmParams &params, std::uint64_t seed);

/// Finds overlapping pairs (distance < 2r) and moves each pair to the
/// lower-left corner of the pre-respawn bounding box, stacked diagonally,
/// with zero velocity. An agent is respawned at most once per call.
std::vector<CollisionEvent> detect_and_respawn(SwarmState &state, double r, double t);

struct Order {
  double fatness = 0.0;
  double tangentness = 0.0;
  bool degenerate = false;  ///< some agent sat on the centroid or was at rest
};

/// Fatness and tangentness of one snapshot.
Order metrics_step(std::span<const Vec2> pos, std::span<const Vec2> vel);

/// 1 - max(mean fatness, mean tangentness).
double ring_quality(double mean_fatness, double mean_tangentness);

/// Runs one simulation. Snapshots at config.snapshot_times are appended to
/// `trajectory` when it is non-null.
MetricsSeries run(const SimConfig &config, std::vector<TrajectoryRecord> *trajectory = nullptr);

/// Columns: t,index,x,y,vx,vy
void write_trajectory_csv(std::ostream &out, std::span<const TrajectoryRecord> records);
/// Columns: t,fatness,tangentness
void write_metrics_csv(std::ostream &out, const MetricsSeries &series);
/// Summary block (lambda, means, collisions, diagnostics) as JSON.
void write_summary_json(std::ostream &out, const SimConfig &config, const MetricsSeries &series);

}  // namespace ringswarm
