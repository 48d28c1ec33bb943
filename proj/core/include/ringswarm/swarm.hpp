#pragma once

// Swarm state, delayed-position history, local neighbor queries and the
// delayed-attraction ring controller.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ringswarm/vecgeo.hpp"

namespace ringswarm {

struct SwarmParams {
  std::size_t n = 20;   ///< number of agents
  double alpha = 0.001; ///< attraction gain [1/s^2]
  double beta = 1.0;    ///< speed-regulation gain [s/m^2]
  double v0 = 0.12;     ///< set-point speed [m/s]
  double t_d = 2.5;     ///< attraction delay [s]
  double r = 0.15;      ///< agent radius [m]
  double l_r = 1.0;     ///< sensing radius [m]
  double c_r = 1.0;     ///< cautiousness, meaning depends on the avoidance strategy
  double a_max = 0.6;   ///< acceleration cap [m/s^2]

  /// Minimum separation the safety filters try to keep: diameter plus 5%.
  double safety_distance() const { return 2.1 * r; }
  /// Speed bound used by the time-step rule and the CBC sensing bound.
  double v_max() const { return 2.0 * v0; }

  /// Throws std::invalid_argument on non-finite or out-of-domain fields.
  void validate() const;
};

struct AgentState {
  Vec2 pos;
  Vec2 vel;
  std::uint64_t respawns = 0;
};

/// Structure-of-arrays swarm state. All three arrays have the same length.
struct SwarmState {
  std::vector<Vec2> pos;
  std::vector<Vec2> vel;
  std::vector<std::uint64_t> respawns;

  SwarmState() = default;
  explicit SwarmState(std::size_t n) : pos(n), vel(n), respawns(n, 0) {}

  std::size_t size() const { return pos.size(); }
  AgentState agent(std::size_t i) const { return {pos[i], vel[i], respawns[i]}; }
};

/// Ring buffer of per-agent position snapshots, one per simulation step.
///
/// Holds ceil(t_d/dt)+1 snapshots and answers lookups lagged by
/// round(t_d/dt) steps. Until the buffer has seen that many steps the
/// oldest recorded snapshot is returned instead.
class DelayBuffer {
 public:
  DelayBuffer(std::size_t n_agents, double t_d, double dt);

  std::size_t capacity() const { return capacity_; }
  std::size_t lag_steps() const { return lag_; }
  std::size_t recorded() const { return count_; }

  /// Pushes `current` as the newest snapshot and returns the lagged one.
  /// The returned span stays valid until the next call.
  std::span<const Vec2> record_and_query(std::span<const Vec2> current);

 private:
  std::span<const Vec2> slot(std::size_t k) const;

  std::size_t n_;
  std::size_t capacity_;
  std::size_t lag_;
  std::size_t head_ = 0;  // next slot to write
  std::size_t count_ = 0;
  std::vector<Vec2> data_;
};

struct Neighbor {
  std::size_t index;
  Vec2 pos;
  Vec2 vel;
};

using NeighborView = std::vector<Neighbor>;

/// All j != self with ||pos[self] - pos[j]|| <= l_r, in ascending j.
NeighborView neighbor_set(std::size_t self, std::span<const Vec2> pos,
                          std::span<const Vec2> vel, double l_r);

/// Same as neighbor_set, reusing `out`'s storage.
void collect_neighbors(std::size_t self, std::span<const Vec2> pos,
                       std::span<const Vec2> vel, double l_r, NeighborView &out);

/// Ring-state controller: speed regulation toward v0 plus attraction toward
/// every other agent's delayed position (all-to-all). For n = 1 the
/// attraction sum is empty and only the speed term remains.
Vec2 desired_control(std::size_t self, std::span<const Vec2> pos,
                     std::span<const Vec2> vel, std::span<const Vec2> delayed_pos,
                     const SwarmParams &params);

}  // namespace ringswarm
