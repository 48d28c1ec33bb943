#pragma once

// Collision-avoidance wrapper interface: every strategy maps the desired
// input plus local non-delayed neighbor states to a safer input. The
// acceleration cap is applied by the caller, after the strategy.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "ringswarm/swarm.hpp"
#include "ringswarm/vecgeo.hpp"

namespace ringswarm {

enum class Strategy { none, potential, gyro, cbc, orca };

/// "none" | "potential" | "gyro" | "cbc" | "orca"; throws std::invalid_argument otherwise.
Strategy parse_strategy(std::string_view name);
std::string_view to_string(Strategy s);

/// Counters accumulated over a run. Plain integers; one instance per
/// simulation so no synchronization is needed.
struct Diagnostics {
  std::uint64_t qp_infeasible = 0;    ///< CBC: QP had no feasible point
  std::uint64_t brakes = 0;           ///< CBC: brake fallback taken
  std::uint64_t barrier_breaches = 0; ///< CBC: neighbor at or inside D_s
  std::uint64_t b_clamps = 0;         ///< CBC: constraint bound clamped at 1e12
  std::uint64_t lp_fallbacks = 0;     ///< ORCA: empty feasible region
  std::uint64_t clip_saturations = 0; ///< acceleration cap was active
  std::uint64_t degenerate_metrics = 0;

  Diagnostics &operator+=(const Diagnostics &o);
  friend bool operator==(const Diagnostics &, const Diagnostics &) = default;
};

struct AvoidanceRequest {
  Vec2 u_des;
  Vec2 pos;
  Vec2 vel;
  std::size_t self_index = 0;  ///< used only for deterministic tie-breaks
  std::span<const Neighbor> neighbors;
  SwarmParams params;
  double dt = 0.015;
};

/// Deterministic unit direction used when two agents coincide exactly.
inline Vec2 parity_direction(std::size_t self_index) {
  return {self_index % 2 == 0 ? 1.0 : -1.0, 0.0};
}

/// Shared magnitude profile U(d) = 2 (c_r / l_r) exp(-2 d / l_r).
double repulsion_magnitude(double d, double c_r, double l_r);

Vec2 avoid_none(const AvoidanceRequest &req);

/// Adds a repulsion of magnitude U(d) per neighbor, directed away from it.
Vec2 avoid_potential(const AvoidanceRequest &req);

/// Steers orthogonally to the velocity away from the nearest neighbor with
/// magnitude U(d). Head-on encounters steer left. No steering at rest.
Vec2 avoid_gyro(const AvoidanceRequest &req);

/// Dispatches to the selected strategy.
Vec2 avoid(Strategy s, const AvoidanceRequest &req, Diagnostics *diag = nullptr);

}  // namespace ringswarm
