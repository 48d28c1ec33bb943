#pragma once

// Optimal reciprocal collision avoidance.
//
// Each neighbor contributes one half-plane of permitted velocities built
// from the truncated velocity obstacle over the planning horizon c_r, with
// each agent taking half of the required correction. The new velocity is
// the point of (disc of radius v0) ∩ (all half-planes) nearest to the
// preferred velocity vel + dt u_des, found by incremental 2D linear
// programming. When that set is empty the velocity that minimizes the
// largest half-plane violation is used instead.

#include <span>
#include <vector>

#include "ringswarm/avoidance.hpp"
#include "ringswarm/vecgeo.hpp"

namespace ringswarm {

/// Permitted set { v : (v - point).normal >= 0 }, |normal| = 1.
struct HalfPlane {
  Vec2 point;
  Vec2 normal;

  double violation(Vec2 v) const { return dot(point - v, normal); }
};

struct VelocityQuery {
  Vec2 v_pref;
  std::span<const HalfPlane> planes;
  double speed_cap = 0.0;
};

/// Half-plane for agent i induced by neighbor j. `self_index` only breaks
/// the tie when the two positions coincide exactly.
HalfPlane orca_halfplane(Vec2 pos_i, Vec2 vel_i, Vec2 pos_j, Vec2 vel_j, double d_s,
                         double horizon, double dt, std::size_t self_index = 0);

struct LpResult {
  Vec2 velocity;
  bool feasible = true;  ///< false when fallback_safest produced the answer
};

/// Closest point to v_pref in the closed speed disc intersected with every
/// plane; planes are inserted in the given order.
LpResult solve_velocity_lp(const VelocityQuery &query);

/// Point of the closed speed disc minimizing max_k planes[k].violation(v).
Vec2 fallback_safest(const VelocityQuery &query);

Vec2 avoid_orca(const AvoidanceRequest &req, Diagnostics *diag = nullptr);

}  // namespace ringswarm
