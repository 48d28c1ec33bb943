#pragma once

// Control-barrier-certificate safety filter.
//
// For each neighbor j the barrier
//
//   h = dp.dv/|dp| + sqrt(4 a_max (|dp| - D_s)),   B = 1/h
//
// (dp = p_i - p_j, dv = v_i - v_j) must obey dB/dt <= 1/(c_r B). Agent i
// assumes j keeps its velocity, so the condition is linear in u_i and
// becomes one half-plane a.u <= b. The filtered input is the point closest
// to u_des inside all half-planes and the box |u|_inf <= a_max.

#include <optional>
#include <span>
#include <vector>

#include "ringswarm/avoidance.hpp"
#include "ringswarm/vecgeo.hpp"

namespace ringswarm {

/// Bound magnitude at which a constraint right-hand side is clamped.
inline constexpr double kBarrierBoundClamp = 1e12;

struct BarrierPair {
  Vec2 dp;
  Vec2 dv;
  double h = 0.0;
  double B = 0.0;
  /// |dp| <= D_s: the barrier is undefined and the caller must brake.
  bool breached = false;
};

/// a.u <= b
struct LinearConstraint {
  Vec2 a;
  double b = 0.0;
  bool clamped = false;  ///< |b| hit kBarrierBoundClamp
};

struct QPProblem {
  Vec2 target;
  std::vector<LinearConstraint> constraints;
  double box = 0.0;  ///< infinity-norm bound on u
};

BarrierPair barrier_terms(Vec2 pos_i, Vec2 vel_i, Vec2 pos_j, Vec2 vel_j,
                          double a_max, double d_s);

/// Linearized barrier condition for a non-breached pair.
///
///   a = -dp/|dp|
///   b = h^3/c_r + |dv|^2/|dp| - (dp.dv)^2/|dp|^3
///       + 2 a_max (dp.dv/|dp|) / sqrt(4 a_max (|dp| - D_s))
///
/// The last term diverges as |dp| -> D_s; b is clamped to +-1e12.
LinearConstraint cbc_constraint(const BarrierPair &pair, double c_r, double a_max, double d_s);

/// Exact minimizer of |u - target|^2 over the constraint polygon intersected
/// with the box, or nullopt when that polygon is empty.
///
/// Enumerates the active-set candidates of a two-variable QP: the
/// unconstrained point, projections onto every constraint line, and every
/// pairwise line intersection; the cheapest feasible candidate wins.
std::optional<Vec2> solve_qp(const QPProblem &problem);

/// Smallest sensing radius for which the barrier filter guarantees safety.
double cbc_min_sensing_radius(double c_r, double a_max, double v_max, double d_s);

/// Safety filter. Falls back to braking (-vel) when the QP is infeasible or
/// a neighbor is already inside the safety distance.
Vec2 avoid_cbc(const AvoidanceRequest &req, Diagnostics *diag = nullptr);

}  // namespace ringswarm
