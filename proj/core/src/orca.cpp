#include "ringswarm/orca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ringswarm {

namespace {

constexpr double kParallelTol = 1e-12;

// Agents held against each other sit exactly on the obstacle boundary, where
// round-off alone would dip below D_s. Plan against a slightly larger disc.
constexpr double kRadiusMargin = 1e-9;

// Internal line form: permitted side is to the left of `dir`, i.e.
// normal = rot90(dir).
struct Line {
  Vec2 point;
  Vec2 dir;
};

Line to_line(const HalfPlane &h) { return {h.point, {h.normal.y, -h.normal.x}}; }

// Signed violation of a line at v; positive means v is outside.
double excess(const Line &l, Vec2 v) { return crossz(l.dir, l.point - v); }

// Optimize on the boundary of lines[k], restricted by lines[0..k) and the
// disc. With `direction_mode` the objective is to go as far as possible
// along `target` (a unit vector); otherwise it is the closest point to
// `target`. Returns false when the admissible segment is empty.
bool solve_on_line(std::span<const Line> lines, std::size_t k, double radius, Vec2 target,
                   bool direction_mode, Vec2 &result) {
  const Line &line = lines[k];
  const double along = dot(line.point, line.dir);
  const double disc = along * along + radius * radius - norm_sq(line.point);
  if (disc < 0.0) return false;

  const double root = std::sqrt(disc);
  double t_lo = -along - root;
  double t_hi = -along + root;

  for (std::size_t i = 0; i < k; ++i) {
    const double denom = crossz(line.dir, lines[i].dir);
    const double numer = crossz(lines[i].dir, line.point - lines[i].point);
    if (std::abs(denom) <= kParallelTol) {
      if (numer < 0.0) return false;
      continue;
    }
    const double t = numer / denom;
    if (denom >= 0.0) {
      t_hi = std::min(t_hi, t);
    } else {
      t_lo = std::max(t_lo, t);
    }
    if (t_lo > t_hi) return false;
  }

  if (direction_mode) {
    result = line.point + (dot(target, line.dir) > 0.0 ? t_hi : t_lo) * line.dir;
  } else {
    const double t = std::clamp(dot(line.dir, target - line.point), t_lo, t_hi);
    result = line.point + t * line.dir;
  }
  return true;
}

// Incremental 2D LP. Returns the index of the first line that could not be
// satisfied, or lines.size() on success.
std::size_t solve_2d(std::span<const Line> lines, double radius, Vec2 target,
                     bool direction_mode, Vec2 &result) {
  if (direction_mode) {
    result = radius * target;
  } else if (norm_sq(target) > radius * radius) {
    result = radius * normalized(target);
  } else {
    result = target;
  }

  for (std::size_t k = 0; k < lines.size(); ++k) {
    if (excess(lines[k], result) > 0.0) {
      const Vec2 previous = result;
      if (!solve_on_line(lines, k, radius, target, direction_mode, result)) {
        result = previous;
        return k;
      }
    }
  }
  return lines.size();
}

// Minimax over the disc: the largest violation is pushed down one line at a
// time by solving a 2D LP on the bisectors of the newly dominant line with
// every earlier line.
Vec2 solve_minimax(std::span<const Line> lines, double radius) {
  Vec2 result;
  double worst = -std::numeric_limits<double>::infinity();
  std::vector<Line> bisectors;
  bisectors.reserve(lines.size());

  for (std::size_t k = 0; k < lines.size(); ++k) {
    if (excess(lines[k], result) <= worst) continue;

    bisectors.clear();
    for (std::size_t j = 0; j < k; ++j) {
      Line b;
      const double det = crossz(lines[k].dir, lines[j].dir);
      if (std::abs(det) <= kParallelTol) {
        // Same orientation: line k already dominates j everywhere.
        if (dot(lines[k].dir, lines[j].dir) > 0.0) continue;
        b.point = 0.5 * (lines[k].point + lines[j].point);
      } else {
        b.point = lines[k].point +
                  (crossz(lines[j].dir, lines[k].point - lines[j].point) / det) * lines[k].dir;
      }
      b.dir = normalized(lines[j].dir - lines[k].dir);
      bisectors.push_back(b);
    }

    const Vec2 previous = result;
    if (solve_2d(bisectors, radius, rot90(lines[k].dir), true, result) < bisectors.size()) {
      // Only reachable through round-off; keep the last good point.
      result = previous;
    }
    worst = excess(lines[k], result);
  }
  return result;
}

// Round-off in far-away line points can leave a result a hair outside the
// disc; pull it back.
Vec2 into_disc(Vec2 v, double radius) {
  return norm_sq(v) > radius * radius ? radius * normalized(v) : v;
}

std::vector<Line> to_lines(std::span<const HalfPlane> planes) {
  std::vector<Line> lines;
  lines.reserve(planes.size());
  for (const auto &p : planes) lines.push_back(to_line(p));
  return lines;
}

}  // namespace

HalfPlane orca_halfplane(Vec2 pos_i, Vec2 vel_i, Vec2 pos_j, Vec2 vel_j, double d_s,
                         double horizon, double dt, std::size_t self_index) {
  Vec2 rel_pos = pos_j - pos_i;
  const Vec2 rel_vel = vel_i - vel_j;
  if (rel_pos == Vec2{}) {
    // Coincident: pretend j sits an infinitesimal step opposite to our
    // parity direction so the overlap branch below has a direction.
    rel_pos = -1e-12 * std::max(d_s, 1.0) * parity_direction(self_index);
  }
  const double dist_sq = norm_sq(rel_pos);
  const double radius_sq = d_s * d_s;

  Vec2 dir;
  Vec2 u;
  if (dist_sq > radius_sq) {
    const double inv_h = 1.0 / horizon;
    // w: relative velocity seen from the center of the truncation disc.
    const Vec2 w = rel_vel - inv_h * rel_pos;
    const double w_len_sq = norm_sq(w);
    const double w_dot = dot(w, rel_pos);

    if (w_dot < 0.0 && w_dot * w_dot > radius_sq * w_len_sq) {
      // Closest boundary point lies on the truncation arc.
      const double w_len = std::sqrt(w_len_sq);
      const Vec2 unit_w = w / w_len;
      dir = {unit_w.y, -unit_w.x};
      u = (d_s * inv_h - w_len) * unit_w;
    } else {
      // Closest boundary point lies on one of the cone legs.
      const double leg = std::sqrt(dist_sq - radius_sq);
      if (crossz(rel_pos, w) > 0.0) {
        dir = Vec2{rel_pos.x * leg - rel_pos.y * d_s, rel_pos.x * d_s + rel_pos.y * leg} / dist_sq;
      } else {
        dir = -(Vec2{rel_pos.x * leg + rel_pos.y * d_s, -rel_pos.x * d_s + rel_pos.y * leg} /
                dist_sq);
      }
      u = dot(rel_vel, dir) * dir - rel_vel;
    }
  } else {
    // Already overlapping: resolve within one time step.
    const double inv_dt = 1.0 / dt;
    Vec2 w = rel_vel - inv_dt * rel_pos;
    double w_len = norm(w);
    if (w_len <= kZeroTol) {
      w = -rel_pos;
      w_len = norm(w);
    }
    const Vec2 unit_w = w / w_len;
    dir = {unit_w.y, -unit_w.x};
    u = (d_s * inv_dt - w_len) * unit_w;
  }

  return {vel_i + 0.5 * u, rot90(dir)};
}

LpResult solve_velocity_lp(const VelocityQuery &query) {
  const std::vector<Line> lines = to_lines(query.planes);
  Vec2 result;
  if (solve_2d(lines, query.speed_cap, query.v_pref, false, result) < lines.size()) {
    return {fallback_safest(query), false};
  }
  return {into_disc(result, query.speed_cap), true};
}

Vec2 fallback_safest(const VelocityQuery &query) {
  const std::vector<Line> lines = to_lines(query.planes);
  return into_disc(solve_minimax(lines, query.speed_cap), query.speed_cap);
}

Vec2 avoid_orca(const AvoidanceRequest &req, Diagnostics *diag) {
  const SwarmParams &p = req.params;
  const double d_s = p.safety_distance() * (1.0 + kRadiusMargin);

  std::vector<HalfPlane> planes;
  planes.reserve(req.neighbors.size());
  for (const Neighbor &nb : req.neighbors) {
    planes.push_back(orca_halfplane(req.pos, req.vel, nb.pos, nb.vel, d_s, p.c_r, req.dt,
                                    req.self_index));
  }

  const VelocityQuery query{req.vel + req.dt * req.u_des, planes, p.v0};
  const LpResult lp = solve_velocity_lp(query);
  if (!lp.feasible && diag) ++diag->lp_fallbacks;
  return (lp.velocity - req.vel) / req.dt;
}

}  // namespace ringswarm
