#include "ringswarm/cbc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ringswarm {

BarrierPair barrier_terms(Vec2 pos_i, Vec2 vel_i, Vec2 pos_j, Vec2 vel_j,
                          double a_max, double d_s) {
  BarrierPair p;
  p.dp = pos_i - pos_j;
  p.dv = vel_i - vel_j;
  const double dist = norm(p.dp);
  p.breached = dist <= d_s;
  if (dist < d_s || dist == 0.0) {
    p.h = std::numeric_limits<double>::quiet_NaN();
    p.B = std::numeric_limits<double>::quiet_NaN();
    return p;
  }
  p.h = dot(p.dp, p.dv) / dist + std::sqrt(4.0 * a_max * (dist - d_s));
  p.B = 1.0 / p.h;
  return p;
}

LinearConstraint cbc_constraint(const BarrierPair &pair, double c_r, double a_max, double d_s) {
  const double dist = norm(pair.dp);
  const double closing = dot(pair.dp, pair.dv);  // > 0 when separating
  const double root = std::sqrt(4.0 * a_max * (dist - d_s));

  LinearConstraint c;
  c.a = -(pair.dp / dist);

  double b = pair.h * pair.h * pair.h / c_r + norm_sq(pair.dv) / dist -
             closing * closing / (dist * dist * dist);
  if (closing != 0.0) b += 2.0 * a_max * (closing / dist) / root;

  if (!(std::abs(b) < kBarrierBoundClamp)) {
    // NaN only arises from 0/0 at the barrier with zero closing speed.
    b = std::isnan(b) ? kBarrierBoundClamp : std::copysign(kBarrierBoundClamp, b);
    c.clamped = true;
  }
  c.b = b;
  return c;
}

namespace {

struct UnitConstraint {
  Vec2 n;  // unit normal
  double b;
};

bool feasible(const std::vector<UnitConstraint> &cs, Vec2 u) {
  for (const auto &c : cs) {
    if (dot(c.n, u) > c.b + 1e-9 * std::max(1.0, std::abs(c.b))) return false;
  }
  return true;
}

}  // namespace

std::optional<Vec2> solve_qp(const QPProblem &problem) {
  std::vector<UnitConstraint> cs;
  cs.reserve(problem.constraints.size() + 4);
  for (const auto &c : problem.constraints) {
    const double len = norm(c.a);
    if (len <= kZeroTol) {
      if (c.b < 0.0) return std::nullopt;
      continue;
    }
    cs.push_back({c.a / len, c.b / len});
  }
  const double box = problem.box;
  cs.push_back({{1.0, 0.0}, box});
  cs.push_back({{-1.0, 0.0}, box});
  cs.push_back({{0.0, 1.0}, box});
  cs.push_back({{0.0, -1.0}, box});

  const Vec2 t = problem.target;
  if (feasible(cs, t)) return t;

  std::optional<Vec2> best;
  double best_cost = std::numeric_limits<double>::infinity();
  auto consider = [&](Vec2 u) {
    const double cost = norm_sq(u - t);
    if (cost >= best_cost) return;
    if (!feasible(cs, u)) return;
    best_cost = cost;
    best = u;
  };

  // One active constraint: projection onto its boundary line.
  for (const auto &c : cs) {
    const double excess = dot(c.n, t) - c.b;
    if (excess > 0.0) consider(t - excess * c.n);
  }
  // Two active constraints: vertex of the polygon.
  for (std::size_t k = 0; k < cs.size(); ++k) {
    for (std::size_t l = k + 1; l < cs.size(); ++l) {
      const double det = crossz(cs[k].n, cs[l].n);
      if (std::abs(det) <= kZeroTol) continue;
      const Vec2 u{(cs[k].b * cs[l].n.y - cs[l].b * cs[k].n.y) / det,
                   (cs[k].n.x * cs[l].b - cs[l].n.x * cs[k].b) / det};
      consider(u);
    }
  }
  return best;
}

double cbc_min_sensing_radius(double c_r, double a_max, double v_max, double d_s) {
  const double s = std::cbrt(4.0 * c_r * a_max) + 2.0 * v_max;
  return d_s + s * s / (4.0 * a_max);
}

Vec2 avoid_cbc(const AvoidanceRequest &req, Diagnostics *diag) {
  const SwarmParams &p = req.params;
  const double d_s = p.safety_distance();

  QPProblem qp;
  qp.target = req.u_des;
  qp.box = p.a_max;
  qp.constraints.reserve(req.neighbors.size());
  for (const Neighbor &nb : req.neighbors) {
    const BarrierPair pair = barrier_terms(req.pos, req.vel, nb.pos, nb.vel, p.a_max, d_s);
    if (pair.breached) {
      if (diag) {
        ++diag->barrier_breaches;
        ++diag->brakes;
      }
      return -req.vel;
    }
    const LinearConstraint c = cbc_constraint(pair, p.c_r, p.a_max, d_s);
    if (c.clamped && diag) ++diag->b_clamps;
    qp.constraints.push_back(c);
  }

  if (auto u = solve_qp(qp)) return *u;
  if (diag) {
    ++diag->qp_infeasible;
    ++diag->brakes;
  }
  return -req.vel;
}

}  // namespace ringswarm
