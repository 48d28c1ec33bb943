#include "ringswarm/avoidance.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ringswarm/cbc.hpp"
#include "ringswarm/orca.hpp"

namespace ringswarm {

Strategy parse_strategy(std::string_view name) {
  if (name == "none") return Strategy::none;
  if (name == "potential") return Strategy::potential;
  if (name == "gyro") return Strategy::gyro;
  if (name == "cbc") return Strategy::cbc;
  if (name == "orca") return Strategy::orca;
  throw std::invalid_argument("unknown strategy '" + std::string(name) +
                              "' (expected none|potential|gyro|cbc|orca)");
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::none: return "none";
    case Strategy::potential: return "potential";
    case Strategy::gyro: return "gyro";
    case Strategy::cbc: return "cbc";
    case Strategy::orca: return "orca";
  }
  return "none";
}

Diagnostics &Diagnostics::operator+=(const Diagnostics &o) {
  qp_infeasible += o.qp_infeasible;
  brakes += o.brakes;
  barrier_breaches += o.barrier_breaches;
  b_clamps += o.b_clamps;
  lp_fallbacks += o.lp_fallbacks;
  clip_saturations += o.clip_saturations;
  degenerate_metrics += o.degenerate_metrics;
  return *this;
}

double repulsion_magnitude(double d, double c_r, double l_r) {
  return 2.0 * (c_r / l_r) * std::exp(-2.0 * d / l_r);
}

Vec2 avoid_none(const AvoidanceRequest &req) { return req.u_des; }

Vec2 avoid_potential(const AvoidanceRequest &req) {
  const double l_r = req.params.l_r;
  const double c_r = req.params.c_r;
  if (req.neighbors.empty() || l_r <= 0.0 || c_r == 0.0) return req.u_des;

  Vec2 push;
  for (const Neighbor &nb : req.neighbors) {
    const Vec2 away = req.pos - nb.pos;
    const double d = norm(away);
    const Vec2 dir = d > 0.0 ? away / d : parity_direction(req.self_index);
    push += repulsion_magnitude(d, c_r, l_r) * dir;
  }
  return req.u_des + push;
}

Vec2 avoid_gyro(const AvoidanceRequest &req) {
  const double l_r = req.params.l_r;
  if (req.neighbors.empty() || l_r <= 0.0) return req.u_des;
  const double speed = norm(req.vel);
  if (speed <= 0.0) return req.u_des;

  // Nearest neighbor; ties keep the lowest index.
  const Neighbor *nearest = nullptr;
  double best = std::numeric_limits<double>::infinity();
  for (const Neighbor &nb : req.neighbors) {
    const double d2 = norm_sq(req.pos - nb.pos);
    if (d2 < best) {
      best = d2;
      nearest = &nb;
    }
  }

  const Vec2 heading = req.vel / speed;
  const double side = sgnz(crossz(nearest->pos - req.pos, req.vel));
  const double mag = repulsion_magnitude(std::sqrt(best), req.params.c_r, l_r);
  return req.u_des + (side * mag) * rot90(heading);
}

Vec2 avoid(Strategy s, const AvoidanceRequest &req, Diagnostics *diag) {
  switch (s) {
    case Strategy::none: return avoid_none(req);
    case Strategy::potential: return avoid_potential(req);
    case Strategy::gyro: return avoid_gyro(req);
    case Strategy::cbc: return avoid_cbc(req, diag);
    case Strategy::orca: return avoid_orca(req, diag);
  }
  return req.u_des;
}

}  // namespace ringswarm
