#include "ringswarm/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include <json.hpp>

#include "ringswarm/format.hpp"
#include "ringswarm/rng.hpp"

namespace ringswarm {

void SimConfig::validate() const {
  params.validate();
  auto fail = [](const std::string &msg) { throw std::invalid_argument("invalid config: " + msg); };
  if (!(std::isfinite(t_total) && t_total > 0.0)) fail("t_total must be > 0");
  if (!(std::isfinite(t_measure) && t_measure >= 0.0 && t_measure <= t_total))
    fail("t_measure must lie in [0, t_total]");
  if (!(std::isfinite(dt_cap) && dt_cap > 0.0)) fail("dt_cap must be > 0");
  if (record_stride == 0) fail("record_stride must be >= 1");
  if ((strategy == Strategy::cbc || strategy == Strategy::orca) && !(params.c_r > 0.0))
    fail("c_r must be > 0 for cbc and orca");
  for (double t : snapshot_times) {
    if (!std::isfinite(t) || t < 0.0) fail("snapshot times must be finite and >= 0");
  }
  if (initial_state) {
    const auto &s = *initial_state;
    if (s.pos.size() != params.n || s.vel.size() != params.n || s.respawns.size() != params.n)
      fail("initial_state size does not match n");
    for (std::size_t i = 0; i < params.n; ++i) {
      if (!is_finite(s.pos[i]) || !is_finite(s.vel[i])) fail("initial_state is not finite");
    }
  }
}

double default_t_total(Strategy s) {
  return s == Strategy::potential || s == Strategy::gyro ? 32000.0 : 12000.0;
}

double compute_dt(double r, double v0, double dt_cap) {
  if (r <= 0.0) return dt_cap;
  return std::min(r / (2.0 * v0), dt_cap);
}

double spiral_spacing(const SwarmParams &params) {
  const double s = std::max(5.0 * params.r, params.l_r);
  return s > 0.0 ? s : 0.01;
}

SwarmState init_spiral(const SwarmParams &params, std::uint64_t seed) {
  const std::size_t n = params.n;
  const double s = spiral_spacing(params);
  SwarmState state(n);

  // rho = b theta puts successive turns s apart. Walk the curve in small arc
  // increments and accept a point once it clears every placed agent by s.
  const double b = s / (2.0 * std::numbers::pi);
  const double arc_step = s / 64.0;
  double theta = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    for (;;) {
      theta += arc_step / (b * std::sqrt(1.0 + theta * theta));
      const Vec2 cand{b * theta * std::cos(theta), b * theta * std::sin(theta)};
      bool clear = true;
      for (std::size_t j = 0; j < i && clear; ++j) clear = norm(cand - state.pos[j]) >= s;
      if (clear) {
        state.pos[i] = cand;
        break;
      }
    }
  }

  const CounterRng rng(seed, /*stream=*/0x4845414Eull);
  for (std::size_t i = 0; i < n; ++i) {
    const double heading = 2.0 * std::numbers::pi * rng.uniform(i);
    state.vel[i] = {params.v0 * std::cos(heading), params.v0 * std::sin(heading)};
  }
  return state;
}

std::vector<CollisionEvent> detect_and_respawn(SwarmState &state, double r, double t) {
  std::vector<CollisionEvent> events;
  if (r <= 0.0) return events;

  const std::size_t n = state.size();
  const double limit = 4.0 * r * r;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (norm_sq(state.pos[i] - state.pos[j]) < limit) pairs.emplace_back(i, j);
    }
  }
  if (pairs.empty()) return events;

  Vec2 corner{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  for (const Vec2 &p : state.pos) {
    corner.x = std::min(corner.x, p.x);
    corner.y = std::min(corner.y, p.y);
  }

  std::vector<bool> moved(n, false);
  std::size_t k = 0;
  for (const auto &[i, j] : pairs) {
    if (moved[i] || moved[j]) continue;  // re-checked next step
    const double off = static_cast<double>(8 * k);
    state.pos[i] = corner - (4.0 + off) * Vec2{r, r};
    state.pos[j] = corner - (8.0 + off) * Vec2{r, r};
    state.vel[i] = {};
    state.vel[j] = {};
    ++state.respawns[i];
    ++state.respawns[j];
    moved[i] = moved[j] = true;
    events.push_back({t, i, j});
    ++k;
  }
  return events;
}

Order metrics_step(std::span<const Vec2> pos, std::span<const Vec2> vel) {
  const std::size_t n = pos.size();
  Order out;
  if (n == 0) return out;

  Vec2 mu;
  for (const Vec2 &p : pos) mu += p;
  mu = mu / static_cast<double>(n);

  double r_min = std::numeric_limits<double>::infinity();
  double r_max = 0.0;
  double tau_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 radial = pos[i] - mu;
    const double dist = norm(radial);
    const double speed = norm(vel[i]);
    r_min = std::min(r_min, dist);
    r_max = std::max(r_max, dist);
    if (dist == 0.0 || speed == 0.0) {
      out.degenerate = true;
      tau_sum += 1.0;
    } else {
      tau_sum += std::abs(dot(radial / dist, vel[i] / speed));
    }
  }

  if (r_min == 0.0) {
    out.degenerate = true;
    out.fatness = 1.0;
  } else {
    out.fatness = std::clamp(1.0 - (r_min * r_min) / (r_max * r_max), 0.0, 1.0);
  }
  out.tangentness = std::clamp(tau_sum / static_cast<double>(n), 0.0, 1.0);
  return out;
}

double ring_quality(double mean_fatness, double mean_tangentness) {
  return std::clamp(1.0 - std::max(mean_fatness, mean_tangentness), 0.0, 1.0);
}

namespace {

double min_pair_distance(std::span<const Vec2> pos) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pos.size(); ++i) {
    for (std::size_t j = i + 1; j < pos.size(); ++j) best = std::min(best, norm_sq(pos[i] - pos[j]));
  }
  return std::sqrt(best);
}

}  // namespace

MetricsSeries run(const SimConfig &config, std::vector<TrajectoryRecord> *trajectory) {
  config.validate();
  const SwarmParams &p = config.params;
  const std::size_t n = p.n;

  MetricsSeries series;
  series.dt = compute_dt(p.r, p.v0, config.dt_cap);
  const double dt = series.dt;
  const auto total_steps = static_cast<std::uint64_t>(std::llround(config.t_total / dt));
  const auto window_steps = static_cast<std::uint64_t>(std::llround(config.t_measure / dt));
  const std::uint64_t first_sample = total_steps - std::min(window_steps, total_steps);
  series.steps = total_steps;

  SwarmState state = config.initial_state ? *config.initial_state : init_spiral(p, config.seed);
  DelayBuffer history(n, p.t_d, dt);

  std::vector<double> snaps = config.snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  std::size_t next_snap = 0;
  auto maybe_snapshot = [&](std::uint64_t step) {
    if (!trajectory) return;
    const double t = static_cast<double>(step) * dt;
    while (next_snap < snaps.size() && t + 0.5 * dt >= snaps[next_snap]) {
      for (std::size_t i = 0; i < n; ++i) trajectory->push_back({t, i, state.pos[i], state.vel[i]});
      ++next_snap;
    }
  };
  maybe_snapshot(0);

  series.min_pair_distance = min_pair_distance(state.pos);
  const double detect_r = config.detect_collisions ? p.r : 0.0;

  std::vector<Vec2> input(n);
  NeighborView neighbors;
  double phi_sum = 0.0;
  double tau_sum = 0.0;

  for (std::uint64_t step = 1; step <= total_steps; ++step) {
    const std::span<const Vec2> delayed = history.record_and_query(state.pos);

    // All inputs come from the same pre-step state.
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 u_des = desired_control(i, state.pos, state.vel, delayed, p);
      collect_neighbors(i, state.pos, state.vel, p.l_r, neighbors);
      const AvoidanceRequest req{u_des, state.pos[i], state.vel[i], i, neighbors, p, dt};
      const Vec2 wanted = avoid(config.strategy, req, &series.diagnostics);
      if (!(norm(wanted) < p.a_max)) ++series.diagnostics.clip_saturations;
      input[i] = clip(wanted, p.a_max);
      series.max_input_norm = std::max(series.max_input_norm, norm(input[i]));
    }

    for (std::size_t i = 0; i < n; ++i) {
      state.vel[i] += dt * input[i];
      state.pos[i] += dt * state.vel[i];
      if (!is_finite(state.pos[i]) || !is_finite(state.vel[i])) {
        throw SimulationAborted("non-finite state for agent " + std::to_string(i) + " at t=" +
                                format_double(static_cast<double>(step) * dt));
      }
    }

    const double t = static_cast<double>(step) * dt;
    if (n > 1) series.min_pair_distance = std::min(series.min_pair_distance, min_pair_distance(state.pos));
    auto events = detect_and_respawn(state, detect_r, t);
    series.collisions += events.size();
    series.events.insert(series.events.end(), events.begin(), events.end());

    if (step >= first_sample && (step - first_sample) % config.record_stride == 0) {
      const Order o = metrics_step(state.pos, state.vel);
      if (o.degenerate) ++series.diagnostics.degenerate_metrics;
      series.samples.push_back({t, o.fatness, o.tangentness});
      phi_sum += o.fatness;
      tau_sum += o.tangentness;
    }
    maybe_snapshot(step);
  }

  if (!series.samples.empty()) {
    const auto count = static_cast<double>(series.samples.size());
    series.mean_fatness = phi_sum / count;
    series.mean_tangentness = tau_sum / count;
  } else {
    const Order o = metrics_step(state.pos, state.vel);
    series.mean_fatness = o.fatness;
    series.mean_tangentness = o.tangentness;
  }
  series.lambda = ring_quality(series.mean_fatness, series.mean_tangentness);
  return series;
}

void write_trajectory_csv(std::ostream &out, std::span<const TrajectoryRecord> records) {
  out << "t,index,x,y,vx,vy\n";
  for (const auto &r : records) {
    out << format_double(r.t) << ',' << r.index << ',' << format_double(r.pos.x) << ','
        << format_double(r.pos.y) << ',' << format_double(r.vel.x) << ','
        << format_double(r.vel.y) << '\n';
  }
}

void write_metrics_csv(std::ostream &out, const MetricsSeries &series) {
  out << "t,fatness,tangentness\n";
  for (const auto &s : series.samples) {
    out << format_double(s.t) << ',' << format_double(s.fatness) << ','
        << format_double(s.tangentness) << '\n';
  }
}

void write_summary_json(std::ostream &out, const SimConfig &config, const MetricsSeries &series) {
  const SwarmParams &p = config.params;
  nlohmann::ordered_json j;
  j["strategy"] = std::string(to_string(config.strategy));
  j["seed"] = config.seed;
  j["params"] = {{"n", p.n},       {"alpha", p.alpha}, {"beta", p.beta}, {"v0", p.v0},
                 {"t_d", p.t_d},   {"r", p.r},         {"l_r", p.l_r},   {"c_r", p.c_r},
                 {"a_max", p.a_max}};
  j["t_total"] = config.t_total;
  j["t_measure"] = config.t_measure;
  j["dt"] = series.dt;
  j["steps"] = series.steps;
  j["lambda"] = series.lambda;
  j["mean_fatness"] = series.mean_fatness;
  j["mean_tangentness"] = series.mean_tangentness;
  j["collisions"] = series.collisions;
  j["min_pair_distance"] = series.min_pair_distance;
  j["max_input_norm"] = series.max_input_norm;
  const Diagnostics &d = series.diagnostics;
  j["diagnostics"] = {{"qp_infeasible", d.qp_infeasible},
                      {"brakes", d.brakes},
                      {"barrier_breaches", d.barrier_breaches},
                      {"b_clamps", d.b_clamps},
                      {"lp_fallbacks", d.lp_fallbacks},
                      {"clip_saturations", d.clip_saturations},
                      {"degenerate_metrics", d.degenerate_metrics}};
  out << j.dump(2) << '\n';
}

}  // namespace ringswarm
