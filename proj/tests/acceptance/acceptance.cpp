// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any selected criterion fails.
//
//   acceptance                    run every criterion
//   acceptance --criterion N      run criterion N only
//   acceptance --workers K        worker threads for the sweep criteria
//   acceptance --work-dir DIR     keep sweep checkpoints in DIR and resume

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "random_cases.hpp"
#include "ringswarm/cbc.hpp"
#include "ringswarm/format.hpp"
#include "ringswarm/orca.hpp"
#include "ringswarm/sim.hpp"
#include "ringswarm/sweep.hpp"

using namespace ringswarm;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  fs::path work_dir;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) { return format_double(v); }

// 1. Ring baseline with point agents.
Outcome ring_baseline(const Options &) {
  int good = 0;
  double worst = 1.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SimConfig c;
    c.strategy = Strategy::none;
    c.detect_collisions = false;
    c.seed = seed;
    c.t_total = 3500.0;
    c.t_measure = 500.0;
    const double lambda = run(c).lambda;
    worst = std::min(worst, lambda);
    if (lambda >= 0.9) ++good;
  }
  return {good >= 45, std::to_string(good) + "/50 seeds with lambda >= 0.9 (min " + fmt(worst) + ")"};
}

// 2. Time step and safety distance.
Outcome constants(const Options &) {
  SimConfig c;
  c.t_total = 1.5;
  c.t_measure = 0.0;
  const MetricsSeries m = run(c);
  SwarmParams p;
  bool ds_ok = p.safety_distance() == 2.1 * 0.15;
  for (double r : {0.0, 0.02, 0.08, 0.2, 0.25}) {
    p.r = r;
    ds_ok = ds_ok && p.safety_distance() == 2.1 * r;
  }
  const bool dt_ok = m.dt == 0.015 && compute_dt(0.15, 0.12) == 0.015 &&
                     compute_dt(0.002, 0.12) == 0.002 / (2 * 0.12) && m.steps == 100;
  return {dt_ok && ds_ok, "dt=" + fmt(m.dt) + " D_s(r=0.15)=" + fmt(SwarmParams{}.safety_distance())};
}

// 3. Respawn geometry, through a full simulation step.
Outcome respawn(const Options &) {
  const double r = 0.15;
  SimConfig c;
  c.params.n = 2;
  c.params.alpha = 0.0;
  c.t_total = 0.015;
  c.t_measure = 0.0;
  c.snapshot_times = {0.015};
  c.initial_state = SwarmState(2);
  c.initial_state->pos = {{1.0, 2.0}, {1.2, 2.1}};  // at rest, 0.224 apart
  std::vector<TrajectoryRecord> traj;
  const MetricsSeries m = run(c, &traj);

  const Vec2 corner{1.0, 2.0};
  const Vec2 want0 = corner - 4.0 * Vec2{r, r};
  const Vec2 want1 = corner - 8.0 * Vec2{r, r};
  const bool pass = m.collisions == 1 && traj.size() == 2 && traj[0].pos == want0 &&
                    traj[1].pos == want1 && traj[0].vel == Vec2{} && traj[1].vel == Vec2{};
  std::ostringstream d;
  d << "collisions=" << m.collisions;
  if (traj.size() == 2) {
    d << " p0=(" << fmt(traj[0].pos.x) << "," << fmt(traj[0].pos.y) << ") p1=(" << fmt(traj[1].pos.x)
      << "," << fmt(traj[1].pos.y) << ")";
  }
  return {pass, d.str()};
}

SwarmState pair_state(Vec2 p0, Vec2 v0, Vec2 p1, Vec2 v1) {
  SwarmState s(2);
  s.pos = {p0, p1};
  s.vel = {v0, v1};
  return s;
}

// 4. CBC head-on pair.
Outcome cbc_pair(const Options &) {
  bool pass = true;
  std::ostringstream d;
  for (double c_r : {0.01, 1.0, 100.0}) {
    SimConfig c;
    c.strategy = Strategy::cbc;
    c.params.n = 2;
    c.params.c_r = c_r;
    c.params.l_r = cbc_min_sensing_radius(c_r, c.params.a_max, c.params.v_max(), c.params.safety_distance());
    c.t_total = 1000.0;
    c.t_measure = 100.0;
    c.initial_state = pair_state({-3, 0}, {0.12, 0}, {3, 0}, {-0.12, 0});
    const MetricsSeries m = run(c);
    const bool ok = m.min_pair_distance > c.params.safety_distance() && m.collisions == 0;
    pass = pass && ok;
    d << "c_r=" << fmt(c_r) << ": l_r=" << fmt(c.params.l_r) << " min_dist=" << fmt(m.min_pair_distance)
      << (ok ? "" : " (violation)") << "; ";
  }
  d << "D_s=0.315";
  return {pass, d.str()};
}

// 5. ORCA head-on and crossing pairs.
Outcome orca_pair(const Options &) {
  bool pass = true;
  std::ostringstream d;
  const std::pair<const char *, SwarmState> scenarios[] = {
      {"head-on", pair_state({-3, 0}, {0.12, 0}, {3, 0}, {-0.12, 0})},
      {"crossing", pair_state({-3, 0}, {0.12, 0}, {0, -3}, {0, 0.12})}};
  for (const auto &[name, init] : scenarios) {
    for (double c_r : {0.5, 2.0, 10.0}) {
      SimConfig c;
      c.strategy = Strategy::orca;
      c.params.n = 2;
      c.params.c_r = c_r;
      c.params.a_max = 1e6;
      c.t_total = 1000.0;
      c.t_measure = 100.0;
      c.initial_state = init;
      const MetricsSeries m = run(c);
      const bool ok = m.min_pair_distance > c.params.safety_distance() && m.collisions == 0 &&
                      m.diagnostics.clip_saturations == 0;
      pass = pass && ok;
      d << name << " c_r=" << fmt(c_r) << ": " << fmt(m.min_pair_distance) << (ok ? "" : " (violation)")
        << "; ";
    }
  }
  d << "D_s=0.315";
  return {pass, d.str()};
}

// 6. Solvers against brute-force lattice search.
Outcome solver_oracles(const Options &) {
  testing_support::Gen g(20240601);
  double qp_err = 0.0;
  int qp_bad = 0;
  for (int k = 0; k < 1000; ++k) {
    const QPProblem qp = testing_support::random_feasible_qp(g, 6, 0.6);
    const auto got = solve_qp(qp);
    const auto ref = testing_support::qp_grid_oracle(qp);
    if (!got || !ref) {
      ++qp_bad;
      continue;
    }
    const double err = norm(*got - *ref);
    qp_err = std::max(qp_err, err);
    if (err > 2e-3) ++qp_bad;
  }

  const double radius = 0.12;
  double lp_err = 0.0, mm_err = 0.0;
  int lp_bad = 0, n_feasible = 0;
  for (int k = 0; k < 1000; ++k) {
    std::vector<HalfPlane> planes;
    const int m = g.integer(1, 6);
    for (int j = 0; j < m; ++j) planes.push_back(testing_support::random_plane(g, radius));
    const Vec2 v_pref = g.in_disc(0.2);
    const LpResult got = solve_velocity_lp({v_pref, planes, radius});
    const auto worst = testing_support::minimax_oracle(planes, radius);
    if (norm(got.velocity) > radius * (1 + 1e-12)) {
      ++lp_bad;
      continue;
    }
    if (got.feasible) {
      ++n_feasible;
      if (testing_support::max_violation(planes, got.velocity) > 1e-12) {
        ++lp_bad;
        continue;
      }
      const auto best = testing_support::closest_feasible_oracle(planes, radius, v_pref);
      if (best.value == testing_support::kInf) {
        // Feasible set thinner than the lattice; the oracle's minimax must agree.
        if (worst.value > 2e-3) ++lp_bad;
        continue;
      }
      const double err = norm(got.velocity - best.v);
      lp_err = std::max(lp_err, err);
      if (err > 2e-3) ++lp_bad;
    } else {
      // The minimax point is not unique; compare the attained value.
      const Vec2 fb = fallback_safest({v_pref, planes, radius});
      const double mine = testing_support::max_violation(planes, fb);
      const double err = std::abs(mine - worst.value);
      mm_err = std::max(mm_err, err);
      if (err > 2e-3 || worst.value < -2e-3 || !(fb == got.velocity)) ++lp_bad;
    }
  }
  std::ostringstream d;
  d << "qp: " << qp_bad << " bad, max err " << fmt(qp_err) << "; lp: " << lp_bad << " bad of 1000 ("
    << n_feasible << " feasible), max err " << fmt(lp_err) << ", minimax value err " << fmt(mm_err);
  return {qp_bad == 0 && lp_bad == 0, d.str()};
}

// Direct-from-definition fatness and tangentness.
std::pair<double, double> metric_reference(const std::vector<Vec2> &pos, const std::vector<Vec2> &vel) {
  const std::size_t n = pos.size();
  double cx = 0.0, cy = 0.0;
  for (const Vec2 &p : pos) {
    cx += p.x;
    cy += p.y;
  }
  cx /= static_cast<double>(n);
  cy /= static_cast<double>(n);
  std::vector<double> dist(n);
  double tau = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = pos[i].x - cx, dy = pos[i].y - cy;
    dist[i] = std::sqrt(dx * dx + dy * dy);
    const double speed = std::sqrt(vel[i].x * vel[i].x + vel[i].y * vel[i].y);
    tau += (dist[i] == 0.0 || speed == 0.0) ? 1.0 : std::abs(dx * vel[i].x + dy * vel[i].y) / (dist[i] * speed);
  }
  const double r_min = *std::min_element(dist.begin(), dist.end());
  const double r_max = *std::max_element(dist.begin(), dist.end());
  const double phi = r_min == 0.0 ? 1.0 : 1.0 - (r_min / r_max) * (r_min / r_max);
  return {phi, tau / static_cast<double>(n)};
}

// 7. Metric oracle.
Outcome metric_oracle(const Options &) {
  testing_support::Gen g(7);
  double err = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int n = g.integer(2, 60);
    std::vector<Vec2> pos, vel;
    for (int i = 0; i < n; ++i) {
      pos.push_back(g.vec(-10, 10));
      vel.push_back(g.vec(-0.3, 0.3));
    }
    if (k % 10 == 1) vel[0] = {};
    if (k % 10 == 2) {
      // Interleaved +p, -p pairs and one agent at the origin: the centroid
      // is exactly the origin.
      if (pos.size() % 2 == 0) {
        pos.pop_back();
        vel.pop_back();
      }
      for (std::size_t i = 0; i + 2 < pos.size(); i += 2) pos[i + 1] = -1.0 * pos[i];
      pos.back() = {};
    }
    const auto [phi, tau] = metric_reference(pos, vel);
    const Order o = metrics_step(pos, vel);
    const double lam_ref = 1.0 - std::max(phi, tau);
    err = std::max({err, std::abs(o.fatness - phi), std::abs(o.tangentness - tau),
                    std::abs(ring_quality(o.fatness, o.tangentness) - lam_ref)});
  }
  return {err <= 1e-12, "max abs difference " + fmt(err) + " over 100 states"};
}

// 8. Collision regime without effective avoidance.
Outcome collision_regime(const Options &) {
  SimConfig c;
  c.strategy = Strategy::potential;
  c.params.c_r = 0.0;
  c.t_total = 2000.0;
  c.t_measure = 100.0;
  const MetricsSeries m = run(c);
  return {m.collisions > 0, "collisions=" + std::to_string(m.collisions) + " in 2000 s"};
}

double spearman(const std::vector<double> &x, const std::vector<double> &y) {
  auto ranks = [](const std::vector<double> &v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * static_cast<double>(i + j) + 1.0;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// 9. Ring quality degrades with agent size.
Outcome size_trend(const Options &opt) {
  bool pass = true;
  std::ostringstream d;
  for (Strategy s : {Strategy::orca, Strategy::cbc}) {
    SweepSpec spec;
    spec.base.strategy = s;
    spec.base.t_total = 3000.0;
    spec.base.t_measure = 500.0;
    spec.r = {0.02, 0.08, 0.15, 0.2, 0.25};
    spec.l_r = {0.5, 1.0};
    const CrRange range = default_cr_range(s);
    spec.c_r = make_axis(range.lo, range.hi, 10, range.scale);
    spec.n = {20};
    spec.seeds = {0, 1, 2, 3, 4};

    SweepOptions so;
    so.workers = opt.workers;
    if (!opt.work_dir.empty()) {
      fs::create_directories(opt.work_dir);
      so.checkpoint = opt.work_dir / ("size_trend_" + std::string(to_string(s)) + ".jsonl");
      so.resume = true;
    }
    const SweepResult res = run_sweep(spec, so);
    const auto by_r = average_over_lr(flatten_best_cr(aggregate_cells(res.records)));
    std::vector<double> rs, lams;
    for (const auto &row : by_r) {
      rs.push_back(row.r);
      lams.push_back(row.mean_lambda.value_or(0.0));
    }
    const double rho = spearman(rs, lams);
    pass = pass && rho <= -0.8;
    d << to_string(s) << ": rho=" << fmt(rho) << " lambda(r)=[";
    for (std::size_t k = 0; k < lams.size(); ++k) d << (k ? " " : "") << fmt(std::round(lams[k] * 1e4) / 1e4);
    d << "]; ";
  }
  return {pass, d.str()};
}

// 10. Determinism of single runs and sweeps.
Outcome determinism(const Options &) {
  bool pass = true;
  for (auto [s, c_r] : {std::pair{Strategy::gyro, 0.4}, {Strategy::cbc, 1.0}, {Strategy::orca, 2.0}}) {
    SimConfig c;
    c.strategy = s;
    c.params.c_r = c_r;
    c.t_total = 300.0;
    c.t_measure = 100.0;
    c.seed = 17;
    c.snapshot_times = {150.0, 300.0};
    auto render = [&] {
      std::vector<TrajectoryRecord> traj;
      const MetricsSeries m = run(c, &traj);
      std::ostringstream out;
      write_summary_json(out, c, m);
      write_metrics_csv(out, m);
      write_trajectory_csv(out, traj);
      return out.str();
    };
    pass = pass && render() == render();
  }

  const SweepSpec spec = parse_sweep_spec(R"({
    "base": {"strategy": "cbc", "n": 8, "t_total": 60, "t_measure": 20},
    "axes": {"r": [0.05, 0.15], "l_r": [1.0], "c_r": {"count": 4}},
    "seeds": {"base": 0, "count": 2}})");
  SweepOptions one, eight;
  eight.workers = 8;
  std::ostringstream a, b;
  write_records_csv(a, run_sweep(spec, one).records);
  write_records_csv(b, run_sweep(spec, eight).records);
  const bool sweep_ok = a.str() == b.str();
  return {pass && sweep_ok, std::string("runs ") + (pass ? "identical" : "differ") + ", sweep 1 vs 8 workers " +
                                (sweep_ok ? "identical" : "differ")};
}

// 11. Invariant suite.
Outcome invariants(const Options &) {
  std::vector<std::string> failures;
  auto expect = [&](bool ok, const std::string &what) {
    if (!ok) failures.push_back(what);
  };

  // Input cap and metric ranges along simulated runs.
  for (auto [s, c_r] : {std::pair{Strategy::none, 0.0}, {Strategy::potential, 1.0}, {Strategy::gyro, 1.0},
                        {Strategy::cbc, 1.0}, {Strategy::orca, 2.0}}) {
    SimConfig c;
    c.strategy = s;
    c.params.c_r = c_r;
    c.t_total = 400.0;
    c.t_measure = 400.0;
    c.record_stride = 1;
    const MetricsSeries m = run(c);
    const std::string name(to_string(s));
    expect(m.max_input_norm <= c.params.a_max * (1 + 1e-12), name + ": |u| above a_max");
    for (const auto &smp : m.samples) {
      const double lam = ring_quality(smp.fatness, smp.tangentness);
      if (smp.fatness < 0 || smp.fatness > 1 || smp.tangentness < 0 || smp.tangentness > 1 || lam < 0 ||
          lam > 1) {
        expect(false, name + ": metric out of [0,1]");
        break;
      }
    }
  }

  testing_support::Gen g(11);

  // Gyro correction is orthogonal to the velocity.
  for (int k = 0; k < 1000; ++k) {
    std::vector<Neighbor> nbs;
    for (int j = 0; j < g.integer(1, 5); ++j)
      nbs.push_back({static_cast<std::size_t>(j + 1), g.vec(-1, 1), g.vec(-0.2, 0.2)});
    AvoidanceRequest req;
    req.params.c_r = g.uniform(0, 1);
    req.u_des = g.vec(-0.5, 0.5);
    req.pos = g.vec(-1, 1);
    req.vel = g.vec(-0.3, 0.3);
    req.neighbors = nbs;
    const Vec2 corr = avoid_gyro(req) - req.u_des;
    if (std::abs(dot(corr, req.vel)) > 1e-12 * std::max(1.0, norm(corr) * norm(req.vel))) {
      expect(false, "gyro correction not orthogonal to velocity");
      break;
    }
  }

  // Potential with c_r = 0 is exactly no avoidance.
  {
    SimConfig a;
    a.t_total = 500.0;
    a.t_measure = 200.0;
    SimConfig b = a;
    b.strategy = Strategy::potential;
    b.params.c_r = 0.0;
    std::ostringstream sa, sb;
    const MetricsSeries ma = run(a), mb = run(b);
    write_metrics_csv(sa, ma);
    write_metrics_csv(sb, mb);
    expect(sa.str() == sb.str() && ma.collisions == mb.collisions, "potential(c_r=0) differs from none");
  }

  // Neighbor relation is symmetric.
  for (int k = 0; k < 200; ++k) {
    const int n = g.integer(2, 40);
    std::vector<Vec2> pos(n), vel(n);
    for (auto &p : pos) p = g.vec(-3, 3);
    const double l_r = g.uniform(0, 2);
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i)
      for (const auto &nb : neighbor_set(static_cast<std::size_t>(i), pos, vel, l_r)) adj[i][nb.index] = true;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (adj[i][j] != adj[j][i]) expect(false, "neighbor relation not symmetric");
  }

  // Barrier constraint against finite differences along random trajectories.
  {
    const double a_max = 0.6, d_s = 0.315, tau = 1e-6;
    double worst_rel = 0.0;
    int trajectories = 0;
    while (trajectories < 100) {
      const Vec2 pi = g.vec(-3, 3), pj = g.vec(-3, 3);
      if (norm(pi - pj) < d_s + 0.3) continue;
      const Vec2 vi = g.vec(-0.24, 0.24), vj = g.vec(-0.24, 0.24), ui = g.vec(-0.6, 0.6);
      const double c_r = std::pow(10.0, g.uniform(-3, 3));
      // Ten points along the trajectory, while it stays clear of D_s.
      for (int s = 0; s < 10; ++s) {
        const double t = 0.1 * s;
        const Vec2 p_i = pi + t * vi + (0.5 * t * t) * ui, v_i = vi + t * ui, p_j = pj + t * vj;
        if (norm(p_i - p_j) < d_s + 0.05) break;
        const BarrierPair bp = barrier_terms(p_i, v_i, p_j, vj, a_max, d_s);
        if (std::abs(bp.h) < 1e-3) continue;
        const LinearConstraint lc = cbc_constraint(bp, c_r, a_max, d_s);
        const double bdot = -(-dot(lc.a, ui) + lc.b - bp.h * bp.h * bp.h / c_r) / (bp.h * bp.h);
        const double bdot_fd = -testing_support::barrier_rate_fd(p_i, v_i, p_j, vj, ui, a_max, d_s, tau) /
                               (bp.h * bp.h);
        worst_rel = std::max(worst_rel, std::abs(bdot - bdot_fd) / std::max(std::abs(bdot_fd), 1e-6));
      }
      ++trajectories;
    }
    expect(worst_rel < 1e-4, "barrier rate mismatch " + fmt(worst_rel));
  }

  std::string detail = failures.empty() ? "all invariants hold" : failures.front();
  if (failures.size() > 1) detail += " (+" + std::to_string(failures.size() - 1) + " more)";
  return {failures.empty(), detail};
}

struct Criterion {
  int id;
  const char *name;
  Outcome (*fn)(const Options &);
};

const Criterion kCriteria[] = {
    {1, "ring baseline", ring_baseline},    {2, "constants", constants},
    {3, "respawn geometry", respawn},       {4, "cbc pairwise safety", cbc_pair},
    {5, "orca pairwise safety", orca_pair}, {6, "solver oracles", solver_oracles},
    {7, "metric oracle", metric_oracle},    {8, "collision regime", collision_regime},
    {9, "size degradation", size_trend},    {10, "determinism", determinism},
    {11, "invariants", invariants},
};

}  // namespace

int main(int argc, char **argv) {
  Options opt;
  int only = 0;
  for (int k = 1; k < argc; ++k) {
    const std::string arg = argv[k];
    if (k + 1 < argc && arg == "--criterion") {
      only = std::atoi(argv[++k]);
    } else if (k + 1 < argc && arg == "--workers") {
      opt.workers = static_cast<std::size_t>(std::max(1, std::atoi(argv[++k])));
    } else if (k + 1 < argc && arg == "--work-dir") {
      opt.work_dir = argv[++k];
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N] [--workers K] [--work-dir DIR]\n", argv[0]);
      return 2;
    }
  }
  if (only < 0 || only > 11) {
    std::fprintf(stderr, "criterion must be 1..11\n");
    return 2;
  }

  bool all_pass = true;
  for (const auto &c : kCriteria) {
    if (only != 0 && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.fn(opt);
    } catch (const std::exception &e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", out.pass ? "PASS" : "FAIL", c.id, c.name,
                out.detail.c_str(), secs);
    std::fflush(stdout);
    all_pass = all_pass && out.pass;
  }
  return all_pass ? 0 : 1;
}
