#include "ringswarm/swarm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ringswarm {

namespace {

void require(bool ok, const char *what) {
  if (!ok) throw std::invalid_argument(std::string("invalid swarm parameter: ") + what);
}

}  // namespace

void SwarmParams::validate() const {
  require(n >= 1, "n must be >= 1");
  require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be finite and >= 0");
  require(std::isfinite(beta) && beta >= 0.0, "beta must be finite and >= 0");
  require(std::isfinite(v0) && v0 > 0.0, "v0 must be finite and > 0");
  require(std::isfinite(t_d) && t_d >= 0.0, "t_d must be finite and >= 0");
  require(std::isfinite(r) && r >= 0.0, "r must be finite and >= 0");
  require(std::isfinite(l_r) && l_r >= 0.0, "l_r must be finite and >= 0");
  require(std::isfinite(c_r) && c_r >= 0.0, "c_r must be finite and >= 0");
  require(std::isfinite(a_max) && a_max > 0.0, "a_max must be finite and > 0");
}

DelayBuffer::DelayBuffer(std::size_t n_agents, double t_d, double dt) : n_(n_agents) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("DelayBuffer: dt must be > 0");
  if (!(t_d >= 0.0) || !std::isfinite(t_d)) throw std::invalid_argument("DelayBuffer: t_d must be >= 0");
  const double ratio = t_d / dt;
  capacity_ = static_cast<std::size_t>(std::ceil(ratio)) + 1;
  lag_ = static_cast<std::size_t>(std::llround(ratio));
  data_.resize(capacity_ * n_);
}

std::span<const Vec2> DelayBuffer::slot(std::size_t k) const {
  return {data_.data() + k * n_, n_};
}

std::span<const Vec2> DelayBuffer::record_and_query(std::span<const Vec2> current) {
  if (current.size() != n_) throw std::invalid_argument("DelayBuffer: snapshot size mismatch");
  std::copy(current.begin(), current.end(), data_.begin() + static_cast<std::ptrdiff_t>(head_ * n_));
  const std::size_t newest = head_;
  head_ = (head_ + 1) % capacity_;
  count_ = std::min(count_ + 1, capacity_);

  // Clamp to the oldest snapshot during warm-up.
  const std::size_t back = std::min(lag_, count_ - 1);
  return slot((newest + capacity_ - back) % capacity_);
}

void collect_neighbors(std::size_t self, std::span<const Vec2> pos,
                       std::span<const Vec2> vel, double l_r, NeighborView &out) {
  out.clear();
  const Vec2 p = pos[self];
  const double l2 = l_r * l_r;
  // Squared distances decide everything except a thin shell around l_r,
  // where the exact hypot comparison is used.
  const double inner = l2 * (1.0 - 1e-12);
  const double outer = l2 * (1.0 + 1e-12);
  for (std::size_t j = 0; j < pos.size(); ++j) {
    if (j == self) continue;
    const Vec2 d = p - pos[j];
    const double d2 = norm_sq(d);
    if (d2 > outer) continue;
    if (d2 >= inner && !(norm(d) <= l_r)) continue;
    out.push_back({j, pos[j], vel[j]});
  }
}

NeighborView neighbor_set(std::size_t self, std::span<const Vec2> pos,
                          std::span<const Vec2> vel, double l_r) {
  NeighborView out;
  collect_neighbors(self, pos, vel, l_r, out);
  return out;
}

Vec2 desired_control(std::size_t self, std::span<const Vec2> pos,
                     std::span<const Vec2> vel, std::span<const Vec2> delayed_pos,
                     const SwarmParams &params) {
  const Vec2 v = vel[self];
  const Vec2 speed = params.beta * (params.v0 * params.v0 - norm_sq(v)) * v;

  const std::size_t n = pos.size();
  if (n < 2) return speed;

  Vec2 pull;
  const Vec2 here = pos[self];
  for (std::size_t j = 0; j < n; ++j) {
    if (j == self) continue;
    pull += delayed_pos[j] - here;
  }
  return speed + (params.alpha / static_cast<double>(n - 1)) * pull;
}

}  // namespace ringswarm
