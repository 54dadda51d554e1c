#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "fallingballs/events.hpp"
#include "fallingballs/masses.hpp"
#include "fallingballs/state.hpp"

namespace fallingballs {

// Free fall for duration dt: q_i += v_i dt - dt^2/2, v_i -= dt.
// Energy is an exact invariant of this map; the ordering check catches
// callers that overshoot an event.
inline PhaseState advance_free(const PhaseState& s, double dt,
                               const SimPolicy& policy = {}) {
  PhaseState out = s;
  const double half = 0.5 * dt * dt;
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.q[i] = s.q[i] + s.v[i] * dt - half;
    out.v[i] = s.v[i] - dt;
  }
  out.t = s.t + dt;
  if (!ordering_ok(out, policy.eps_q))
    fail(errc::ordering_violated, "free flight overshot an event");
  return out;
}

// Velocity jump of the elastic pair collision (i, i+1):
//   v_i^+     = gamma v_i^- + (1-gamma) v_{i+1}^-
//   v_{i+1}^+ = (1+gamma) v_i^- - gamma v_{i+1}^-
// Conserves pair momentum and pair kinetic energy; applying it twice is the
// identity.
inline std::pair<double, double> pair_collision_velocities(double gamma,
                                                           double vi,
                                                           double vj) {
  return {gamma * vi + (1.0 - gamma) * vj, (1.0 + gamma) * vi - gamma * vj};
}

inline PhaseState apply_collision(const PhaseState& s, const Event& ev,
                                  const MassVector& m,
                                  const SimPolicy& policy = {}) {
  check_dimensions(s, m);
  PhaseState out = s;
  if (ev.kind == Event::Kind::floor) {
    if (std::abs(s.q[0]) > policy.eps_q)
      fail(errc::not_in_contact, "ball 1 not at the floor");
    if (!(s.v[0] < 0.0))
      fail(errc::not_approaching, "ball 1 not moving into the floor");
    out.v[0] = -s.v[0];
  } else {
    const std::size_t i = ev.pair;
    if (i + 1 >= s.size()) fail(errc::dimension_mismatch, "pair index out of range");
    if (std::abs(s.q[i + 1] - s.q[i]) > policy.eps_q)
      fail(errc::not_in_contact, "pair not in contact");
    if (!(s.v[i] > s.v[i + 1]))
      fail(errc::not_approaching, "pair not approaching");
    auto [a, b] = pair_collision_velocities(m.gamma(i), s.v[i], s.v[i + 1]);
    out.v[i] = a;
    out.v[i + 1] = b;
  }
  return out;
}

// One resolved collision: the state advanced to the contact (pre) and the
// post-collision representative (post). Tangent propagation needs both.
struct EventStep {
  Event event;
  double dt = 0.0;   // flight time into the collision
  PhaseState pre;    // at the contact, incoming velocities
  PhaseState post;   // at the contact, outgoing velocities
};

inline EventStep step_event(const PhaseState& s, const MassVector& m,
                            const SimPolicy& policy = {}) {
  auto ev = next_event(s, policy);
  if (!ev) fail(errc::validation, "no upcoming event");
  EventStep step;
  step.event = *ev;
  step.dt = ev->dt;
  step.pre = advance_free(s, step.dt, policy);
  // Snap the contact exactly so roundoff cannot push ball 1 below the floor
  // or invert a gap.
  if (ev->kind == Event::Kind::floor) {
    step.pre.q[0] = 0.0;
  } else {
    const std::size_t i = ev->pair;
    const double mid = 0.5 * (step.pre.q[i] + step.pre.q[i + 1]);
    step.pre.q[i] = mid;
    step.pre.q[i + 1] = mid;
  }
  step.post = apply_collision(step.pre, *ev, m, policy);
  return step;
}

// Poincare step of the billiard map: advance to the next collision and return
// the post-collision boundary representative with the emitted symbol.
inline std::pair<PhaseState, int> billiard_step(const PhaseState& s,
                                                const MassVector& m,
                                                const SimPolicy& policy = {}) {
  EventStep step = step_event(s, m, policy);
  return {std::move(step.post), step.event.symbol()};
}

// Evaluates the fixed-time flow: advances through however many collisions
// occur before t_target and then free-falls the remainder. Collisions landing
// exactly on t_target are applied. Optionally records the symbols crossed.
inline PhaseState advance_to_time(const PhaseState& s, const MassVector& m,
                                  double t_target, const SimPolicy& policy = {},
                                  SymbolicSequence* crossed = nullptr) {
  if (t_target < s.t)
    fail(errc::validation, "advance_to_time: target precedes current time");
  PhaseState cur = s;
  while (true) {
    const auto ev = next_event(cur, policy);
    if (!ev || ev->time > t_target)
      return advance_free(cur, t_target - cur.t, policy);
    EventStep step = step_event(cur, m, policy);
    if (crossed) {
      crossed->symbols.push_back(step.event.symbol());
      crossed->times.push_back(step.event.time);
    }
    cur = std::move(step.post);
  }
}

// Windowed event-rate guard. Trips when more than `zeno_max` events occur
// within any `zeno_window` time span; almost every trajectory has no finite
// accumulation of collision times, so a trip indicates a degenerate input
// (or a bug), not physics.
class ZenoGuard {
 public:
  ZenoGuard(std::uint64_t zeno_max, double window)
      : max_(zeno_max), window_(window) {
    if (max_ < 1) fail(errc::validation, "zeno_max must be >= 1");
    times_.resize(max_);
  }
  explicit ZenoGuard(const SimPolicy& p) : ZenoGuard(p.zeno_max, p.zeno_window) {}

  void record(double t) {
    const std::uint64_t slot = count_ % max_;
    if (count_ >= max_) {
      const double oldest = times_[slot];  // time of event count_ - max_
      if (t - oldest < window_)
        fail(errc::zeno_guard_tripped,
             "more than " + std::to_string(max_) + " events within " +
                 std::to_string(window_) + " time units");
    }
    times_[slot] = t;
    ++count_;
  }

 private:
  std::uint64_t max_;
  double window_;
  std::uint64_t count_ = 0;
  std::vector<double> times_;
};

struct EventRecord {
  std::uint64_t index = 0;
  double time = 0.0;
  int symbol = 0;
  std::vector<double> q;
  std::vector<double> v;
  double energy = 0.0;
};

struct SimulationResult {
  std::vector<EventRecord> records;
  SymbolicSequence symbols;
  PhaseState final_state;
};

// Runs n_events collisions and hands each post-collision state to
// on_event(index, state, symbol) without buffering the trajectory; returns
// the final state. Backbone for simulate() and for streaming CSV emission.
template <typename Callback>
inline PhaseState simulate_stream(const PhaseState& initial,
                                  const MassVector& m, std::uint64_t n_events,
                                  Callback&& on_event,
                                  const SimPolicy& policy = {}) {
  if (n_events < 1) fail(errc::validation, "n_events must be >= 1");
  // A run of n_events <= zeno_max can never put zeno_max+1 events in a
  // window, so the guard (and its ring buffer) is only needed beyond that.
  const bool guarded = n_events > policy.zeno_max;
  ZenoGuard guard(guarded ? policy.zeno_max : 1,
                  guarded ? policy.zeno_window : 0.0);
  PhaseState s = initial;
  for (std::uint64_t k = 0; k < n_events; ++k) {
    auto [next, symbol] = billiard_step(s, m, policy);
    s = std::move(next);
    if (guarded) guard.record(s.t);
    on_event(k, s, symbol);
  }
  return s;
}

inline SimulationResult simulate(const PhaseState& initial, const MassVector& m,
                                 std::uint64_t n_events,
                                 const SimPolicy& policy = {}) {
  SimulationResult res;
  res.records.reserve(n_events);
  res.symbols.symbols.reserve(n_events);
  res.symbols.times.reserve(n_events);
  res.final_state = simulate_stream(
      initial, m, n_events,
      [&](std::uint64_t k, const PhaseState& s, int symbol) {
        res.symbols.symbols.push_back(symbol);
        res.symbols.times.push_back(s.t);
        res.records.push_back({k, s.t, symbol, s.q, s.v, total_energy(s, m)});
      },
      policy);
  return res;
}

}  // namespace fallingballs
