#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fallingballs/errors.hpp"
#include "fallingballs/state.hpp"

namespace fallingballs {

// Tolerances and guard limits for event-driven stepping.
struct SimPolicy {
  // Two event candidates closer than eps_t = eps_t_scale * (|t| + 1) are
  // treated as simultaneous.
  double eps_t_scale = 1e-12;
  // Contact tolerance for collision preconditions.
  double eps_q = 1e-10;
  // abort (default) throws near_simultaneous; resolve picks floor first,
  // then the lowest pair index.
  bool resolve_near_simultaneous = false;
  // Trip if more than zeno_max events fall inside any window of
  // zeno_window time units.
  std::uint64_t zeno_max = 1000000;
  double zeno_window = 1.0;

  double eps_t(double t) const { return eps_t_scale * (std::abs(t) + 1.0); }
};

// Next collision. Pairs are indexed by the lower ball, 0-based; symbol()
// uses the external convention 0 = floor, i = pair (i, i+1) with i 1-based.
struct Event {
  enum class Kind { floor, pair };
  Kind kind = Kind::floor;
  std::size_t pair = 0;  // lower ball index, valid when kind == pair
  double time = 0.0;     // absolute time of occurrence
  // Flight time from the queried state. Kept alongside `time` because at
  // large |t| the round trip (t + dt) - t loses ~ulp(t) of precision, which
  // multiplied by a closing speed can overshoot a contact past the ordering
  // tolerance.
  double dt = 0.0;

  int symbol() const {
    return kind == Kind::floor ? 0 : static_cast<int>(pair) + 1;
  }
};

struct SymbolicSequence {
  std::vector<int> symbols;
  std::vector<double> times;

  std::size_t size() const { return symbols.size(); }
  std::string joined(char sep = '-') const {
    std::string out;
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      if (i) out.push_back(sep);
      out += std::to_string(symbols[i]);
    }
    return out;
  }
};

namespace detail {

// Positive root of q1 + v1*tau - tau^2/2 = 0, in the cancellation-free form
// for each sign of v1.
inline double floor_flight_time(double q1, double v1) {
  const double disc = v1 * v1 + 2.0 * q1;
  const double root = std::sqrt(disc);
  if (v1 >= 0.0) return v1 + root;
  return 2.0 * q1 / (root - v1);
}

}  // namespace detail

// Earliest upcoming collision from `s`. Pair (i,i+1) is a candidate iff
// v_i > v_{i+1} (the gap closes linearly; relative acceleration vanishes);
// the floor candidate always exists unless ball 1 rests on the floor.
inline std::optional<Event> next_event(const PhaseState& s,
                                       const SimPolicy& policy = {}) {
  const std::size_t n = s.size();
  if (n < 2) fail(errc::dimension_mismatch, "need at least 2 balls");

  struct Candidate {
    Event::Kind kind;
    std::size_t pair;
    double dt;
  };
  std::vector<Candidate> cands;
  cands.reserve(n);

  const double q1 = s.q[0], v1 = s.v[0];
  if (q1 < -policy.eps_q)
    fail(errc::ordering_violated, "ball 1 below the floor");
  if (q1 == 0.0 && v1 == 0.0)
    fail(errc::degenerate_rest, "ball 1 at rest on the floor");
  cands.push_back({Event::Kind::floor, 0,
                   detail::floor_flight_time(std::max(q1, 0.0), v1)});

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double dv = s.v[i] - s.v[i + 1];
    if (dv > 0.0) {
      const double gap = s.q[i + 1] - s.q[i];
      cands.push_back({Event::Kind::pair, i, std::max(gap, 0.0) / dv});
    }
  }
  if (cands.empty()) return std::nullopt;

  std::size_t best = 0;
  for (std::size_t c = 1; c < cands.size(); ++c)
    if (cands[c].dt < cands[best].dt) best = c;

  const double eps = policy.eps_t(s.t);
  std::size_t chosen = best;
  bool tie = false;
  for (std::size_t c = 0; c < cands.size(); ++c) {
    if (c == best) continue;
    if (cands[c].dt - cands[best].dt < eps) {
      tie = true;
      break;
    }
  }
  if (tie) {
    if (!policy.resolve_near_simultaneous)
      fail(errc::near_simultaneous,
           "two event candidates within eps_t at t=" + std::to_string(s.t));
    // Deterministic priority among the near-simultaneous cluster:
    // floor first, then ascending pair index.
    chosen = best;
    for (std::size_t c = 0; c < cands.size(); ++c) {
      if (cands[c].dt - cands[best].dt >= eps) continue;
      const auto& cur = cands[chosen];
      const auto& cand = cands[c];
      const bool cand_wins =
          (cand.kind == Event::Kind::floor && cur.kind != Event::Kind::floor) ||
          (cand.kind == cur.kind && cand.kind == Event::Kind::pair &&
           cand.pair < cur.pair);
      if (cand_wins) chosen = c;
    }
  }

  Event ev;
  ev.kind = cands[chosen].kind;
  ev.pair = cands[chosen].pair;
  // The whole cluster is treated as simultaneous at the earliest candidate
  // time. Firing the priority event there (its contact gap is below the tie
  // window and gets snapped shut) keeps every other gap nonnegative; flying
  // to the priority event's own root instead would cross the earlier
  // candidates and violate the ordering invariant.
  ev.dt = cands[best].dt;
  ev.time = s.t + ev.dt;
  return ev;
}

}  // namespace fallingballs
