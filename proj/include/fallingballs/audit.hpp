#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "fallingballs/dynamics.hpp"
#include "fallingballs/rng.hpp"
#include "fallingballs/tangent.hpp"

namespace fallingballs {

// One cone-audit row per collision event: the Q-form of the carried tangent
// vector immediately before and after the collision map, plus the collision
// strength (alpha for pairs, the predicted 2 dh_1^2/(m_1 v_1^+) increment for
// floor events).
struct ConeAuditRow {
  std::uint64_t event_index = 0;
  double time = 0.0;
  int symbol = 0;
  double q_before = 0.0;
  double q_after = 0.0;
  double delta_q = 0.0;
  double alpha_or_floor_increment = 0.0;
};

struct ConeAuditResult {
  std::vector<ConeAuditRow> rows;  // first audited vector only
  double min_delta_q = 0.0;        // over all events and all vectors
  // max |delta_Q - 2 dh_1^2/(m_1 v_1^+)| / max(1, prediction) at floor events
  double max_floor_increment_mismatch = 0.0;
  std::uint64_t n_collisions = 0;
  std::uint64_t n_floor_collisions = 0;
  PhaseState final_state;
};

namespace detail {

inline TangentHV random_reduced_unit(SplitMix64& rng, std::size_t n) {
  TangentHV tau = TangentHV::zero(n);
  for (std::size_t i = 0; i < n; ++i) {
    tau.dh[i] = rng.uniform(-1.0, 1.0);
    tau.dv[i] = rng.uniform(-1.0, 1.0);
  }
  return normalized(project_reduced(std::move(tau)));
}

}  // namespace detail

// Propagates n_vectors seeded reduced tangent vectors along the trajectory
// and records the Q-form jump at every collision. Vectors are renormalized
// to unit length after each event, so recorded Q values always refer to the
// unit-normalized carried vector. Works for any mass vector; monotonicity of
// Q is a property the caller asserts (it holds for nonincreasing masses).
inline ConeAuditResult cone_audit(const PhaseState& initial,
                                  const MassVector& m, std::uint64_t n_events,
                                  std::size_t n_vectors, std::uint64_t seed,
                                  const SimPolicy& policy = {}) {
  if (n_vectors < 1) fail(errc::validation, "cone_audit: n_vectors must be >= 1");
  check_dimensions(initial, m);
  const std::size_t n = m.size();
  SplitMix64 rng(seed);
  std::vector<TangentHV> frame;
  frame.reserve(n_vectors);
  for (std::size_t k = 0; k < n_vectors; ++k)
    frame.push_back(detail::random_reduced_unit(rng, n));

  ConeAuditResult out;
  out.rows.reserve(n_events);
  out.min_delta_q = std::numeric_limits<double>::infinity();
  PhaseState s = initial;
  for (std::uint64_t l = 0; l < n_events; ++l) {
    const EventStep step = step_event(s, m, policy);
    const bool is_floor = step.event.kind == Event::Kind::floor;
    double strength = 0.0;
    if (!is_floor)
      strength = pair_alpha(m, step.event.pair, step.pre.v[step.event.pair],
                            step.pre.v[step.event.pair + 1]);
    for (std::size_t k = 0; k < n_vectors; ++k) {
      TangentHV& tau = frame[k];
      const double q_before = qform(tau);
      double predicted = strength;
      if (is_floor) {
        predicted = 2.0 * tau.dh[0] * tau.dh[0] / (m[0] * step.post.v[0]);
        tau = apply_floor_hv(std::move(tau), step.post, m);
      } else {
        tau = apply_pair_hv(std::move(tau), step.pre, m, step.event.pair);
      }
      const double q_after = qform(tau);
      const double dq = q_after - q_before;
      out.min_delta_q = std::min(out.min_delta_q, dq);
      if (is_floor) {
        const double mismatch =
            std::abs(dq - predicted) / std::max(1.0, std::abs(predicted));
        out.max_floor_increment_mismatch =
            std::max(out.max_floor_increment_mismatch, mismatch);
      }
      if (k == 0)
        out.rows.push_back({l, step.event.time, step.event.symbol(), q_before,
                            q_after, dq,
                            is_floor ? predicted : strength});
      tau = normalized(project_transversal(std::move(tau)));
    }
    out.n_collisions += 1;
    out.n_floor_collisions += is_floor ? 1 : 0;
    s = step.post;
  }
  out.final_state = std::move(s);
  return out;
}

// Per-event invariance audit for the symplectic product and the dh-sum.
// Two seeded reduced unit vectors are carried along the trajectory with
// per-event renormalization; at every collision the change of omega across
// the collision map (scaled by the product of post-map norms) is accumulated,
// and the worst absolute residual of sum(dh) and sum(dv) on the renormalized
// vectors is tracked.
struct SymplecticDriftReport {
  double omega_drift = 0.0;        // accumulated per-event relative drift
  double max_dh_sum = 0.0;         // worst |sum(dh)| on unit vectors
  double max_dv_sum = 0.0;         // worst |sum(dv)| after projection
  std::uint64_t n_events = 0;
  PhaseState final_state;
};

inline SymplecticDriftReport symplectic_drift_audit(
    const PhaseState& initial, const MassVector& m, std::uint64_t n_events,
    std::uint64_t seed, const SimPolicy& policy = {}) {
  check_dimensions(initial, m);
  const std::size_t n = m.size();
  SplitMix64 rng(seed);
  TangentHV t1 = detail::random_reduced_unit(rng, n);
  TangentHV t2 = detail::random_reduced_unit(rng, n);
  SymplecticDriftReport rep;
  PhaseState s = initial;
  for (std::uint64_t l = 0; l < n_events; ++l) {
    const EventStep step = step_event(s, m, policy);
    const double before = symplectic_product(t1, t2);
    if (step.event.kind == Event::Kind::floor) {
      t1 = apply_floor_hv(std::move(t1), step.post, m);
      t2 = apply_floor_hv(std::move(t2), step.post, m);
    } else {
      t1 = apply_pair_hv(std::move(t1), step.pre, m, step.event.pair);
      t2 = apply_pair_hv(std::move(t2), step.pre, m, step.event.pair);
    }
    const double after = symplectic_product(t1, t2);
    const double scale = tangent_norm(t1) * tangent_norm(t2);
    if (scale > 0.0) rep.omega_drift += std::abs(after - before) / scale;
    t1 = normalized(project_transversal(std::move(t1)));
    t2 = normalized(project_transversal(std::move(t2)));
    for (const TangentHV* t : {&t1, &t2}) {
      double sh = 0.0, sv = 0.0;
      for (double x : t->dh) sh += x;
      for (double x : t->dv) sv += x;
      rep.max_dh_sum = std::max(rep.max_dh_sum, std::abs(sh));
      rep.max_dv_sum = std::max(rep.max_dv_sum, std::abs(sv));
    }
    rep.n_events += 1;
    s = step.post;
  }
  rep.final_state = std::move(s);
  return rep;
}

}  // namespace fallingballs
