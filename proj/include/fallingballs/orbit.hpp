#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "fallingballs/dynamics.hpp"
#include "fallingballs/rng.hpp"
#include "fallingballs/sampling.hpp"
#include "fallingballs/tangent.hpp"

namespace fallingballs {

struct StableOrbitResult {
  int period = 0;                       // minimal period in collisions
  PhaseState orbit_state;               // post-collision representative
  int contact = 0;                      // chart: 0 = floor, 1 = pair
  std::vector<int> symbols;             // one period of collision symbols
  double return_residual = 0.0;         // max |T^p(x) - x| over q and v
  std::array<double, 4> monodromy{};    // row-major 2x2, fixed reduced basis
  std::array<double, 2> moduli{};       // eigenvalue moduli, descending
};

namespace detail {

// Boundary chart for n=2: a contact type plus the two velocities; positions
// are reconstructed from the contact equation and H=1.
inline std::optional<PhaseState> orbit_chart_state(const MassVector& m,
                                                   int contact, double v1,
                                                   double v2) {
  const double kinetic = 0.5 * (m[0] * v1 * v1 + m[1] * v2 * v2);
  PhaseState s;
  s.t = 0.0;
  s.v = {v1, v2};
  if (contact == 0) {
    if (!(v1 > 0.0)) return std::nullopt;  // outgoing from the floor
    const double q2 = (1.0 - kinetic) / m[1];
    if (!(q2 > 0.0)) return std::nullopt;
    s.q = {0.0, q2};
  } else {
    if (!(v1 < v2)) return std::nullopt;  // separating pair
    const double q = (1.0 - kinetic) / (m[0] + m[1]);
    if (!(q > 0.0)) return std::nullopt;
    s.q = {q, q};
  }
  return s;
}

struct ReturnEval {
  double f1 = 0.0, f2 = 0.0;        // chart displacement of T^p
  std::vector<int> symbols;
};

inline std::optional<ReturnEval> orbit_return(const MassVector& m, int contact,
                                              double v1, double v2, int period,
                                              const SimPolicy& policy) {
  const auto start = orbit_chart_state(m, contact, v1, v2);
  if (!start) return std::nullopt;
  ReturnEval out;
  PhaseState s = *start;
  try {
    for (int l = 0; l < period; ++l) {
      auto [next, symbol] = billiard_step(s, m, policy);
      s = std::move(next);
      out.symbols.push_back(symbol);
    }
  } catch (const error&) {
    return std::nullopt;
  }
  if (out.symbols.back() != contact) return std::nullopt;
  out.f1 = s.v[0] - v1;
  out.f2 = s.v[1] - v2;
  return out;
}

}  // namespace detail

// Searches for a periodic orbit of the two-ball billiard map (m_1 < m_2) by
// Newton iteration on the chart return displacement over candidate periods
// up to max_period, starting from seeded boundary samples. Among all orbits
// whose full-state return residual is below residual_tol, returns the one
// whose monodromy eigenvalue moduli are closest to 1 (the linearly stable
// orbit when one exists).
inline StableOrbitResult stable_orbit_probe(const MassVector& m,
                                            std::uint64_t seed,
                                            const SimPolicy& policy = {},
                                            int max_period = 8,
                                            int n_starts = 50,
                                            double residual_tol = 1e-10) {
  if (m.size() != 2)
    fail(errc::validation, "stable_orbit_probe: requires exactly two balls");
  if (!(m[0] < m[1]))
    fail(errc::validation,
         "stable_orbit_probe: requires the bottom ball lighter (m_1 < m_2)");

  std::optional<StableOrbitResult> best;
  double best_score = std::numeric_limits<double>::infinity();

  auto try_newton = [&](int contact, double v1, double v2, int period) {
    for (int iter = 0; iter < 40; ++iter) {
      const auto f0 = detail::orbit_return(m, contact, v1, v2, period, policy);
      if (!f0) return;
      if (std::max(std::abs(f0->f1), std::abs(f0->f2)) < 1e-13) break;
      const double h = 1e-8;
      const auto fp1 = detail::orbit_return(m, contact, v1 + h, v2, period, policy);
      const auto fm1 = detail::orbit_return(m, contact, v1 - h, v2, period, policy);
      const auto fp2 = detail::orbit_return(m, contact, v1, v2 + h, period, policy);
      const auto fm2 = detail::orbit_return(m, contact, v1, v2 - h, period, policy);
      if (!fp1 || !fm1 || !fp2 || !fm2) return;
      for (const auto* f : {&*fp1, &*fm1, &*fp2, &*fm2})
        if (f->symbols != f0->symbols) return;
      const double j11 = (fp1->f1 - fm1->f1) / (2 * h);
      const double j21 = (fp1->f2 - fm1->f2) / (2 * h);
      const double j12 = (fp2->f1 - fm2->f1) / (2 * h);
      const double j22 = (fp2->f2 - fm2->f2) / (2 * h);
      const double det = j11 * j22 - j12 * j21;
      if (std::abs(det) < 1e-12) return;
      const double d1 = (-f0->f1 * j22 + f0->f2 * j12) / det;
      const double d2 = (-f0->f2 * j11 + f0->f1 * j21) / det;
      if (std::abs(d1) > 1.0 || std::abs(d2) > 1.0) return;  // diverging
      v1 += d1;
      v2 += d2;
    }

    // Certify: rebuild the state and measure the full return residual.
    const auto x0 = detail::orbit_chart_state(m, contact, v1, v2);
    if (!x0) return;
    PhaseState s = *x0;
    std::vector<int> symbols;
    try {
      for (int l = 0; l < period; ++l) {
        auto [next, symbol] = billiard_step(s, m, policy);
        s = std::move(next);
        symbols.push_back(symbol);
      }
    } catch (const error&) {
      return;
    }
    double residual = 0.0;
    for (int i = 0; i < 2; ++i) {
      residual = std::max(residual, std::abs(s.q[i] - x0->q[i]));
      residual = std::max(residual, std::abs(s.v[i] - x0->v[i]));
    }
    if (!(residual < residual_tol)) return;

    // Reduce to the minimal period.
    int min_period = period;
    std::vector<int> min_symbols = symbols;
    for (int q = 1; q < period; ++q) {
      if (period % q != 0) continue;
      PhaseState t = *x0;
      std::vector<int> syms;
      bool ok = true;
      try {
        for (int l = 0; l < q; ++l) {
          auto [next, symbol] = billiard_step(t, m, policy);
          t = std::move(next);
          syms.push_back(symbol);
        }
      } catch (const error&) {
        ok = false;
      }
      double r = 0.0;
      if (ok)
        for (int i = 0; i < 2; ++i) {
          r = std::max(r, std::abs(t.q[i] - x0->q[i]));
          r = std::max(r, std::abs(t.v[i] - x0->v[i]));
        }
      if (ok && r < residual_tol) {
        min_period = q;
        min_symbols = std::move(syms);
        residual = std::max(residual, r);
        break;
      }
    }

    // Monodromy over one minimal period in the fixed orthonormal symplectic
    // basis e1 = ((1,-1)/sqrt2, 0), e2 = (0, (1,-1)/sqrt2) of the reduced
    // tangent plane.
    const double r2 = std::sqrt(0.5);
    TangentHV e1{{r2, -r2}, {0.0, 0.0}};
    TangentHV e2{{0.0, 0.0}, {r2, -r2}};
    std::vector<TangentHV> frame{e1, e2};
    PhaseState t = *x0;
    try {
      for (int l = 0; l < min_period; ++l) {
        const EventStep step = step_event(t, m, policy);
        for (TangentHV& tau : frame) {
          if (step.event.kind == Event::Kind::floor)
            tau = project_transversal(apply_floor_hv(std::move(tau), step.post, m));
          else
            tau = project_transversal(
                apply_pair_hv(std::move(tau), step.pre, m, step.event.pair));
        }
        t = step.post;
      }
    } catch (const error&) {
      return;
    }
    const double m11 = detail::dot_hv(e1, frame[0]);
    const double m12 = detail::dot_hv(e1, frame[1]);
    const double m21 = detail::dot_hv(e2, frame[0]);
    const double m22 = detail::dot_hv(e2, frame[1]);
    const double tr = m11 + m22;
    const double det = m11 * m22 - m12 * m21;
    const double disc = tr * tr - 4.0 * det;
    std::array<double, 2> moduli{};
    if (disc < 0.0) {
      moduli[0] = moduli[1] = std::sqrt(det);
    } else {
      const double root = std::sqrt(disc);
      moduli[0] = std::abs(0.5 * (tr + root));
      moduli[1] = std::abs(0.5 * (tr - root));
      if (moduli[0] < moduli[1]) std::swap(moduli[0], moduli[1]);
    }
    const double score =
        std::max(std::abs(moduli[0] - 1.0), std::abs(moduli[1] - 1.0));
    if (score < best_score) {
      best_score = score;
      StableOrbitResult res;
      res.period = min_period;
      res.orbit_state = *x0;
      res.contact = contact;
      res.symbols = std::move(min_symbols);
      res.return_residual = residual;
      res.monodromy = {m11, m12, m21, m22};
      res.moduli = moduli;
      best = std::move(res);
    }
  };

  for (int start = 0; start < n_starts; ++start) {
    SampleInfo info;
    PhaseState s0;
    try {
      s0 = sample_state(m, derive_seed(seed, start), SampleLocus::boundary,
                        &info);
    } catch (const error&) {
      continue;
    }
    const int contact = info.contacts[0];
    for (int period = 1; period <= max_period; ++period)
      try_newton(contact, s0.v[0], s0.v[1], period);
  }

  if (!best)
    fail(errc::orbit_not_found,
         "no periodic orbit located within the search budget");
  return *best;
}

}  // namespace fallingballs
