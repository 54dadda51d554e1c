#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "fallingballs/masses.hpp"
#include "fallingballs/rng.hpp"
#include "fallingballs/state.hpp"

namespace fallingballs {

enum class SampleLocus {
  interior,        // no contact
  boundary,        // exactly one contact, post-collision representative
  singular_double, // two independent simultaneous contacts
};

inline const char* to_string(SampleLocus l) {
  switch (l) {
    case SampleLocus::interior: return "interior";
    case SampleLocus::boundary: return "boundary";
    case SampleLocus::singular_double: return "singular-double";
  }
  return "?";
}

struct SampleInfo {
  SampleLocus locus = SampleLocus::interior;
  // Contact symbols placed by the sampler (0 = floor, i = pair (i,i+1)).
  std::vector<int> contacts;
};

namespace detail {

// Contacts c1, c2 are independent when they involve disjoint balls:
// floor uses ball 1; pair i uses balls i, i+1 (symbols are 1-based).
inline bool contacts_independent(int c1, int c2) {
  if (c1 == c2) return false;
  const int lo = std::min(c1, c2), hi = std::max(c1, c2);
  return hi - lo >= 2;
}

inline void enforce_outgoing(std::vector<double>& v, int contact) {
  if (contact == 0) {
    // Post-floor representative: ball 1 moves up.
    if (v[0] < 0.0) v[0] = -v[0];
    if (v[0] == 0.0) v[0] = 0.5;
  } else {
    // Post-pair representative: the pair separates.
    const std::size_t i = static_cast<std::size_t>(contact - 1);
    if (v[i] > v[i + 1]) std::swap(v[i], v[i + 1]);
    if (v[i] == v[i + 1]) v[i + 1] += 0.5;
  }
}

}  // namespace detail

// Seeded state on the H=1 shell. Distribution: the gaps
// (q_1, q_2-q_1, ..., q_n-q_{n-1}) are drawn U[0.1, 1.1) and velocities
// U[-1, 1), in that order, from SplitMix64(seed); the requested contacts
// are then zeroed and given outgoing velocities, and the whole state is
// rescaled by (q, v) -> (s q, sqrt(s) v), s = 1/H, which lands exactly on
// the energy shell and preserves contacts.
inline PhaseState sample_state(const MassVector& masses, std::uint64_t seed,
                               SampleLocus locus, SampleInfo* info = nullptr) {
  const std::size_t n = masses.size();
  SplitMix64 rng(seed);

  std::vector<int> contacts;
  if (locus == SampleLocus::boundary) {
    contacts.push_back(static_cast<int>(rng.below(n)));
  } else if (locus == SampleLocus::singular_double) {
    std::vector<std::pair<int, int>> strata;
    for (int a = 0; a < static_cast<int>(n); ++a)
      for (int b = a + 2; b < static_cast<int>(n); ++b)
        strata.emplace_back(a, b);
    if (strata.empty())
      fail(errc::validation,
           "no independent double-contact stratum exists for n=" +
               std::to_string(n));
    const auto& pick = strata[rng.below(strata.size())];
    contacts = {pick.first, pick.second};
  }

  std::vector<double> gaps(n), v(n);
  for (std::size_t i = 0; i < n; ++i) gaps[i] = rng.uniform(0.1, 1.1);
  for (std::size_t i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
  for (int c : contacts) gaps[static_cast<std::size_t>(c)] = 0.0;
  for (int c : contacts) detail::enforce_outgoing(v, c);

  PhaseState s;
  s.t = 0.0;
  s.q.resize(n);
  s.v = std::move(v);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += gaps[i];
    s.q[i] = acc;
  }
  s = rescaled_to_energy(s, masses, 1.0);
  s.t = 0.0;

  if (info) {
    info->locus = locus;
    info->contacts = contacts;
  }
  return s;
}

// Strictly decreasing mass vector, uniform on the simplex (Dirichlet(1)
// via normalized exponentials) sorted descending; draws are rejected while
// any adjacent difference is below min_gap. Returns nullopt if no draw
// passes within max_attempts.
inline std::optional<MassVector> sample_masses_strictly_decreasing(
    SplitMix64& rng, std::size_t n, double min_gap = 1e-3,
    int max_attempts = 1000) {
  std::vector<double> m(n);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = rng.exponential();
      sum += m[i];
    }
    for (double& x : m) x /= sum;
    std::sort(m.begin(), m.end(), std::greater<>());
    bool ok = true;
    for (std::size_t i = 0; i + 1 < n; ++i)
      if (m[i] - m[i + 1] < min_gap) {
        ok = false;
        break;
      }
    if (ok) return MassVector(m);
  }
  return std::nullopt;
}

}  // namespace fallingballs
