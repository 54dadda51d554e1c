#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "fallingballs/errors.hpp"
#include "fallingballs/masses.hpp"

namespace fallingballs {

// Point of the flow phase space: n balls on the half line q >= 0 under unit
// downward acceleration. Invariant: 0 <= q_1 <= q_2 <= ... <= q_n.
struct PhaseState {
  double t = 0.0;
  std::vector<double> q;
  std::vector<double> v;

  std::size_t size() const { return q.size(); }
};

inline void check_dimensions(const PhaseState& s, const MassVector& m) {
  if (s.q.size() != m.size() || s.v.size() != m.size())
    fail(errc::dimension_mismatch, "state/mass dimension mismatch");
}

// H = sum_i (m_i q_i + 1/2 m_i v_i^2)
inline double total_energy(const PhaseState& s, const MassVector& m) {
  check_dimensions(s, m);
  double h = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i)
    h += m[i] * s.q[i] + 0.5 * m[i] * s.v[i] * s.v[i];
  return h;
}

inline bool ordering_ok(const PhaseState& s, double tol = 0.0) {
  if (s.q.empty() || s.q.front() < -tol) return false;
  for (std::size_t i = 0; i + 1 < s.q.size(); ++i)
    if (s.q[i + 1] - s.q[i] < -tol) return false;
  return true;
}

// The exact symmetry (q, v) -> (s q, sqrt(s) v) multiplies H by s and maps
// trajectories to trajectories with time rescaled by sqrt(s).
inline PhaseState scaled(const PhaseState& st, double s) {
  PhaseState out = st;
  const double rs = std::sqrt(s);
  for (double& qi : out.q) qi *= s;
  for (double& vi : out.v) vi *= rs;
  out.t = st.t * rs;
  return out;
}

// Rescale onto the H = target shell. Exact contacts (q_i = q_{i+1}, q_1 = 0)
// are preserved by the scaling.
inline PhaseState rescaled_to_energy(const PhaseState& st, const MassVector& m,
                                     double target = 1.0) {
  const double h = total_energy(st, m);
  if (!(h > 0.0)) fail(errc::validation, "cannot rescale state with H <= 0");
  PhaseState out = scaled(st, target / h);
  out.t = st.t;
  return out;
}

}  // namespace fallingballs
