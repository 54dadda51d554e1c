#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <string>
#include <vector>

#include "fallingballs/dynamics.hpp"
#include "fallingballs/masses.hpp"
#include "fallingballs/state.hpp"

namespace fallingballs {

// Ambient tangent vector in position/velocity coordinates.
struct TangentQV {
  std::vector<double> dq;
  std::vector<double> dv;

  static TangentQV zero(std::size_t n) {
    return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  }
  std::size_t size() const { return dq.size(); }
};

// Tangent vector in the symplectic coordinates dh_i = m_i dq_i + m_i v_i dv_i.
// These are constant along free flight; reduced vectors additionally satisfy
// sum(dh) = sum(dv) = 0.
struct TangentHV {
  std::vector<double> dh;
  std::vector<double> dv;

  static TangentHV zero(std::size_t n) {
    return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  }
  std::size_t size() const { return dh.size(); }
};

// Which derivative the floor collision applies to (dq, dv) vectors:
// full carries the 2*dq_1/v_1^+ shear of the exact fixed-time derivative;
// reflect_only flips the first components and nothing else (the convention
// used by the equal-mass limiting computation).
enum class FloorDerivativeMode { full, reflect_only };

inline const char* to_string(FloorDerivativeMode m) {
  return m == FloorDerivativeMode::full ? "full" : "reflect-only";
}

inline FloorDerivativeMode parse_floor_mode(const std::string& s) {
  if (s == "full") return FloorDerivativeMode::full;
  if (s == "reflect-only" || s == "reflect_only")
    return FloorDerivativeMode::reflect_only;
  fail(errc::validation, "unknown floor derivative mode: " + s);
}

namespace detail {

inline void check_tangent_size(std::size_t n, std::size_t got,
                               const char* who) {
  if (n != got)
    fail(errc::dimension_mismatch,
         std::string(who) + ": tangent size " + std::to_string(got) +
             " does not match system size " + std::to_string(n));
}

}  // namespace detail

inline TangentHV to_symplectic(const PhaseState& state, const MassVector& m,
                               const TangentQV& tau) {
  const std::size_t n = m.size();
  check_dimensions(state, m);
  detail::check_tangent_size(n, tau.size(), "to_symplectic");
  TangentHV out;
  out.dh.resize(n);
  out.dv = tau.dv;
  for (std::size_t i = 0; i < n; ++i)
    out.dh[i] = m[i] * tau.dq[i] + m[i] * state.v[i] * tau.dv[i];
  return out;
}

inline TangentQV from_symplectic(const PhaseState& state, const MassVector& m,
                                 const TangentHV& tau) {
  const std::size_t n = m.size();
  check_dimensions(state, m);
  detail::check_tangent_size(n, tau.size(), "from_symplectic");
  TangentQV out;
  out.dq.resize(n);
  out.dv = tau.dv;
  for (std::size_t i = 0; i < n; ++i)
    out.dq[i] = tau.dh[i] / m[i] - state.v[i] * tau.dv[i];
  return out;
}

// Free flight: (dh, dv) is constant.
inline TangentHV propagate_free_hv(TangentHV tau, double) { return tau; }

// Free flight in ambient coordinates: dq grows linearly, dv is constant.
inline TangentQV propagate_free_qv(TangentQV tau, double dt) {
  for (std::size_t i = 0; i < tau.size(); ++i) tau.dq[i] += dt * tau.dv[i];
  return tau;
}

// Collision strength of pair (i, i+1):
// alpha_i = 2 m_i m_{i+1} (m_i - m_{i+1}) / (m_i + m_{i+1})^2 * (v_i - v_{i+1}).
inline double pair_alpha(const MassVector& m, std::size_t i, double vi,
                         double vj) {
  const double mi = m[i], mj = m[i + 1];
  const double sum = mi + mj;
  return 2.0 * mi * mj * (mi - mj) / (sum * sum) * (vi - vj);
}

namespace detail {

inline void check_pair_collision(const PhaseState& pre, const MassVector& m,
                                 std::size_t i, const char* who) {
  if (i + 1 >= m.size())
    fail(errc::dimension_mismatch,
         std::string(who) + ": pair index " + std::to_string(i) +
             " out of range for n=" + std::to_string(m.size()));
  if (!(pre.v[i] > pre.v[i + 1]))
    fail(errc::not_approaching,
         std::string(who) + ": pair is not approaching (v_i <= v_{i+1})");
}

}  // namespace detail

// Pair collision in symplectic coordinates:
//   dh+ = R^T (dh- + S dv-),  dv+ = R dv-
// where R = [[g, 1-g], [1+g, -g]] on slots (i, i+1), g = gamma_i, and
// S dv- adds +/- alpha_i (dv_i - dv_{i+1}) to the two slots.
inline TangentHV apply_pair_hv(TangentHV tau, const PhaseState& pre,
                               const MassVector& m, std::size_t i) {
  detail::check_tangent_size(m.size(), tau.size(), "apply_pair_hv");
  detail::check_pair_collision(pre, m, i, "apply_pair_hv");
  const double g = m.gamma(i);
  const double alpha = pair_alpha(m, i, pre.v[i], pre.v[i + 1]);
  const double shear = alpha * (tau.dv[i] - tau.dv[i + 1]);
  const double hu = tau.dh[i] + shear;
  const double hw = tau.dh[i + 1] - shear;
  tau.dh[i] = g * hu + (1.0 + g) * hw;
  tau.dh[i + 1] = (1.0 - g) * hu - g * hw;
  const double vu = tau.dv[i], vw = tau.dv[i + 1];
  tau.dv[i] = g * vu + (1.0 - g) * vw;
  tau.dv[i + 1] = (1.0 + g) * vu - g * vw;
  return tau;
}

// Floor collision in symplectic coordinates: dh is unchanged and
// dv_1+ = dv_1- + 2 dh_1 / (m_1 v_1+).
inline TangentHV apply_floor_hv(TangentHV tau, const PhaseState& post,
                                const MassVector& m) {
  detail::check_tangent_size(m.size(), tau.size(), "apply_floor_hv");
  if (!(post.v[0] > 0.0))
    fail(errc::degenerate_velocity,
         "apply_floor_hv: post-collision v_1 must be positive");
  tau.dv[0] += 2.0 * tau.dh[0] / (m[0] * post.v[0]);
  return tau;
}

// Pair collision in ambient coordinates: R acts on both dq and dv (the
// fixed-time derivative carries no extra shear because R fixes the constant
// acceleration vector).
inline TangentQV apply_pair_qv(TangentQV tau, const PhaseState& pre,
                               const MassVector& m, std::size_t i) {
  detail::check_tangent_size(m.size(), tau.size(), "apply_pair_qv");
  detail::check_pair_collision(pre, m, i, "apply_pair_qv");
  const double g = m.gamma(i);
  const double qu = tau.dq[i], qw = tau.dq[i + 1];
  tau.dq[i] = g * qu + (1.0 - g) * qw;
  tau.dq[i + 1] = (1.0 + g) * qu - g * qw;
  const double vu = tau.dv[i], vw = tau.dv[i + 1];
  tau.dv[i] = g * vu + (1.0 - g) * vw;
  tau.dv[i + 1] = (1.0 + g) * vu - g * vw;
  return tau;
}

// Floor collision in ambient coordinates. full is the exact fixed-time
// derivative dq_1+ = -dq_1-, dv_1+ = -dv_1- + 2 dq_1-/v_1+; reflect_only
// drops the shear term.
inline TangentQV apply_floor_qv(TangentQV tau, const PhaseState& post,
                                FloorDerivativeMode mode) {
  detail::check_tangent_size(post.size(), tau.size(), "apply_floor_qv");
  if (!(post.v[0] > 0.0))
    fail(errc::degenerate_velocity,
         "apply_floor_qv: post-collision v_1 must be positive");
  const double dq1 = tau.dq[0];
  tau.dq[0] = -dq1;
  tau.dv[0] = -tau.dv[0];
  if (mode == FloorDerivativeMode::full) tau.dv[0] += 2.0 * dq1 / post.v[0];
  return tau;
}

// Q-form Q(tau) = sum_i dh_i dv_i (the monotone cone quantity).
inline double qform(const TangentHV& tau) {
  double q = 0.0;
  for (std::size_t i = 0; i < tau.size(); ++i) q += tau.dh[i] * tau.dv[i];
  return q;
}

// Canonical symplectic product sum_i (dh1_i dv2_i - dh2_i dv1_i).
inline double symplectic_product(const TangentHV& a, const TangentHV& b) {
  if (a.size() != b.size())
    fail(errc::dimension_mismatch, "symplectic_product: size mismatch");
  double w = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    w += a.dh[i] * b.dv[i] - b.dh[i] * a.dv[i];
  return w;
}

// Removes the flow-direction component (dh, dv) = (0, -1) by subtracting the
// mean of dv. Requires sum(dh) = 0 (energy-shell tangency); leaves dh and the
// Q-form untouched. The tangency residual is compared against the full
// (dh, dv) norm: roundoff in sum(dh) scales with the whole vector, and
// legitimate reduced vectors may have an arbitrarily small dh part.
inline TangentHV project_transversal(TangentHV tau) {
  const std::size_t n = tau.size();
  double sum_dh = 0.0, norm2 = 0.0;
  for (double h : tau.dh) {
    sum_dh += h;
    norm2 += h * h;
  }
  for (double v : tau.dv) norm2 += v * v;
  if (std::abs(sum_dh) > 1e-9 * std::sqrt(norm2)) {
    char msg[96];
    std::snprintf(msg, sizeof msg,
                  "project_transversal: sum(dh) = %.3e exceeds 1e-9 * %.3e",
                  sum_dh, std::sqrt(norm2));
    fail(errc::energy_tangency_violated, msg);
  }
  double mean = 0.0;
  for (double v : tau.dv) mean += v;
  mean /= static_cast<double>(n);
  for (double& v : tau.dv) v -= mean;
  return tau;
}

// Orthogonal projection onto the reduced subspace sum(dh) = sum(dv) = 0
// (both means subtracted). Unlike project_transversal this accepts any
// ambient vector; it is how seeded random frames are initialized.
inline TangentHV project_reduced(TangentHV tau) {
  const double n = static_cast<double>(tau.size());
  double mh = 0.0, mv = 0.0;
  for (double h : tau.dh) mh += h;
  for (double v : tau.dv) mv += v;
  mh /= n;
  mv /= n;
  for (double& h : tau.dh) h -= mh;
  for (double& v : tau.dv) v -= mv;
  return tau;
}

namespace detail {

inline double dot_hv(const TangentHV& a, const TangentHV& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a.dh[i] * b.dh[i] + a.dv[i] * b.dv[i];
  return s;
}

inline void axpy_hv(double c, const TangentHV& x, TangentHV& y) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    y.dh[i] += c * x.dh[i];
    y.dv[i] += c * x.dv[i];
  }
}

}  // namespace detail

inline double tangent_norm(const TangentHV& tau) {
  double s = 0.0;
  for (double x : tau.dh) s += x * x;
  for (double x : tau.dv) s += x * x;
  return std::sqrt(s);
}

inline TangentHV normalized(TangentHV tau) {
  const double n = tangent_norm(tau);
  if (n == 0.0) return tau;
  for (double& x : tau.dh) x /= n;
  for (double& x : tau.dv) x /= n;
  return tau;
}

// ---------------------------------------------------------------------------
// Frame propagation through event chains.

struct FramePropagation {
  PhaseState final_state;
  std::vector<TangentHV> frame;
  double elapsed = 0.0;
  SymbolicSequence symbols;
};

struct FramePropagationQV {
  PhaseState final_state;
  std::vector<TangentQV> frame;
  SymbolicSequence symbols;
};

// Co-evolves ambient (dq, dv) vectors through n_events collisions. With
// stop_before_last_collision the returned state and frame are the
// pre-collision limit at the last event (contact reached, collision map not
// applied); the last symbol is still recorded.
inline FramePropagationQV propagate_frame_qv(
    const PhaseState& state, const MassVector& m, std::vector<TangentQV> frame,
    std::size_t n_events, FloorDerivativeMode mode, const SimPolicy& policy = {},
    bool stop_before_last_collision = false) {
  check_dimensions(state, m);
  for (const TangentQV& tau : frame)
    detail::check_tangent_size(m.size(), tau.size(), "propagate_frame_qv");
  FramePropagationQV out;
  PhaseState s = state;
  for (std::size_t l = 0; l < n_events; ++l) {
    const EventStep step = step_event(s, m, policy);
    for (TangentQV& tau : frame) tau = propagate_free_qv(std::move(tau), step.dt);
    out.symbols.symbols.push_back(step.event.symbol());
    out.symbols.times.push_back(step.event.time);
    if (stop_before_last_collision && l + 1 == n_events) {
      out.final_state = step.pre;
      out.frame = std::move(frame);
      return out;
    }
    if (step.event.kind == Event::Kind::pair) {
      for (TangentQV& tau : frame)
        tau = apply_pair_qv(std::move(tau), step.pre, m, step.event.pair);
    } else {
      for (TangentQV& tau : frame)
        tau = apply_floor_qv(std::move(tau), step.post, mode);
    }
    s = step.post;
  }
  out.final_state = s;
  out.frame = std::move(frame);
  return out;
}

// Co-evolves symplectic (dh, dv) vectors through n_events collisions.
// full mode works natively in (dh, dv) and re-projects onto the transversal
// reduction after every collision; reflect_only mode runs the ambient chain
// with the reflection-only floor derivative (which does not preserve the
// energy-shell tangency, so no projection is applied) and converts back.
inline FramePropagation propagate_frame(const PhaseState& state,
                                        const MassVector& m,
                                        std::vector<TangentHV> frame,
                                        std::size_t n_events,
                                        FloorDerivativeMode mode,
                                        const SimPolicy& policy = {}) {
  check_dimensions(state, m);
  for (const TangentHV& tau : frame)
    detail::check_tangent_size(m.size(), tau.size(), "propagate_frame");
  FramePropagation out;
  if (mode == FloorDerivativeMode::reflect_only) {
    std::vector<TangentQV> qv;
    qv.reserve(frame.size());
    for (const TangentHV& tau : frame) qv.push_back(from_symplectic(state, m, tau));
    FramePropagationQV run =
        propagate_frame_qv(state, m, std::move(qv), n_events, mode, policy);
    out.final_state = run.final_state;
    out.symbols = std::move(run.symbols);
    out.frame.reserve(run.frame.size());
    for (const TangentQV& tau : run.frame)
      out.frame.push_back(to_symplectic(out.final_state, m, tau));
    out.elapsed = out.final_state.t - state.t;
    return out;
  }
  PhaseState s = state;
  for (std::size_t l = 0; l < n_events; ++l) {
    const EventStep step = step_event(s, m, policy);
    out.symbols.symbols.push_back(step.event.symbol());
    out.symbols.times.push_back(step.event.time);
    if (step.event.kind == Event::Kind::pair) {
      for (TangentHV& tau : frame)
        tau = project_transversal(
            apply_pair_hv(std::move(tau), step.pre, m, step.event.pair));
    } else {
      for (TangentHV& tau : frame)
        tau = project_transversal(
            apply_floor_hv(std::move(tau), step.post, m));
    }
    s = step.post;
  }
  out.final_state = s;
  out.frame = std::move(frame);
  out.elapsed = s.t - state.t;
  return out;
}

}  // namespace fallingballs
