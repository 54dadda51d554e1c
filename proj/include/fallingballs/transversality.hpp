#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fallingballs/dynamics.hpp"
#include "fallingballs/sampling.hpp"
#include "fallingballs/tangent.hpp"

namespace fallingballs {

// ---------------------------------------------------------------------------
// Candle basis: energy-shell variations with vanishing position part.

struct CandleBasis {
  std::vector<TangentQV> vectors;  // n-1 orthonormal vectors with dq == 0
};

// Orthonormal basis of the "candle" directions at `state`: tangent vectors
// with dq = 0 whose velocity part is Euclidean-orthogonal to the momentum
// vector w_i = m_i v_i. Restricting dv to that hyperplane keeps first-order
// energy fixed: dH = sum_i m_i (dq_i + v_i dv_i) = 0 when dq = 0 and
// w . dv = 0. Throws degenerate_velocity when ||w|| < 1e-12.
inline CandleBasis candle_basis(const PhaseState& state, const MassVector& m) {
  const std::size_t n = m.size();
  if (state.size() != n)
    fail(errc::dimension_mismatch, "candle_basis: state/mass size mismatch");
  std::vector<double> w(n);
  double norm2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = m[i] * state.v[i];
    norm2 += w[i] * w[i];
  }
  const double norm = std::sqrt(norm2);
  if (norm < 1e-12)
    fail(errc::degenerate_velocity, "candle_basis: momentum vector too small");
  for (double& x : w) x /= norm;
  // Householder reflector H = I - 2 u u^T / (u^T u) with u = w + s e_k,
  // k = argmax |w_i| and s = sign(w_k), maps e_k to -s w. The remaining
  // columns {H e_j : j != k} are an orthonormal basis of the w-orthogonal
  // complement; the sign choice for s avoids cancellation in u.
  std::size_t k = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(w[i]) > std::abs(w[k])) k = i;
  const double s = (w[k] >= 0.0) ? 1.0 : -1.0;
  std::vector<double> u = w;
  u[k] += s;
  double u2 = 0.0;
  for (double x : u) u2 += x * x;
  CandleBasis basis;
  basis.vectors.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    if (j == k) continue;
    TangentQV tau = TangentQV::zero(n);
    const double scale = 2.0 * u[j] / u2;
    for (std::size_t i = 0; i < n; ++i) tau.dv[i] = -scale * u[i];
    tau.dv[j] += 1.0;
    basis.vectors.push_back(std::move(tau));
  }
  return basis;
}

// ---------------------------------------------------------------------------
// Candle Jacobian at the pre-collision limit of the k-th collision.

struct CandleJacobian {
  Eigen::MatrixXd matrix;    // n x (n-1): column j is the dq part of vector j
  SymbolicSequence symbols;  // symbols of collisions 1..k (k-th included)
  PhaseState pre_state;      // pre-collision limit state at collision k
  std::size_t k = 0;
  FloorDerivativeMode mode = FloorDerivativeMode::full;
};

// Propagates the candle basis through k-1 full collisions plus the free
// flight to the k-th collision surface and returns the position components
// there (the k-th collision map itself is not applied). Columns span the
// image of the candle plane in configuration space; their singular values
// quantify transversality of that image to the collision surface chart.
inline CandleJacobian candle_jacobian(const PhaseState& state,
                                      const MassVector& m, std::size_t k,
                                      FloorDerivativeMode mode,
                                      const SimPolicy& policy = {}) {
  if (k == 0) fail(errc::validation, "candle_jacobian: k must be positive");
  const std::size_t n = m.size();
  CandleBasis basis = candle_basis(state, m);
  FramePropagationQV run =
      propagate_frame_qv(state, m, std::move(basis.vectors), k, mode, policy,
                         /*stop_before_last_collision=*/true);
  CandleJacobian out;
  out.matrix.resize(static_cast<Eigen::Index>(n),
                    static_cast<Eigen::Index>(n - 1));
  for (std::size_t j = 0; j < n - 1; ++j)
    for (std::size_t i = 0; i < n; ++i)
      out.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          run.frame[j].dq[i];
  out.symbols = std::move(run.symbols);
  out.pre_state = std::move(run.final_state);
  out.k = k;
  out.mode = mode;
  return out;
}

// ---------------------------------------------------------------------------
// Singular value / rank diagnostics.

struct RankReport {
  std::vector<double> singular_values;  // nonincreasing
  std::size_t rank = 0;
  double sigma_min = 0.0;  // smallest singular value (0 for an empty matrix)
  double sigma_max = 0.0;
  double sigma_ratio = 0.0;  // sigma_min / sigma_max, 0 when sigma_max == 0
  double tol = 0.0;          // absolute threshold used for the rank count
  std::size_t k = 0;         // collision count of the probe (0 = standalone)
  FloorDerivativeMode mode = FloorDerivativeMode::full;
};

// Singular values and numerical rank of a matrix. Rank counts singular
// values above tol_factor times the largest one.
inline RankReport rank_report(const Eigen::MatrixXd& matrix,
                              double tol_factor = 1e-9) {
  RankReport out;
  const Eigen::Index cols = matrix.cols();
  if (matrix.rows() == 0 || cols == 0) return out;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix);
  out.singular_values.assign(svd.singularValues().data(),
                             svd.singularValues().data() + svd.singularValues().size());
  out.sigma_max = out.singular_values.front();
  out.sigma_min = out.singular_values.back();
  out.sigma_ratio = out.sigma_max > 0.0 ? out.sigma_min / out.sigma_max : 0.0;
  out.tol = tol_factor * out.sigma_max;
  for (double sv : out.singular_values)
    if (sv > out.tol) ++out.rank;
  if (out.sigma_max == 0.0) out.rank = 0;
  return out;
}

// ---------------------------------------------------------------------------
// Rank probe seeded on the codimension-two (double contact) strata.

struct SingularRankResult {
  CandleJacobian jacobian;
  RankReport report;
  std::vector<int> stratum;  // the two contact symbols sampled
  std::uint64_t seed = 0;
};

// Samples an outgoing state on a double-contact stratum (two independent
// simultaneous contacts) and evaluates the candle Jacobian rank after k
// collisions. These starting points are the worst case for transversality,
// so a full-rank result here is the strongest version of the probe.
inline SingularRankResult singular_rank_test(const MassVector& m,
                                             std::uint64_t seed, std::size_t k,
                                             FloorDerivativeMode mode,
                                             const SimPolicy& policy = {},
                                             double tol_factor = 1e-9) {
  SampleInfo info;
  const PhaseState state =
      sample_state(m, seed, SampleLocus::singular_double, &info);
  SingularRankResult out;
  out.jacobian = candle_jacobian(state, m, k, mode, policy);
  out.report = rank_report(out.jacobian.matrix, tol_factor);
  out.report.k = k;
  out.report.mode = mode;
  out.stratum = info.contacts;
  out.seed = seed;
  return out;
}

// ---------------------------------------------------------------------------
// Equal-mass pass-through oracle.

// In the equal-mass system a pair collision exchanges the two velocities, so
// the dynamics is a relabeling of n independent bouncing particles; the
// relabeling permutation acts identically on tangent slots because the
// pair derivative map at gamma = 0 is the same slot swap. For a candle
// vector (dq = 0 at t = 0) propagated with the reflection-only floor rule
// this gives the closed form dq(t) = (t - t0) * dv(t) exactly: free flight,
// slot swaps, and the reflection dq_1 -> -dq_1, dv_1 -> -dv_1 all preserve
// it. Returns the largest sup-norm residual max_i |dq_i - (t - t0) dv_i|
// over every post-collision instant and every candle basis vector, which
// measures how faithfully the ambient chain realizes the pass-through
// picture in floating point.
inline double equal_mass_oracle(const PhaseState& state, std::size_t n_events,
                                const SimPolicy& policy = {}) {
  const std::size_t n = state.size();
  if (n < 2) fail(errc::validation, "equal_mass_oracle: need at least two balls");
  const MassVector m(std::vector<double>(n, 1.0));
  std::vector<TangentQV> frame = candle_basis(state, m).vectors;
  const double t0 = state.t;
  PhaseState s = state;
  double worst = 0.0;
  for (std::size_t l = 0; l < n_events; ++l) {
    const EventStep step = step_event(s, m, policy);
    for (TangentQV& tau : frame) {
      tau = propagate_free_qv(std::move(tau), step.dt);
      if (step.event.kind == Event::Kind::pair)
        tau = apply_pair_qv(std::move(tau), step.pre, m, step.event.pair);
      else
        tau = apply_floor_qv(std::move(tau), step.post,
                             FloorDerivativeMode::reflect_only);
    }
    s = step.post;
    const double elapsed = s.t - t0;
    for (const TangentQV& tau : frame)
      for (std::size_t i = 0; i < n; ++i)
        worst = std::max(worst, std::abs(tau.dq[i] - elapsed * tau.dv[i]));
  }
  return worst;
}

}  // namespace fallingballs
