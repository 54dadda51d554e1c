#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "fallingballs/audit.hpp"
#include "fallingballs/dynamics.hpp"
#include "fallingballs/rng.hpp"
#include "fallingballs/sampling.hpp"
#include "fallingballs/tangent.hpp"

namespace fallingballs {

struct LyapunovResult {
  std::vector<double> exponents_map;   // per collision, sorted descending
  std::vector<double> exponents_flow;  // per unit time (map / mean return time)
  std::vector<double> stderrs;         // batch-means error bars, same order
  double mean_return_time = 0.0;
  std::uint64_t n_events = 0;
  std::vector<std::string> flags;
};

namespace detail {

// Stabilized modified Gram-Schmidt in place; returns the diagonal stretch
// factors (positive by construction).
inline std::vector<double> mgs_orthonormalize(std::vector<TangentHV>& frame) {
  std::vector<double> diag(frame.size());
  for (std::size_t j = 0; j < frame.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i)
      axpy_hv(-dot_hv(frame[j], frame[i]), frame[i], frame[j]);
    const double r = tangent_norm(frame[j]);
    if (!(r > 0.0))
      fail(errc::validation, "orthonormalization hit a rank-deficient frame");
    diag[j] = r;
    const double inv = 1.0 / r;
    for (double& x : frame[j].dh) x *= inv;
    for (double& x : frame[j].dv) x *= inv;
  }
  return diag;
}

inline std::vector<TangentHV> seeded_reduced_frame(SplitMix64& rng,
                                                   std::size_t n,
                                                   std::size_t count) {
  std::vector<TangentHV> frame;
  frame.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    TangentHV tau = TangentHV::zero(n);
    for (std::size_t i = 0; i < n; ++i) {
      tau.dh[i] = rng.uniform(-1.0, 1.0);
      tau.dv[i] = rng.uniform(-1.0, 1.0);
    }
    frame.push_back(project_reduced(std::move(tau)));
  }
  mgs_orthonormalize(frame);
  return frame;
}

}  // namespace detail

// Benettin-style Lyapunov spectrum of the billiard map on the reduced
// (2n-2)-dimensional tangent space, with flow exponents obtained by dividing
// by the mean return time. The initial state is drawn from the interior
// locus with derive_seed(seed, 0) and the frame from derive_seed(seed, 1);
// the frame is re-orthonormalized every reortho_interval events (and at
// batch edges), accumulating log stretch factors. Error bars come from ten
// non-overlapping batch means. If any error bar exceeds stderr_cap the
// result carries a "non-convergence" flag (never thrown).
inline LyapunovResult lyapunov_spectrum(
    const MassVector& m, std::uint64_t seed, std::uint64_t n_events,
    std::uint64_t reortho_interval, const SimPolicy& policy = {},
    double stderr_cap = std::numeric_limits<double>::infinity()) {
  if (n_events < 1000)
    fail(errc::validation, "lyapunov_spectrum: n_events must be >= 1000");
  if (reortho_interval < 1)
    fail(errc::validation, "lyapunov_spectrum: reortho_interval must be >= 1");
  const std::size_t n = m.size();
  const std::size_t d = 2 * n - 2;
  constexpr std::size_t kBatches = 10;

  const PhaseState initial =
      sample_state(m, derive_seed(seed, 0), SampleLocus::interior);
  SplitMix64 frame_rng(derive_seed(seed, 1));
  std::vector<TangentHV> frame = detail::seeded_reduced_frame(frame_rng, n, d);

  std::vector<double> total_logs(d, 0.0);
  std::vector<std::vector<double>> batch_logs(kBatches,
                                              std::vector<double>(d, 0.0));
  PhaseState s = initial;
  std::uint64_t done = 0;
  while (done < n_events) {
    const std::size_t batch = static_cast<std::size_t>(
        std::min<std::uint64_t>(done * kBatches / n_events, kBatches - 1));
    const std::uint64_t batch_end = (batch + 1) * n_events / kBatches;
    const std::uint64_t block_end =
        std::min({done + reortho_interval, batch_end, n_events});
    for (; done < block_end; ++done) {
      const EventStep step = step_event(s, m, policy);
      if (step.event.kind == Event::Kind::floor) {
        for (TangentHV& tau : frame)
          tau = project_transversal(apply_floor_hv(std::move(tau), step.post, m));
      } else {
        for (TangentHV& tau : frame)
          tau = project_transversal(
              apply_pair_hv(std::move(tau), step.pre, m, step.event.pair));
      }
      s = step.post;
    }
    const std::vector<double> diag = detail::mgs_orthonormalize(frame);
    // Extracting contracting directions cancels vectors that grew by orders
    // of magnitude, and the 1/r rescaling amplifies the off-subspace part of
    // that roundoff. {sum(dh)=sum(dv)=0} is an exact invariant subspace, so
    // snap the frame back onto it after every orthonormalization.
    for (TangentHV& tau : frame) tau = project_reduced(std::move(tau));
    for (std::size_t j = 0; j < d; ++j) {
      const double lg = std::log(diag[j]);
      total_logs[j] += lg;
      batch_logs[batch][j] += lg;
    }
  }

  LyapunovResult res;
  res.n_events = n_events;
  res.mean_return_time = (s.t - initial.t) / static_cast<double>(n_events);

  std::vector<double> exps(d), errs(d);
  for (std::size_t j = 0; j < d; ++j)
    exps[j] = total_logs[j] / static_cast<double>(n_events);
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    std::vector<double> per_batch(kBatches);
    for (std::size_t b = 0; b < kBatches; ++b) {
      const std::uint64_t lo = b * n_events / kBatches;
      const std::uint64_t hi = (b + 1) * n_events / kBatches;
      per_batch[b] = batch_logs[b][j] / static_cast<double>(hi - lo);
      mean += per_batch[b];
    }
    mean /= kBatches;
    double var = 0.0;
    for (double x : per_batch) var += (x - mean) * (x - mean);
    errs[j] = std::sqrt(var / (kBatches * (kBatches - 1.0)));
  }

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return exps[a] > exps[b]; });
  res.exponents_map.resize(d);
  res.exponents_flow.resize(d);
  res.stderrs.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    res.exponents_map[j] = exps[order[j]];
    res.exponents_flow[j] = exps[order[j]] / res.mean_return_time;
    res.stderrs[j] = errs[order[j]];
  }
  for (double e : res.stderrs)
    if (e > stderr_cap) {
      res.flags.push_back("non-convergence");
      break;
    }
  return res;
}

}  // namespace fallingballs
