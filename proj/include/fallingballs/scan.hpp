#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fallingballs/parallel.hpp"
#include "fallingballs/rng.hpp"
#include "fallingballs/transversality.hpp"

namespace fallingballs {

// One (trial, k) entry of a mass-scan campaign. `flag` is empty on success
// and carries the failure code name otherwise; flagged rows keep their
// numeric fields zeroed.
struct ScanRow {
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;  // per-trial seed, derive_seed(master_seed, trial)
  std::size_t n = 0;
  std::size_t k = 0;
  FloorDerivativeMode mode = FloorDerivativeMode::full;
  std::string symbol_string;  // collision symbols 1..k joined with '-'
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double sigma_ratio = 0.0;
  std::size_t rank = 0;
  std::string flag;
};

inline constexpr std::array<int, 5> kScanQuantilePercents{1, 5, 50, 95, 99};

// Per-k aggregate over the unflagged rows of a scan.
struct ScanSummary {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t rows = 0;       // unflagged rows aggregated here
  std::size_t flagged = 0;    // flagged rows for this k
  std::size_t full_rank = 0;  // unflagged rows with rank == n-1
  // Nearest-rank quantiles of sigma_ratio at kScanQuantilePercents; NaN when
  // no unflagged rows exist.
  std::array<double, 5> sigma_ratio_quantiles{};
};

struct ScanResult {
  std::vector<ScanRow> rows;  // trial-major, k in k_list order within a trial
  std::vector<ScanSummary> summary;  // one entry per k, in k_list order
};

namespace detail {

inline std::string join_symbols(const SymbolicSequence& seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.symbols.size(); ++i) {
    if (i) out.push_back('-');
    out += std::to_string(seq.symbols[i]);
  }
  return out;
}

// Nearest-rank quantile of an ascending-sorted sample: the smallest value
// whose rank is at least ceil(p/100 * N).
inline double nearest_rank_quantile(const std::vector<double>& sorted,
                                    int percent) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t n = sorted.size();
  std::size_t rank = static_cast<std::size_t>(
      std::ceil(static_cast<double>(percent) * static_cast<double>(n) / 100.0));
  if (rank == 0) rank = 1;
  if (rank > n) rank = n;
  return sorted[rank - 1];
}

// Flattens per-trial row groups (each k_list-ordered) and builds the per-k
// sigma_ratio quantile summary over unflagged rows.
inline ScanResult assemble_scan(std::vector<std::vector<ScanRow>> per_trial,
                                std::size_t n,
                                const std::vector<std::size_t>& k_list,
                                std::size_t trials) {
  ScanResult out;
  out.rows.reserve(trials * k_list.size());
  for (std::vector<ScanRow>& rows : per_trial)
    for (ScanRow& row : rows) out.rows.push_back(std::move(row));

  out.summary.reserve(k_list.size());
  for (std::size_t ki = 0; ki < k_list.size(); ++ki) {
    ScanSummary s;
    s.n = n;
    s.k = k_list[ki];
    std::vector<double> ratios;
    ratios.reserve(trials);
    for (std::size_t t = 0; t < trials; ++t) {
      const ScanRow& row = out.rows[t * k_list.size() + ki];
      if (!row.flag.empty()) {
        ++s.flagged;
        continue;
      }
      ++s.rows;
      if (row.rank == n - 1) ++s.full_rank;
      ratios.push_back(row.sigma_ratio);
    }
    std::sort(ratios.begin(), ratios.end());
    for (std::size_t qi = 0; qi < kScanQuantilePercents.size(); ++qi)
      s.sigma_ratio_quantiles[qi] =
          nearest_rank_quantile(ratios, kScanQuantilePercents[qi]);
    out.summary.push_back(std::move(s));
  }
  return out;
}

inline void validate_scan_args(std::size_t n, const std::vector<std::size_t>& k_list,
                               std::size_t trials) {
  if (n < 2) fail(errc::validation, "scan: need at least two balls");
  if (trials == 0) fail(errc::validation, "scan: trials must be >= 1");
  if (k_list.empty()) fail(errc::validation, "scan: k_list is empty");
  for (std::size_t k : k_list)
    if (k == 0) fail(errc::validation, "scan: k values must be positive");
}

}  // namespace detail

// Monte-Carlo transversality campaign. Each trial t derives its seed as
// derive_seed(master_seed, t), draws a strictly decreasing mass vector from
// SplitMix64(seed) and a sampled state on `locus` from derive_seed(seed, 0),
// then evaluates the candle-Jacobian rank report for every k in k_list.
// Per-trial failures become flagged rows and never abort the scan; the
// summary aggregates sigma_ratio quantiles per k over unflagged rows.
// Trials are independent; the table is assembled in trial order, so output
// is byte-identical for any `jobs` value.
inline ScanResult mass_scan(std::size_t n, const std::vector<std::size_t>& k_list,
                            std::size_t trials, std::uint64_t master_seed,
                            FloorDerivativeMode mode,
                            SampleLocus locus = SampleLocus::boundary,
                            const SimPolicy& policy = {}, unsigned jobs = 1,
                            double tol_factor = 1e-9) {
  detail::validate_scan_args(n, k_list, trials);

  auto run_trial = [&](std::size_t trial) -> std::vector<ScanRow> {
    const std::uint64_t seed = derive_seed(master_seed, trial);
    ScanRow base;
    base.trial = trial;
    base.seed = seed;
    base.n = n;
    base.mode = mode;

    SplitMix64 rng(seed);
    std::optional<MassVector> m = sample_masses_strictly_decreasing(rng, n);
    std::optional<PhaseState> state;
    std::string trial_flag;
    if (!m) {
      trial_flag = "mass_sampling_exhausted";
    } else {
      try {
        state = sample_state(*m, derive_seed(seed, 0), locus);
      } catch (const error& e) {
        trial_flag = code_name(e.code());
      }
    }

    std::vector<ScanRow> rows;
    rows.reserve(k_list.size());
    for (std::size_t k : k_list) {
      ScanRow row = base;
      row.k = k;
      if (!trial_flag.empty()) {
        row.flag = trial_flag;
      } else {
        try {
          const CandleJacobian jac = candle_jacobian(*state, *m, k, mode, policy);
          const RankReport rep = rank_report(jac.matrix, tol_factor);
          row.symbol_string = detail::join_symbols(jac.symbols);
          row.sigma_min = rep.sigma_min;
          row.sigma_max = rep.sigma_max;
          row.sigma_ratio = rep.sigma_ratio;
          row.rank = rep.rank;
        } catch (const error& e) {
          row.flag = code_name(e.code());
        }
      }
      rows.push_back(std::move(row));
    }
    return rows;
  };

  return detail::assemble_scan(parallel_map_ordered(trials, jobs, run_trial), n,
                               k_list, trials);
}

// Fixed-mass transversality campaign seeded on the double-contact strata:
// trial t probes `m` from sample_state(derive_seed(master_seed, t),
// SingularDouble) for every k in k_list. Same row schema, summary, and
// jobs-independence guarantees as mass_scan.
inline ScanResult singular_scan(const MassVector& m,
                                const std::vector<std::size_t>& k_list,
                                std::size_t trials, std::uint64_t master_seed,
                                FloorDerivativeMode mode,
                                const SimPolicy& policy = {}, unsigned jobs = 1,
                                double tol_factor = 1e-9) {
  const std::size_t n = m.size();
  detail::validate_scan_args(n, k_list, trials);

  auto run_trial = [&](std::size_t trial) -> std::vector<ScanRow> {
    const std::uint64_t seed = derive_seed(master_seed, trial);
    std::vector<ScanRow> rows;
    rows.reserve(k_list.size());
    for (std::size_t k : k_list) {
      ScanRow row;
      row.trial = trial;
      row.seed = seed;
      row.n = n;
      row.k = k;
      row.mode = mode;
      try {
        const SingularRankResult res =
            singular_rank_test(m, seed, k, mode, policy, tol_factor);
        row.symbol_string = detail::join_symbols(res.jacobian.symbols);
        row.sigma_min = res.report.sigma_min;
        row.sigma_max = res.report.sigma_max;
        row.sigma_ratio = res.report.sigma_ratio;
        row.rank = res.report.rank;
      } catch (const error& e) {
        row.flag = code_name(e.code());
      }
      rows.push_back(std::move(row));
    }
    return rows;
  };

  return detail::assemble_scan(parallel_map_ordered(trials, jobs, run_trial), n,
                               k_list, trials);
}

}  // namespace fallingballs
