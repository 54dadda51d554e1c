#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fallingballs/audit.hpp"
#include "fallingballs/dynamics.hpp"
#include "fallingballs/lyapunov.hpp"
#include "fallingballs/orbit.hpp"
#include "fallingballs/scan.hpp"

namespace fallingballs {

// All CSV numbers use 17 significant digits, '.' decimal separator, and no
// locale, so emitted files round-trip doubles exactly and are byte-stable.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Trajectory CSV: event_index,time,symbol,q_1..q_n,v_1..v_n,energy

inline void write_trajectory_header(std::ostream& os, std::size_t n) {
  os << "event_index,time,symbol";
  for (std::size_t i = 1; i <= n; ++i) os << ",q_" << i;
  for (std::size_t i = 1; i <= n; ++i) os << ",v_" << i;
  os << ",energy\n";
}

inline void write_trajectory_row(std::ostream& os, std::uint64_t index,
                                 const PhaseState& s, int symbol,
                                 double energy) {
  os << index << ',' << format_double(s.t) << ',' << symbol;
  for (double qi : s.q) os << ',' << format_double(qi);
  for (double vi : s.v) os << ',' << format_double(vi);
  os << ',' << format_double(energy) << '\n';
}

inline void write_trajectory_csv(std::ostream& os, std::size_t n,
                                 const SimulationResult& sim) {
  write_trajectory_header(os, n);
  for (const EventRecord& r : sim.records) {
    PhaseState s;
    s.t = r.time;
    s.q = r.q;
    s.v = r.v;
    write_trajectory_row(os, r.index, s, r.symbol, r.energy);
  }
}

// ---------------------------------------------------------------------------
// Cone-audit CSV: event_index,time,symbol,Q_before,Q_after,delta_Q,
//                 alpha_or_floor_increment

inline void write_cone_csv(std::ostream& os,
                           const std::vector<ConeAuditRow>& rows) {
  os << "event_index,time,symbol,Q_before,Q_after,delta_Q,"
        "alpha_or_floor_increment\n";
  for (const ConeAuditRow& r : rows) {
    os << r.event_index << ',' << format_double(r.time) << ',' << r.symbol
       << ',' << format_double(r.q_before) << ',' << format_double(r.q_after)
       << ',' << format_double(r.delta_q) << ','
       << format_double(r.alpha_or_floor_increment) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Scan CSV: trial,seed,n,k,mode,symbol_string,sigma_min,sigma_max,
//           sigma_ratio,rank,flag

inline void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows) {
  os << "trial,seed,n,k,mode,symbol_string,sigma_min,sigma_max,sigma_ratio,"
        "rank,flag\n";
  for (const ScanRow& r : rows) {
    os << r.trial << ',' << r.seed << ',' << r.n << ',' << r.k << ','
       << to_string(r.mode) << ',' << r.symbol_string << ','
       << format_double(r.sigma_min) << ',' << format_double(r.sigma_max)
       << ',' << format_double(r.sigma_ratio) << ',' << r.rank << ',' << r.flag
       << '\n';
  }
}

// ---------------------------------------------------------------------------
// Structured (JSON) records.

inline nlohmann::json scan_summary_record(const ScanResult& scan) {
  nlohmann::json arr = nlohmann::json::array();
  for (const ScanSummary& s : scan.summary) {
    nlohmann::json q = nlohmann::json::array();
    for (double x : s.sigma_ratio_quantiles) q.push_back(x);
    arr.push_back({{"n", s.n},
                   {"k", s.k},
                   {"rows", s.rows},
                   {"flagged", s.flagged},
                   {"full_rank", s.full_rank},
                   {"quantile_percents", kScanQuantilePercents},
                   {"sigma_ratio_quantiles", q}});
  }
  return {{"summary", arr}};
}

inline nlohmann::json lyapunov_record(const MassVector& m, std::uint64_t seed,
                                      const LyapunovResult& r) {
  return {{"masses", m.values()},
          {"seed", seed},
          {"n_events", r.n_events},
          {"mean_return_time", r.mean_return_time},
          {"exponents_map", r.exponents_map},
          {"exponents_flow", r.exponents_flow},
          {"stderr", r.stderrs},
          {"flags", r.flags}};
}

inline nlohmann::json oracle_record(std::size_t n, std::uint64_t seed,
                                    std::uint64_t n_events,
                                    double max_residual) {
  return {{"n", n},
          {"seed", seed},
          {"n_events", n_events},
          {"max_residual", max_residual}};
}

inline nlohmann::json orbit_record(const MassVector& m, std::uint64_t seed,
                                   const StableOrbitResult& r) {
  return {{"masses", m.values()},
          {"seed", seed},
          {"period", r.period},
          {"contact", r.contact},
          {"symbols", r.symbols},
          {"orbit_t", r.orbit_state.t},
          {"orbit_q", r.orbit_state.q},
          {"orbit_v", r.orbit_state.v},
          {"return_residual", r.return_residual},
          {"monodromy", r.monodromy},
          {"eigenvalue_moduli", r.moduli}};
}

}  // namespace fallingballs
