#pragma once

#include <CLI11.hpp>

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "fallingballs/format.hpp"
#include "fallingballs/parallel.hpp"
#include "fallingballs/sampling.hpp"
#include "fallingballs/scan.hpp"

namespace fallingballs {

inline constexpr const char* kToolName = "fallingballs";
inline constexpr const char* kToolVersion = "0.1.0";

// Effective run configuration. Defaults < config-file keys < command-line
// flags; the manifest records the effective values. Fields mirror the long
// flag names.
struct RunConfig {
  std::string subcommand;
  std::vector<double> masses;
  bool normalize = false;
  std::uint64_t seed = 0;
  std::uint64_t events = 1000;
  std::vector<std::size_t> k_list{5};
  std::size_t trials = 1;
  std::string mode = "full";  // full | reflect-only
  double tol = 1e-9;          // relative SVD rank threshold
  double eps_t = 1e-12;       // event-time coincidence scale
  double eps_q = 1e-10;       // position coincidence tolerance
  std::uint64_t zeno_max = 1000000;
  double zeno_window = 1.0;
  bool resolve_ties = false;  // resolve near-simultaneous events vs abort
  unsigned jobs = 1;
  std::size_t n = 0;          // ball count for mass-scan
  std::string locus;          // empty = per-subcommand default
  std::size_t vectors = 10;   // probe vectors for qform-audit
  std::string out;            // empty = stdout, no manifest
};

namespace detail {

inline SimPolicy policy_of(const RunConfig& cfg) {
  SimPolicy p;
  p.eps_t_scale = cfg.eps_t;
  p.eps_q = cfg.eps_q;
  p.resolve_near_simultaneous = cfg.resolve_ties;
  p.zeno_max = cfg.zeno_max;
  p.zeno_window = cfg.zeno_window;
  return p;
}

inline MassVector masses_of(const RunConfig& cfg) {
  if (cfg.masses.empty())
    fail(errc::validation, "this subcommand requires --masses");
  const MassVector m(cfg.masses);
  return cfg.normalize ? m.normalized() : m;
}

inline SampleLocus locus_of(const RunConfig& cfg, SampleLocus fallback) {
  if (cfg.locus.empty()) return fallback;
  if (cfg.locus == "interior") return SampleLocus::interior;
  if (cfg.locus == "boundary") return SampleLocus::boundary;
  if (cfg.locus == "singular-double") return SampleLocus::singular_double;
  fail(errc::validation, "unknown locus: " + cfg.locus);
}

inline void validate_common(const RunConfig& cfg) {
  if (cfg.events < 1) fail(errc::validation, "--events must be >= 1");
  if (cfg.trials < 1) fail(errc::validation, "--trials must be >= 1");
  if (cfg.jobs < 1) fail(errc::validation, "--jobs must be >= 1");
  if (!(cfg.tol > 0.0)) fail(errc::validation, "--tol must be positive");
  if (!(cfg.eps_t > 0.0)) fail(errc::validation, "--eps-t must be positive");
  if (!(cfg.eps_q > 0.0)) fail(errc::validation, "--eps-q must be positive");
  if (cfg.zeno_max < 1) fail(errc::validation, "--zeno-max must be >= 1");
  if (!(cfg.zeno_window > 0.0))
    fail(errc::validation, "--zeno-window must be positive");
  if (cfg.vectors < 1) fail(errc::validation, "--vectors must be >= 1");
  if (!cfg.k_list.empty())
    for (std::size_t k : cfg.k_list)
      if (k < 1) fail(errc::validation, "--k entries must be >= 1");
}

inline nlohmann::json config_echo(const RunConfig& cfg) {
  return {{"subcommand", cfg.subcommand},
          {"masses", cfg.masses},
          {"normalize", cfg.normalize},
          {"seed", cfg.seed},
          {"events", cfg.events},
          {"k", cfg.k_list},
          {"trials", cfg.trials},
          {"mode", cfg.mode},
          {"tol", cfg.tol},
          {"eps-t", cfg.eps_t},
          {"eps-q", cfg.eps_q},
          {"zeno-max", cfg.zeno_max},
          {"zeno-window", cfg.zeno_window},
          {"resolve-ties", cfg.resolve_ties},
          {"jobs", cfg.jobs},
          {"n", cfg.n},
          {"locus", cfg.locus},
          {"vectors", cfg.vectors},
          {"out", cfg.out}};
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream ofs(path, std::ios::binary);
  if (!ofs) fail(errc::validation, "cannot open output file: " + path);
  ofs << content;
  ofs.flush();
  if (!ofs) fail(errc::validation, "write failed: " + path);
}

// The manifest records the effective configuration and timing next to each
// emitted file. Wall time varies between runs by nature, so manifests are
// exempt from the byte-identity guarantee that covers all data outputs.
inline void write_manifest(const RunConfig& cfg, double wall_seconds) {
  if (cfg.out.empty()) return;
  const nlohmann::json manifest = {{"tool", kToolName},
                                   {"version", kToolVersion},
                                   {"subcommand", cfg.subcommand},
                                   {"config", config_echo(cfg)},
                                   {"wall_time_s", wall_seconds}};
  write_text_file(cfg.out + ".manifest.json", manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Subcommand bodies. Each writes its primary artifact to cfg.out (stdout when
// empty) and a short human-readable summary line to `status`.

inline void cmd_simulate(const RunConfig& cfg, std::ostream& data,
                         std::ostream& status) {
  const MassVector m = masses_of(cfg);
  const SimPolicy policy = policy_of(cfg);
  const PhaseState s0 =
      sample_state(m, cfg.seed, locus_of(cfg, SampleLocus::interior));
  write_trajectory_header(data, m.size());
  const PhaseState last = simulate_stream(
      s0, m, cfg.events,
      [&](std::uint64_t k, const PhaseState& s, int symbol) {
        write_trajectory_row(data, k, s, symbol, total_energy(s, m));
      },
      policy);
  status << "simulate: events=" << cfg.events
         << " final_t=" << format_double(last.t)
         << " energy=" << format_double(total_energy(last, m)) << "\n";
}

inline void cmd_lyapunov(const RunConfig& cfg, std::ostream& data,
                         std::ostream& status) {
  const MassVector m = masses_of(cfg);
  const SimPolicy policy = policy_of(cfg);
  const std::vector<std::string> lines = parallel_map_ordered(
      cfg.trials, cfg.jobs, [&](std::size_t job) -> std::string {
        const std::uint64_t seed = derive_seed(cfg.seed, job);
        const LyapunovResult r =
            lyapunov_spectrum(m, seed, cfg.events, 10, policy);
        return lyapunov_record(m, seed, r).dump() + "\n";
      });
  for (const std::string& line : lines) data << line;
  status << "lyapunov: jobs=" << cfg.trials << " events=" << cfg.events
         << "\n";
}

inline void cmd_qform_audit(const RunConfig& cfg, std::ostream& data,
                            std::ostream& status) {
  const MassVector m = masses_of(cfg);
  if (!m.is_nonincreasing())
    fail(errc::validation,
         "qform-audit requires nonincreasing masses (cone condition)");
  const SimPolicy policy = policy_of(cfg);
  const PhaseState s0 =
      sample_state(m, cfg.seed, locus_of(cfg, SampleLocus::interior));
  const ConeAuditResult res = cone_audit(s0, m, cfg.events, cfg.vectors,
                                         derive_seed(cfg.seed, 1), policy);
  write_cone_csv(data, res.rows);
  status << "qform-audit: collisions=" << res.n_collisions
         << " floor=" << res.n_floor_collisions
         << " min_delta_q=" << format_double(res.min_delta_q)
         << " max_floor_increment_mismatch="
         << format_double(res.max_floor_increment_mismatch) << "\n";
}

inline void emit_scan(const RunConfig& cfg, const ScanResult& scan,
                      std::ostream& data, std::ostream& status,
                      const char* name) {
  write_scan_csv(data, scan.rows);
  if (!cfg.out.empty())
    write_text_file(cfg.out + ".summary.json",
                    scan_summary_record(scan).dump(2) + "\n");
  for (const ScanSummary& s : scan.summary)
    status << name << ": n=" << s.n << " k=" << s.k << " rows=" << s.rows
           << " flagged=" << s.flagged << " full_rank=" << s.full_rank
           << "\n";
}

inline void cmd_rank_test(const RunConfig& cfg, std::ostream& data,
                          std::ostream& status) {
  const MassVector m = masses_of(cfg);
  const ScanResult scan =
      singular_scan(m, cfg.k_list, cfg.trials, cfg.seed,
                    parse_floor_mode(cfg.mode), policy_of(cfg), cfg.jobs,
                    cfg.tol);
  emit_scan(cfg, scan, data, status, "rank-test");
}

inline void cmd_mass_scan(const RunConfig& cfg, std::ostream& data,
                          std::ostream& status) {
  std::size_t n = cfg.n;
  if (n == 0 && !cfg.masses.empty()) n = cfg.masses.size();
  if (n < 2)
    fail(errc::validation, "mass-scan requires --n (or --masses) with n >= 2");
  const ScanResult scan =
      mass_scan(n, cfg.k_list, cfg.trials, cfg.seed,
                parse_floor_mode(cfg.mode),
                locus_of(cfg, SampleLocus::boundary), policy_of(cfg), cfg.jobs,
                cfg.tol);
  emit_scan(cfg, scan, data, status, "mass-scan");
}

inline void cmd_oracle(const RunConfig& cfg, std::ostream& data,
                       std::ostream& status) {
  const MassVector m = masses_of(cfg);
  if (!m.is_equal())
    fail(errc::validation, "oracle requires equal masses (limiting system)");
  const SimPolicy policy = policy_of(cfg);
  const PhaseState s0 =
      sample_state(m, cfg.seed, locus_of(cfg, SampleLocus::interior));
  const double residual = equal_mass_oracle(s0, cfg.events, policy);
  data << oracle_record(m.size(), cfg.seed, cfg.events, residual).dump(2)
       << "\n";
  status << "oracle: n=" << m.size() << " events=" << cfg.events
         << " max_residual=" << format_double(residual) << "\n";
}

inline void cmd_stable_orbit(const RunConfig& cfg, std::ostream& data,
                             std::ostream& status) {
  const MassVector m = masses_of(cfg);
  const StableOrbitResult r =
      stable_orbit_probe(m, cfg.seed, policy_of(cfg));
  data << orbit_record(m, cfg.seed, r).dump(2) << "\n";
  status << "stable-orbit: period=" << r.period
         << " residual=" << format_double(r.return_residual)
         << " moduli=" << format_double(r.moduli[0]) << ","
         << format_double(r.moduli[1]) << "\n";
}

}  // namespace detail

// Registers all options on `app` (shared across subcommands via
// fallthrough, which keeps config-file keys flat) and the seven
// subcommands.
inline void build_app(CLI::App& app, RunConfig& cfg) {
  app.description("event-driven simulator and verification suite for the "
                  "falling-ball system");
  app.set_version_flag("--version", kToolVersion);
  app.set_config("--config", "",
                 "flat key=value config file; command-line flags win")
      ->envname("FALLINGBALLS_CONFIG");

  app.add_option("--masses", cfg.masses,
                 "comma-separated mass values, outermost ball first")
      ->delimiter(',');
  app.add_flag("--normalize", cfg.normalize, "rescale masses to sum 1");
  app.add_option("--seed", cfg.seed, "master seed for all randomness");
  app.add_option("--events", cfg.events, "number of collision events");
  app.add_option("--k", cfg.k_list,
                 "comma-separated collision counts for rank probes")
      ->delimiter(',');
  app.add_option("--trials", cfg.trials, "independent trials / jobs to run");
  app.add_option("--mode", cfg.mode, "floor derivative: full | reflect-only")
      ->check(CLI::IsMember({"full", "reflect-only", "reflect_only"}));
  app.add_option("--tol", cfg.tol, "relative SVD threshold for rank counts");
  app.add_option("--eps-t", cfg.eps_t, "event-time coincidence scale");
  app.add_option("--eps-q", cfg.eps_q, "position coincidence tolerance");
  app.add_option("--zeno-max", cfg.zeno_max, "max events per Zeno window");
  app.add_option("--zeno-window", cfg.zeno_window, "Zeno window length");
  app.add_flag("--resolve-ties", cfg.resolve_ties,
               "resolve near-simultaneous events instead of aborting");
  app.add_option("--jobs", cfg.jobs, "max concurrent trials");
  app.add_option("--n", cfg.n, "ball count for mass-scan");
  app.add_option("--locus", cfg.locus,
                 "sampling locus: interior | boundary | singular-double")
      ->check(CLI::IsMember({"interior", "boundary", "singular-double"}));
  app.add_option("--vectors", cfg.vectors,
                 "probe vectors for qform-audit");
  app.add_option("--out", cfg.out, "output file (stdout when omitted)");

  const std::pair<const char*, const char*> subs[] = {
      {"simulate", "run a trajectory and emit per-event CSV"},
      {"lyapunov", "estimate the Lyapunov spectrum, one JSON line per trial"},
      {"qform-audit", "record the Q-form jump at every collision as CSV"},
      {"rank-test", "candle-frame rank probes at singular double collisions"},
      {"oracle", "equal-mass closed-form residual check (JSON)"},
      {"mass-scan", "rank campaign over random mass vectors (CSV + summary)"},
      {"stable-orbit", "locate a stable periodic orbit for n=2 (JSON)"},
  };
  for (const auto& [name, desc] : subs) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->fallthrough();
  }
  app.require_subcommand(1);
}

// Dispatches a validated config. Throws fallingballs::error on failure.
inline void run(const RunConfig& cfg) {
  detail::validate_common(cfg);
  const auto t0 = std::chrono::steady_clock::now();

  const bool to_file = !cfg.out.empty();
  std::ofstream file;
  if (to_file) {
    file.open(cfg.out, std::ios::binary);
    if (!file) fail(errc::validation, "cannot open output file: " + cfg.out);
  }
  std::ostream& data = to_file ? static_cast<std::ostream&>(file) : std::cout;

  if (cfg.subcommand == "simulate")
    detail::cmd_simulate(cfg, data, std::cout);
  else if (cfg.subcommand == "lyapunov")
    detail::cmd_lyapunov(cfg, data, std::cout);
  else if (cfg.subcommand == "qform-audit")
    detail::cmd_qform_audit(cfg, data, std::cout);
  else if (cfg.subcommand == "rank-test")
    detail::cmd_rank_test(cfg, data, std::cout);
  else if (cfg.subcommand == "oracle")
    detail::cmd_oracle(cfg, data, std::cout);
  else if (cfg.subcommand == "mass-scan")
    detail::cmd_mass_scan(cfg, data, std::cout);
  else if (cfg.subcommand == "stable-orbit")
    detail::cmd_stable_orbit(cfg, data, std::cout);
  else
    fail(errc::validation, "unknown subcommand: " + cfg.subcommand);

  if (to_file) {
    file.flush();
    if (!file) fail(errc::validation, "write failed: " + cfg.out);
    file.close();
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  detail::write_manifest(cfg, wall);
}

// Maps failure codes to the exit-code contract: 2 for configuration and
// precondition problems, 3 for runtime numerical guards.
inline int exit_code_for(errc c) {
  switch (c) {
    case errc::validation:
    case errc::invalid_mass_vector:
    case errc::dimension_mismatch:
    case errc::not_in_contact:
    case errc::not_approaching:
      return 2;
    default:
      return 3;
  }
}

inline int run_cli(int argc, const char* const* argv) {
  RunConfig cfg;
  CLI::App app{kToolName};
  build_app(app, cfg);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    std::cout << kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << nlohmann::json(
                     {{"error", "validation"}, {"message", e.what()}})
                     .dump()
              << "\n";
    return 2;
  }
  for (const char* name :
       {"simulate", "lyapunov", "qform-audit", "rank-test", "oracle",
        "mass-scan", "stable-orbit"})
    if (app.got_subcommand(name)) cfg.subcommand = name;
  try {
    run(cfg);
  } catch (const error& e) {
    std::cerr << nlohmann::json({{"error", code_name(e.code())},
                                 {"message", e.what()}})
                     .dump()
              << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json({{"error", "internal"}, {"message", e.what()}})
                     .dump()
              << "\n";
    return 1;
  }
  return 0;
}

}  // namespace fallingballs
