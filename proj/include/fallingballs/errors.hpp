#pragma once

#include <stdexcept>
#include <string>

namespace fallingballs {

// Machine-readable failure codes. `code_name` strings are part of the CLI
// contract (they appear in diagnostic output and CSV flag columns).
enum class errc {
  dimension_mismatch,
  invalid_mass_vector,
  near_simultaneous,
  degenerate_rest,
  ordering_violated,
  not_in_contact,
  not_approaching,
  zeno_guard_tripped,
  energy_tangency_violated,
  degenerate_velocity,
  orbit_not_found,
  validation,
};

inline const char* code_name(errc c) {
  switch (c) {
    case errc::dimension_mismatch: return "dimension_mismatch";
    case errc::invalid_mass_vector: return "invalid_mass_vector";
    case errc::near_simultaneous: return "near_simultaneous";
    case errc::degenerate_rest: return "degenerate_rest";
    case errc::ordering_violated: return "ordering_violated";
    case errc::not_in_contact: return "not_in_contact";
    case errc::not_approaching: return "not_approaching";
    case errc::zeno_guard_tripped: return "zeno_guard_tripped";
    case errc::energy_tangency_violated: return "energy_tangency_violated";
    case errc::degenerate_velocity: return "degenerate_velocity";
    case errc::orbit_not_found: return "orbit_not_found";
    case errc::validation: return "validation";
  }
  return "unknown";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(code_name(code)) + ": " + what),
        code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) {
  throw error(code, what);
}

}  // namespace fallingballs
