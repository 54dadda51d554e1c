#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fallingballs/orbit.hpp"

using namespace fallingballs;

TEST_CASE("probe locates a linearly stable two-ball orbit", "[orbit]") {
  const MassVector m({1, 2});
  const StableOrbitResult res = stable_orbit_probe(m, 1);
  CHECK(res.period >= 1);
  CHECK(res.symbols.size() == static_cast<std::size_t>(res.period));
  CHECK(res.return_residual < 1e-10);
  CHECK(std::abs(res.moduli[0] - 1.0) < 1e-6);
  CHECK(std::abs(res.moduli[1] - 1.0) < 1e-6);
  CHECK(std::abs(res.moduli[0] * res.moduli[1] - 1.0) < 1e-8);
  const double det = res.monodromy[0] * res.monodromy[3] -
                     res.monodromy[1] * res.monodromy[2];
  CHECK(std::abs(det - 1.0) < 1e-8);
  // The orbit state is a valid boundary representative on the energy shell.
  CHECK_THAT(total_energy(res.orbit_state, m),
             Catch::Matchers::WithinAbs(1.0, 1e-12));
  if (res.contact == 0) {
    CHECK(res.orbit_state.q[0] == 0.0);
    CHECK(res.orbit_state.v[0] > 0.0);
  } else {
    CHECK(res.orbit_state.q[0] == res.orbit_state.q[1]);
    CHECK(res.orbit_state.v[0] < res.orbit_state.v[1]);
  }
}

TEST_CASE("probe is deterministic per seed", "[orbit]") {
  const MassVector m({1, 2});
  const StableOrbitResult a = stable_orbit_probe(m, 2);
  const StableOrbitResult b = stable_orbit_probe(m, 2);
  CHECK(a.period == b.period);
  CHECK(a.orbit_state.v == b.orbit_state.v);
  CHECK(a.moduli == b.moduli);
}

TEST_CASE("probe validates its mass preconditions", "[orbit]") {
  REQUIRE_THROWS_MATCHES(
      stable_orbit_probe(MassVector({2, 1}), 1), error,
      Catch::Matchers::Predicate<error>(
          [](const error& e) { return e.code() == errc::validation; }));
  REQUIRE_THROWS_AS(stable_orbit_probe(MassVector({1, 2, 3}), 1), error);
}
