#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fallingballs/audit.hpp"
#include "fallingballs/sampling.hpp"

using namespace fallingballs;

TEST_CASE("cone audit certifies Q-monotonicity for nonincreasing masses",
          "[audit][cone]") {
  const MassVector m = MassVector({3, 2, 1}).normalized();
  const PhaseState s0 = sample_state(m, 11, SampleLocus::interior);
  const ConeAuditResult res = cone_audit(s0, m, 2000, 10, 91);
  REQUIRE(res.rows.size() == 2000);
  REQUIRE(res.n_collisions == 2000);
  CHECK(res.n_floor_collisions > 0);
  CHECK(res.n_floor_collisions < 2000);
  CHECK(res.min_delta_q >= -1e-12);
  CHECK(res.max_floor_increment_mismatch < 1e-10);
  double prev_time = s0.t;
  for (const ConeAuditRow& row : res.rows) {
    CHECK(row.time > prev_time);
    prev_time = row.time;
    CHECK(row.symbol >= 0);
    CHECK(row.symbol < 3);
    CHECK(row.delta_q == row.q_after - row.q_before);
    CHECK(row.delta_q >= -1e-12);
    // Strictly decreasing masses: pair alpha > 0; floor prediction >= 0.
    CHECK(row.alpha_or_floor_increment >= 0.0);
    if (row.symbol != 0) CHECK(row.alpha_or_floor_increment > 0.0);
  }
}

TEST_CASE("cone audit is deterministic per seed", "[audit][cone]") {
  const MassVector m = MassVector({3, 2, 1}).normalized();
  const PhaseState s0 = sample_state(m, 4, SampleLocus::interior);
  const ConeAuditResult a = cone_audit(s0, m, 200, 3, 5);
  const ConeAuditResult b = cone_audit(s0, m, 200, 3, 5);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].q_before == b.rows[i].q_before);
    CHECK(a.rows[i].q_after == b.rows[i].q_after);
  }
  CHECK(a.min_delta_q == b.min_delta_q);
}

TEST_CASE("equal masses yield Q jumps at pure summation roundoff",
          "[audit][cone]") {
  // The equal-mass pair map is an exact slot swap; Q changes only through
  // the re-ordered floating-point summation, i.e. by a few ulp.
  const MassVector m({1, 1, 1});
  const PhaseState s0 = sample_state(m, 6, SampleLocus::interior);
  const ConeAuditResult res = cone_audit(s0, m, 1000, 5, 17);
  CHECK(res.min_delta_q >= -1e-15);
  bool saw_pair = false;
  for (const ConeAuditRow& row : res.rows) {
    if (row.symbol != 0) {
      saw_pair = true;
      CHECK(std::abs(row.delta_q) <= 1e-15);
      CHECK(row.alpha_or_floor_increment == 0.0);
    } else {
      CHECK(row.delta_q >= 0.0);
    }
  }
  CHECK(saw_pair);
}

TEST_CASE("mass inversions produce observable cone violations",
          "[audit][cone]") {
  // Lighter below heavier: alpha < 0 at approaching pair collisions, so the
  // cone condition must fail somewhere along a generic trajectory.
  const MassVector m = MassVector({1, 2, 3}).normalized();
  const PhaseState s0 = sample_state(m, 9, SampleLocus::interior);
  const ConeAuditResult res = cone_audit(s0, m, 500, 10, 33);
  CHECK(res.min_delta_q < -1e-12);
}

TEST_CASE("symplectic product and dh-sum drift stay at roundoff over 1000 "
          "events",
          "[audit][symplectic]") {
  const MassVector m = MassVector({3, 2, 1}).normalized();
  const PhaseState s0 = sample_state(m, 13, SampleLocus::interior);
  const SymplecticDriftReport rep = symplectic_drift_audit(s0, m, 1000, 77);
  REQUIRE(rep.n_events == 1000);
  CHECK(rep.omega_drift < 1e-9);
  CHECK(rep.max_dh_sum < 1e-12);
  CHECK(rep.max_dv_sum < 1e-12);

  const SymplecticDriftReport rep2 = symplectic_drift_audit(s0, m, 1000, 77);
  CHECK(rep.omega_drift == rep2.omega_drift);
  CHECK(rep.max_dh_sum == rep2.max_dh_sum);
}
