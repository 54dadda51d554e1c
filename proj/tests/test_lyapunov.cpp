#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fallingballs/lyapunov.hpp"

using namespace fallingballs;

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("two-ball spectrum is a symmetric nonzero pair", "[lyapunov]") {
  const MassVector m = MassVector({2, 1}).normalized();
  const LyapunovResult res = lyapunov_spectrum(m, 3, 100000, 5);
  REQUIRE(res.exponents_map.size() == 2);
  REQUIRE(res.stderrs.size() == 2);
  CHECK(res.exponents_map[0] > 0.0);
  CHECK(res.exponents_map[1] < 0.0);
  CHECK(res.exponents_map[0] >= res.exponents_map[1]);
  CHECK(res.mean_return_time > 0.0);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(std::abs(res.exponents_map[j]) > 3.0 * res.stderrs[j]);
    CHECK(res.exponents_flow[j] ==
          res.exponents_map[j] / res.mean_return_time);
  }
  CHECK(std::abs(res.exponents_map[0] + res.exponents_map[1]) <
        0.01 * res.exponents_map[0]);
  CHECK(res.flags.empty());
}

TEST_CASE("three-ball spectrum pairs up and sums to zero", "[lyapunov]") {
  const MassVector m = MassVector({3, 2, 1}).normalized();
  const LyapunovResult res = lyapunov_spectrum(m, 7, 100000, 5);
  REQUIRE(res.exponents_map.size() == 4);
  const double lam_max = max_abs(res.exponents_map);
  double max_err = 0.0;
  for (double e : res.stderrs) max_err = std::max(max_err, e);
  const double pairing_tol = 0.01 * std::max(lam_max, 3.0 * max_err);
  for (std::size_t j = 0; j < 4; ++j)
    CHECK(std::abs(res.exponents_map[j] + res.exponents_map[3 - j]) <
          pairing_tol);
  double sum = 0.0;
  for (double e : res.exponents_map) sum += e;
  CHECK(std::abs(sum) < 0.01 * lam_max);
  for (std::size_t j = 0; j < 4; ++j)
    CHECK(std::abs(res.exponents_map[j]) > 3.0 * res.stderrs[j]);
}

TEST_CASE("equal masses give a numerically vanishing spectrum", "[lyapunov]") {
  const MassVector m({1, 1, 1});
  const LyapunovResult res = lyapunov_spectrum(m, 5, 100000, 5);
  CHECK(max_abs(res.exponents_map) < 1e-3);
}

TEST_CASE("spectrum estimation is deterministic per seed", "[lyapunov]") {
  const MassVector m = MassVector({3, 2, 1}).normalized();
  const LyapunovResult a = lyapunov_spectrum(m, 11, 20000, 5);
  const LyapunovResult b = lyapunov_spectrum(m, 11, 20000, 5);
  CHECK(a.exponents_map == b.exponents_map);
  CHECK(a.stderrs == b.stderrs);
  CHECK(a.mean_return_time == b.mean_return_time);
}

TEST_CASE("exponents are robust to the orthonormalization cadence",
          "[lyapunov]") {
  const MassVector m = MassVector({3, 2, 1}).normalized();
  const LyapunovResult r1 = lyapunov_spectrum(m, 13, 50000, 1);
  const LyapunovResult r5 = lyapunov_spectrum(m, 13, 50000, 5);
  const LyapunovResult r20 = lyapunov_spectrum(m, 13, 50000, 20);
  for (std::size_t j = 0; j < 4; ++j) {
    const double tol =
        2.0 * std::max({r1.stderrs[j], r5.stderrs[j], r20.stderrs[j]});
    CHECK(std::abs(r1.exponents_map[j] - r5.exponents_map[j]) <= tol);
    CHECK(std::abs(r1.exponents_map[j] - r20.exponents_map[j]) <= tol);
  }
}

TEST_CASE("doubling the run moves exponents within their error bars",
          "[lyapunov]") {
  const MassVector m = MassVector({3, 2, 1}).normalized();
  const LyapunovResult a = lyapunov_spectrum(m, 17, 30000, 5);
  const LyapunovResult b = lyapunov_spectrum(m, 17, 60000, 5);
  for (std::size_t j = 0; j < 4; ++j)
    CHECK(std::abs(a.exponents_map[j] - b.exponents_map[j]) <=
          3.0 * std::max(a.stderrs[j], b.stderrs[j]));
}

TEST_CASE("spectrum preconditions are validated", "[lyapunov]") {
  const MassVector m({2, 1});
  REQUIRE_THROWS_AS(lyapunov_spectrum(m, 1, 999, 5), error);
  REQUIRE_THROWS_AS(lyapunov_spectrum(m, 1, 2000, 0), error);
}

TEST_CASE("stderr cap raises the non-convergence flag", "[lyapunov]") {
  const MassVector m = MassVector({3, 2, 1}).normalized();
  const LyapunovResult res =
      lyapunov_spectrum(m, 19, 2000, 5, SimPolicy{}, 1e-12);
  REQUIRE_FALSE(res.flags.empty());
  CHECK(res.flags[0] == "non-convergence");
}
