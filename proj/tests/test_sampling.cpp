#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "fallingballs/dynamics.hpp"
#include "fallingballs/sampling.hpp"

using namespace fallingballs;
using Catch::Matchers::WithinAbs;

TEST_CASE("split-mix generator matches its reference first output",
          "[rng]") {
  SplitMix64 rng(0);
  CHECK(rng.next() == 0xE220A8397B1DCDAFull);
  CHECK(derive_seed(0, 0) == 0xE220A8397B1DCDAFull);
}

TEST_CASE("uniform draws live in the requested interval", "[rng]") {
  SplitMix64 rng(31);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const double x = rng.uniform(0.1, 1.1);
    REQUIRE(x >= 0.1);
    REQUIRE(x < 1.1);
  }
}

TEST_CASE("sampled states sit exactly on the unit energy shell",
          "[sampling]") {
  for (std::size_t n : {2u, 3u, 4u, 5u}) {
    std::vector<double> raw(n);
    for (std::size_t i = 0; i < n; ++i) raw[i] = double(n - i);
    const MassVector m = MassVector(raw).normalized();
    for (SampleLocus locus : {SampleLocus::interior, SampleLocus::boundary,
                              SampleLocus::singular_double}) {
      if (locus == SampleLocus::singular_double && n == 2) continue;
      for (std::uint64_t seed : {1ull, 77ull, 123456789ull}) {
        const PhaseState s = sample_state(m, seed, locus);
        CHECK_THAT(total_energy(s, m), WithinAbs(1.0, 1e-12));
        CHECK(ordering_ok(s, 0.0));
        CHECK(s.t == 0.0);
      }
    }
  }
}

TEST_CASE("sampling is bit-for-bit deterministic per seed", "[sampling]") {
  const MassVector m({3, 2, 1});
  const PhaseState a = sample_state(m, 99, SampleLocus::boundary);
  const PhaseState b = sample_state(m, 99, SampleLocus::boundary);
  CHECK(a.q == b.q);
  CHECK(a.v == b.v);
  const PhaseState c = sample_state(m, 100, SampleLocus::boundary);
  CHECK(a.q != c.q);
}

TEST_CASE("boundary samples carry one outgoing contact", "[sampling]") {
  const MassVector m({4, 3, 2, 1});
  std::set<int> seen;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    SampleInfo info;
    const PhaseState s =
        sample_state(m, derive_seed(55, seed), SampleLocus::boundary, &info);
    REQUIRE(info.contacts.size() == 1);
    const int c = info.contacts[0];
    seen.insert(c);
    if (c == 0) {
      CHECK(s.q[0] == 0.0);
      CHECK(s.v[0] > 0.0);
    } else {
      CHECK(s.q[c] == s.q[c - 1]);
      CHECK(s.v[c - 1] < s.v[c]);
    }
    // All other gaps stay strictly open.
    for (int g = 0; g < static_cast<int>(m.size()); ++g) {
      if (g == c) continue;
      const double gap = g == 0 ? s.q[0] : s.q[g] - s.q[g - 1];
      CHECK(gap > 0.0);
    }
    // The placed contact is outgoing, so the state leaves the boundary.
    const auto ev = next_event(s, SimPolicy{});
    REQUIRE(ev.has_value());
    CHECK(ev->time > 0.0);
  }
  CHECK(seen.size() == m.size());  // every contact stratum gets visited
}

TEST_CASE("singular-double samples satisfy two independent contacts",
          "[sampling]") {
  SECTION("n=3 forces the floor plus the top pair") {
    const MassVector m({3, 2, 1});
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      SampleInfo info;
      const PhaseState s = sample_state(m, derive_seed(7, seed),
                                        SampleLocus::singular_double, &info);
      REQUIRE(info.contacts == std::vector<int>({0, 2}));
      CHECK(s.q[0] == 0.0);
      CHECK(s.q[1] == s.q[2]);
      CHECK(s.q[1] > 0.0);
      CHECK(s.v[0] > 0.0);
      CHECK(s.v[1] < s.v[2]);
    }
  }
  SECTION("n=4 also admits pair-pair strata") {
    const MassVector m({4, 3, 2, 1});
    std::set<std::pair<int, int>> seen;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      SampleInfo info;
      sample_state(m, derive_seed(8, seed), SampleLocus::singular_double,
                   &info);
      REQUIRE(info.contacts.size() == 2);
      REQUIRE(info.contacts[1] - info.contacts[0] >= 2);
      seen.insert({info.contacts[0], info.contacts[1]});
    }
    CHECK(seen.size() == 3);  // (0,2), (0,3), (1,3)
  }
  SECTION("n=2 has no independent double contact") {
    const MassVector m({2, 1});
    REQUIRE_THROWS_MATCHES(
        sample_state(m, 1, SampleLocus::singular_double), error,
        Catch::Matchers::Predicate<error>(
            [](const error& e) { return e.code() == errc::validation; }));
  }
}

TEST_CASE("simplex mass draws are strictly decreasing and normalized",
          "[sampling][masses]") {
  SplitMix64 rng(314);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = sample_masses_strictly_decreasing(rng, 4);
    REQUIRE(m.has_value());
    CHECK_THAT(m->total(), WithinAbs(1.0, 1e-12));
    for (std::size_t i = 0; i + 1 < m->size(); ++i)
      REQUIRE((*m)[i] - (*m)[i + 1] >= 1e-3);
    CHECK(m->ordering() == MassOrdering::strictly_decreasing);
  }
  SplitMix64 a(5), b(5);
  const auto ma = sample_masses_strictly_decreasing(a, 3);
  const auto mb = sample_masses_strictly_decreasing(b, 3);
  REQUIRE(ma.has_value());
  REQUIRE(mb.has_value());
  CHECK(ma->values() == mb->values());
}

TEST_CASE("mass vector validation and classification", "[masses]") {
  CHECK(MassVector({3, 2, 1}).ordering() == MassOrdering::strictly_decreasing);
  CHECK(MassVector({3, 3, 1}).ordering() == MassOrdering::nonincreasing);
  CHECK(MassVector({2, 2, 2}).ordering() == MassOrdering::equal);
  CHECK(MassVector({1, 2, 3}).ordering() == MassOrdering::unordered);
  CHECK(MassVector({3, 2, 1}).is_nonincreasing());
  CHECK(MassVector({2, 2}).is_equal());
  CHECK_THAT(MassVector({2, 1}).gamma(0), WithinAbs(1.0 / 3.0, 1e-15));
  REQUIRE_THROWS_AS(MassVector({1.0}), error);
  REQUIRE_THROWS_AS(MassVector({1.0, 0.0}), error);
  REQUIRE_THROWS_AS(MassVector({1.0, -2.0}), error);
}

TEST_CASE("rescaling to the energy shell preserves contacts and ratios",
          "[sampling][state]") {
  const MassVector m({2, 1});
  PhaseState s{0.0, {0.0, 0.4}, {0.3, -0.1}};
  const double scale = 1.0 / total_energy(s, m);
  const PhaseState out = rescaled_to_energy(s, m, 1.0);
  CHECK_THAT(total_energy(out, m), WithinAbs(1.0, 1e-12));
  CHECK(out.q[0] == 0.0);
  CHECK_THAT(out.q[1], WithinAbs(scale * 0.4, 1e-15));
  CHECK_THAT(out.v[0], WithinAbs(std::sqrt(scale) * 0.3, 1e-15));
  CHECK_THAT(out.v[1], WithinAbs(std::sqrt(scale) * -0.1, 1e-15));
  REQUIRE_THROWS_AS(
      rescaled_to_energy({0.0, {0.0, 0.0}, {0.0, 0.0}}, m, 1.0), error);
}
