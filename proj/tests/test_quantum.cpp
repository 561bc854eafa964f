#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "cosmoqm/quantum.hpp"

using namespace cosmoqm;
using Catch::Approx;
using namespace std::complex_literals;

namespace {

ObserverState random_state(RngStream& rng, std::size_t K) {
  std::vector<Amplitude> amps;
  for (std::size_t k = 0; k < K; ++k) amps.emplace_back(rng.uniform() - 0.5, rng.uniform() - 0.5);
  return make_state(amps);
}

double norm2(const ObserverState& s) {
  double acc = 0.0;
  for (auto z : s.amplitudes()) acc += std::norm(z);
  return acc;
}

}  // namespace

TEST_CASE("make_state normalizes", "[quantum][make_state]") {
  const auto e1 = make_state({1.0, 0.0});
  CHECK(e1[0] == Amplitude(1.0, 0.0));
  CHECK(e1[1] == Amplitude(0.0, 0.0));
  CHECK_FALSE(e1.was_rescaled());

  const auto plus = make_state({1.0, 1.0});
  CHECK(plus[0].real() == Approx(std::numbers::sqrt2 / 2).epsilon(1e-15));
  CHECK(plus.was_rescaled());
  CHECK(born_probabilities(plus)[0] == Approx(0.5).epsilon(1e-15));

  const auto s = make_state({3.0, 4.0i});
  CHECK(s[0].real() == Approx(0.6).epsilon(1e-15));
  CHECK(s[1].imag() == Approx(0.8).epsilon(1e-15));
  const auto p = born_probabilities(s);
  CHECK(p[0] == Approx(0.36).epsilon(1e-15));
  CHECK(p[1] == Approx(0.64).epsilon(1e-15));
}

TEST_CASE("make_state errors", "[quantum][make_state]") {
  try {
    make_state({0.0, 0.0});
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroVector);
  }
  try {
    make_state({1.0});
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionTooSmall);
  }
}

TEST_CASE("normalization holds for random states", "[quantum][property]") {
  RngStream rng(2024);
  for (int i = 0; i < 500; ++i) {
    const auto s = random_state(rng, 2 + i % 6);
    REQUIRE(std::abs(norm2(s) - 1.0) <= kNormalizationTolerance);
    double total = 0.0;
    for (double p : born_probabilities(s).probabilities) total += p;
    REQUIRE(std::abs(total - 1.0) <= 1e-12);
    const auto c = collapse(s, i % s.dimension());
    REQUIRE(norm2(c) == 1.0);
  }
}

TEST_CASE("sampling degenerate states", "[quantum][sample]") {
  const auto e1 = make_state({1.0, 0.0});
  const auto e2 = make_state({0.0, 1.0});
  for (std::uint64_t seed : {0ULL, 1ULL, 99ULL, 0xffffffffffffffffULL}) {
    RngStream rng(seed);
    for (int i = 0; i < 1000; ++i) {
      REQUIRE(sample_outcome(e1, rng) == 0);
      REQUIRE(sample_outcome(e2, rng) == 1);
    }
  }
  // u at the top of [0,1) never picks a zero-probability trailing outcome
  const OutcomeSampler sampler(make_state({1.0, 1.0, 0.0}));
  CHECK(sampler.draw(std::nextafter(1.0, 0.0)) == 1);
  CHECK(sampler.draw(0.0) == 0);
}

TEST_CASE("sampling frequencies follow the Born rule", "[quantum][sample]") {
  SECTION("equal superposition, 1e5 draws") {
    RngStream rng(12345);
    const auto s = make_state({1.0, 1.0});
    int ones = 0;
    for (int i = 0; i < 100000; ++i) ones += sample_outcome(s, rng) == 0;
    CHECK(std::abs(ones / 1e5 - 0.5) <= 0.005);
  }
  SECTION("K = 4, 1e6 draws, within 4 standard errors per outcome") {
    const auto s = make_state({0.1, 0.5i, Amplitude(0.3, -0.3), 0.7});
    const auto p = born_probabilities(s);
    const OutcomeSampler sampler(s);
    RngStream rng(777);
    std::vector<int> counts(4, 0);
    const int n = 1000000;
    for (int i = 0; i < n; ++i) ++counts[sampler(rng)];
    for (std::size_t k = 0; k < 4; ++k) {
      const double se = std::sqrt(p[k] * (1 - p[k]) / n);
      CHECK(std::abs(counts[k] / double(n) - p[k]) <= 4 * se);
    }
  }
}

TEST_CASE("collapse", "[quantum][collapse]") {
  const auto plus = make_state({1.0, 1.0});
  const auto c0 = collapse(plus, 0);
  CHECK(c0[0] == Amplitude(1.0, 0.0));
  CHECK(c0[1] == Amplitude(0.0, 0.0));

  const auto c1 = collapse(make_state({3.0, 4.0i}), 1);
  CHECK(c1[0] == Amplitude(0.0, 0.0));
  CHECK(c1[1] == Amplitude(1.0, 0.0));

  const auto twice = collapse(c1, 1);
  CHECK(std::equal(twice.amplitudes().begin(), twice.amplitudes().end(), c1.amplitudes().begin()));

  try {
    collapse(make_state({1.0, 0.0}), 1);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ImpossibleOutcome);
  }
  CHECK_THROWS_AS(collapse(plus, 2), Error);
}

TEST_CASE("indistinguishable", "[quantum][indistinguishable]") {
  RngStream rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto a = random_state(rng, 3);
    const auto b = random_state(rng, 3);
    const double theta = 6.283 * rng.uniform();
    std::vector<Amplitude> rotated;
    for (auto z : a.amplitudes()) rotated.push_back(std::polar(1.0, theta) * z);
    const auto a_phase = make_state(rotated);

    REQUIRE(indistinguishable(a, a));
    REQUIRE(indistinguishable(a, a_phase));
    REQUIRE(indistinguishable(a_phase, a));
    REQUIRE(indistinguishable(a, b, 0.3) == indistinguishable(b, a, 0.3));
  }
  CHECK_FALSE(indistinguishable(make_state({1.0, 0.0}), make_state({0.0, 1.0}), 0.5));
  CHECK(infidelity(make_state({1.0, 0.0}), make_state({0.0, 1.0})) == 1.0);

  try {
    indistinguishable(make_state({1.0, 0.0}), make_state({1.0, 0.0, 0.0}));
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("indistinguishability over a time window", "[quantum][indistinguishable]") {
  const auto s = make_state({1.0, 1.0i});
  const auto u = make_state({1.0, -1.0i});
  std::vector<TimedState> a{{0.0, s}, {1.0, s}, {2.0, s}, {3.0, u}};
  std::vector<TimedState> b{{0.0, s}, {1.0, s}, {2.0, s}, {3.0, s}};
  CHECK(indistinguishable_on_window(a, b, 0.0, 2.0));
  CHECK_FALSE(indistinguishable_on_window(a, b, 0.0, 3.0));
  std::vector<TimedState> shifted{{0.5, s}, {1.0, s}, {2.0, s}};
  CHECK_THROWS_AS(indistinguishable_on_window(a, shifted, 0.0, 2.0), Error);
}
