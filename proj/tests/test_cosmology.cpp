#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "cosmoqm/cosmology.hpp"
#include "oracles.hpp"

using namespace cosmoqm;
using Catch::Approx;

namespace {

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::ConfigInvalid;
}

}  // namespace

TEST_CASE("build_model derives curvature from the sum rule", "[cosmology][build_model]") {
  const auto eds = build_model(1, 1, 0, 0, 1);
  CHECK(eds.omega_k() == 0.0);
  CHECK(eds.curvature_sign() == 0);

  const auto open = build_model(1, 0.3, 0, 0, 1);
  CHECK(open.omega_k() == Approx(0.7).epsilon(1e-15));
  CHECK(open.curvature_sign() == -1);

  // sum rule off by rounding only: still flat
  const auto lcdm = build_model(1, 0.1 + 0.2, 0, 0.7, 1);
  CHECK(std::abs(lcdm.omega_k()) <= kCurvatureTolerance);
  CHECK(lcdm.curvature_sign() == 0);
}

TEST_CASE("build_model rejects invalid parameters", "[cosmology][build_model]") {
  CHECK(code_of([] { build_model(0, 1, 0, 0); }) == ErrorCode::NonPositiveHubble);
  CHECK(code_of([] { build_model(-1, 1, 0, 0); }) == ErrorCode::NonPositiveHubble);
  CHECK(code_of([] { build_model(1, -0.1, 0, 0); }) == ErrorCode::NegativeDensity);
  CHECK(code_of([] { build_model(1, 0.3, -0.1, 0); }) == ErrorCode::NegativeDensity);
  // H^2 = 0.3/a^3 + 5.7/a^2 - 5 crosses zero near a = 1.093
  CHECK(code_of([] { build_model(1, 0.3, 0, -5, 1); }) == ErrorCode::UnsupportedRecollapse);
  // same model is fine if only a < 1.05 is ever needed
  CHECK_NOTHROW(build_model(1, 0.3, 0, -5, 1, 1.05));
}

TEST_CASE("hubble_rate closed forms", "[cosmology][hubble_rate]") {
  const auto eds = build_model(2.5, 1, 0, 0);
  CHECK(hubble_rate(eds, 1.0) == Approx(2.5).epsilon(1e-15));
  CHECK(hubble_rate(eds, 4.0) == Approx(2.5 / 8).epsilon(1e-15));
  const auto de_sitter = build_model(0.7, 0, 0, 1);
  for (double a : {1e-3, 0.5, 1.0, 123.0}) CHECK(hubble_rate(de_sitter, a) == Approx(0.7).epsilon(1e-15));
  CHECK_THROWS_AS(hubble_rate(eds, 0.0), Error);
}

TEST_CASE("solve_scale_factor matches closed-form expansions", "[cosmology][solve]") {
  SECTION("Einstein-de Sitter") {
    const double h0 = 1.3;
    const auto m = build_model(h0, 1, 0, 0);
    const double t_i = 1e-4;
    const auto curve = solve_scale_factor(m, t_i, 10.0, oracle::matter_scale_factor(t_i, h0));
    double worst = 0.0;
    for (double t : oracle::log_spaced(t_i, 10.0, 200)) {
      worst = std::max(worst, rel_err(curve.scale_factor(t), oracle::matter_scale_factor(t, h0)));
    }
    CHECK(worst <= 1e-8);
  }
  SECTION("radiation only") {
    const auto m = build_model(1, 0, 1, 0);
    const double t_i = 1e-5;
    const auto curve = solve_scale_factor(m, t_i, 5.0, oracle::radiation_scale_factor(t_i, 1));
    double worst = 0.0;
    for (double t : oracle::log_spaced(t_i, 5.0, 200)) {
      worst = std::max(worst, rel_err(curve.scale_factor(t), oracle::radiation_scale_factor(t, 1)));
    }
    CHECK(worst <= 1e-8);
  }
  SECTION("de Sitter") {
    const double h0 = 0.8;
    const auto m = build_model(h0, 0, 0, 1);
    const auto curve = solve_scale_factor(m, 0.5, 12.0, 0.01);
    double worst = 0.0;
    for (int i = 0; i <= 400; ++i) {
      const double t = 0.5 + 11.5 * i / 400.0;
      worst = std::max(worst, rel_err(curve.scale_factor(t), 0.01 * std::exp(h0 * (t - 0.5))));
    }
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("scale factor curve invariants", "[cosmology][solve]") {
  const auto m = build_model(1, 0.3, 1e-4, 0.6);
  const auto curve = solve_scale_factor(m, 1e-3, 3.0, 0.01);
  const auto t = curve.times();
  const auto a = curve.values();
  for (std::size_t i = 1; i < t.size(); ++i) {
    REQUIRE(t[i] > t[i - 1]);
    REQUIRE(a[i] > a[i - 1]);
  }
  CHECK(a.front() == 0.01);
  CHECK(curve.t_final() == 3.0);
  // interpolant satisfies the ODE between knots
  CHECK(curve.max_midpoint_residual() <= curve.grid().ode.relative);
}

TEST_CASE("solve_scale_factor preconditions", "[cosmology][solve]") {
  const auto m = build_model(1, 1, 0, 0);
  CHECK(code_of([&] { solve_scale_factor(m, 1.0, 1.0, 1.0); }) == ErrorCode::TimeOutOfRange);
  CHECK(code_of([&] { solve_scale_factor(m, 0.0, 1.0, 0.0); }) == ErrorCode::TimeOutOfRange);
  // allowed at build time for a < 1.05 but the solution runs past it
  const auto bad = build_model(1, 0.3, 0, -5, 1, 1.05);
  CHECK(code_of([&] { solve_scale_factor(bad, 0.0, 10.0, 1.0); }) == ErrorCode::NegativeRadicand);
}

TEST_CASE("particle_horizon examples", "[cosmology][horizon]") {
  const auto eds = build_model(1, 1, 0, 0);
  const double t = 2.0, t_i = t / 1000;
  const auto curve = solve_scale_factor(eds, t_i, 4.0, oracle::matter_scale_factor(t_i, 1));

  // R_P = 3ct (1 - (t_i/t)^(1/3)) = 2.7 ct at t_i/t = 1e-3
  const auto r = particle_horizon(curve, t);
  CHECK(r.proper_radius == Approx(2.7 * t).epsilon(1e-7));
  CHECK(r.proper_radius == Approx(curve.scale_factor(t) * r.comoving_radius).epsilon(1e-15));
  CHECK(r.quadrature_error_estimate >= 0.0);

  const auto zero = particle_horizon(curve, t_i);
  CHECK(zero.proper_radius == 0.0);
  CHECK(zero.comoving_radius == 0.0);

  CHECK(code_of([&] { particle_horizon(curve, t_i * 0.5); }) == ErrorCode::TimeOutOfRange);
  CHECK(code_of([&] { particle_horizon(curve, 4.5); }) == ErrorCode::TimeOutOfRange);

  const auto ds = build_model(1.7, 0, 0, 1, 3.0);
  const auto ds_curve = solve_scale_factor(ds, 0.2, 6.0, 1.0);
  CHECK(particle_horizon(ds_curve, 5.0).proper_radius ==
        Approx(oracle::de_sitter_horizon(5.0, 0.2, 3.0, 1.7)).epsilon(1e-8));
}

TEST_CASE("R_P tends to 3ct as t_i -> 0 in Einstein-de Sitter", "[cosmology][horizon]") {
  const auto eds = build_model(1, 1, 0, 0);
  const double t = 1.0;
  double prev_gap = 1.0;
  for (double t_i : {1e-2, 1e-4, 1e-6, 1e-8}) {
    const auto curve = solve_scale_factor(eds, t_i, t, oracle::matter_scale_factor(t_i, 1));
    const double gap = 3.0 * t - particle_horizon(curve, t).proper_radius;
    CHECK(gap > 0.0);
    CHECK(gap < prev_gap);
    CHECK(gap == Approx(3.0 * std::cbrt(t_i)).epsilon(1e-5));
    prev_gap = gap;
  }
}

TEST_CASE("horizon properties", "[cosmology][horizon][property]") {
  SECTION("comoving radius strictly increasing for several models") {
    for (auto m : {build_model(1, 1, 0, 0), build_model(1, 0.3, 0, 0), build_model(1, 0.3, 1e-4, 0.7),
                   build_model(2, 0, 1, 0), build_model(1, 0, 0, 1), build_model(1, 0.2, 0, 0.1)}) {
      const auto curve = solve_scale_factor(m, 1e-3, 2.0, 1e-2);
      double prev = -1.0;
      for (double t : oracle::log_spaced(1e-3, 2.0, 60)) {
        const double chi = particle_horizon(curve, t).comoving_radius;
        REQUIRE(chi > prev);
        prev = chi;
      }
    }
  }
  SECTION("light speed scales the radius") {
    for (double lambda : {0.5, 3.0, 299792.458}) {
      const auto base = build_model(1, 0.3, 0, 0.7, 1.0);
      const auto scaled = build_model(1, 0.3, 0, 0.7, lambda);
      const auto c1 = solve_scale_factor(base, 0.01, 3.0, 0.05);
      const auto c2 = solve_scale_factor(scaled, 0.01, 3.0, 0.05);
      for (double t : {0.02, 0.5, 2.9}) {
        CHECK(particle_horizon(c2, t).proper_radius ==
              Approx(lambda * particle_horizon(c1, t).proper_radius).epsilon(1e-15));
      }
    }
  }
  SECTION("halving tolerances moves R_P by less than the previous error estimate") {
    for (auto m : {build_model(1, 1, 0, 0), build_model(1, 0.3, 0, 0), build_model(1, 0.3, 1e-4, 0.7)}) {
      GridControl grid;
      grid.ode = {1e-8, 1e-10};
      for (int round = 0; round < 3; ++round) {
        const auto coarse = solve_scale_factor(m, 1e-3, 5.0, 1e-2, grid);
        const auto fine = solve_scale_factor(m, 1e-3, 5.0, 1e-2, grid.halved());
        for (double t : {2e-3, 0.1, 1.0, 5.0}) {
          const auto a = particle_horizon(coarse, t);
          const auto b = particle_horizon(fine, t);
          CHECK(std::abs(a.proper_radius - b.proper_radius) <= a.quadrature_error_estimate);
        }
        grid = grid.halved();
      }
    }
  }
}

TEST_CASE("horizon oracle on 50 log-spaced times", "[cosmology][horizon][oracle]") {
  const double c = 2.0;
  SECTION("matter") {
    const double t_i = 1e-4;
    const auto curve =
        solve_scale_factor(build_model(1, 1, 0, 0, c), t_i, 10.0, oracle::matter_scale_factor(t_i, 1));
    for (double t : oracle::log_spaced(2 * t_i, 10.0, 50)) {
      CHECK(rel_err(particle_horizon(curve, t).proper_radius, oracle::matter_horizon(t, t_i, c)) <= 1e-6);
    }
  }
  SECTION("radiation") {
    const double t_i = 1e-4;
    const auto curve = solve_scale_factor(build_model(1, 0, 1, 0, c), t_i, 10.0,
                                          oracle::radiation_scale_factor(t_i, 1));
    for (double t : oracle::log_spaced(2 * t_i, 10.0, 50)) {
      CHECK(rel_err(particle_horizon(curve, t).proper_radius, oracle::radiation_horizon(t, t_i, c)) <=
            1e-6);
    }
  }
}

TEST_CASE("comoving_volume", "[cosmology][volume]") {
  CHECK(comoving_volume(build_model(1, 1, 0, 0), 1.0) == Approx(4.0 * std::numbers::pi / 3.0).epsilon(1e-15));

  // all densities zero: omega_k = 1, R_c = c/H0 = 1
  const auto milne = build_model(1, 0, 0, 0);
  CHECK(milne.curvature_radius() == 1.0);
  CHECK(comoving_volume(milne, 1.0) == Approx(5.110932705708289).epsilon(1e-14));

  // series and closed form agree where they meet, and the flat limit holds
  const double below = comoving_volume(milne, 0.0999999999);
  const double above = comoving_volume(milne, 0.1000000001);
  CHECK(below == Approx(above).epsilon(1e-8));
  for (double chi : {1e-6, 1e-4, 1e-2}) {
    CHECK(comoving_volume(milne, chi) / (4.0 * std::numbers::pi / 3.0 * chi * chi * chi) ==
          Approx(1.0).margin(chi * chi));
  }

  const auto closed = build_model(1, 2, 0, 0, 1, 1.5);
  CHECK(code_of([&] { comoving_volume(closed, 1.0); }) == ErrorCode::ClosedUniverseUnsupported);
}

TEST_CASE("holographic_ratio", "[cosmology][holographic]") {
  const auto eds = build_model(1, 1, 0, 0);
  const double t_i = 1e-6;
  const auto curve = solve_scale_factor(eds, t_i, 10.0, oracle::matter_scale_factor(t_i, 1));

  CHECK(holographic_ratio(eds, curve, 1.0, 0.0, 1.0).ratio == 0.0);
  CHECK(holographic_ratio(eds, curve, 1.0, 0.0, 1.0).satisfied());

  const double r1 = holographic_ratio(eds, curve, 1.0, 3.0, 1e-3).ratio;
  CHECK(holographic_ratio(eds, curve, 1.0, 3.0, 2e-3).ratio == Approx(4.0 * r1).epsilon(1e-14));
  CHECK(holographic_ratio(eds, curve, 1.0, 6.0, 1e-3).ratio == Approx(2.0 * r1).epsilon(1e-15));
  CHECK(holographic_ratio(eds, curve, 1.0, 0.7 * 3.0, 1e-3).ratio == Approx(0.7 * r1).epsilon(1e-15));

  // ratio ~ chi / a^2 ~ 1/t once t >> t_i
  double prev = std::numeric_limits<double>::infinity();
  for (double t : oracle::log_spaced(1e-2, 10.0, 20)) {
    const double r = holographic_ratio(eds, curve, t, 1.0, 1.0).ratio;
    CHECK(r < prev);
    // exact: sigma (4 pi/3) chi^3 l^2 / (pi a^2 chi^2) with chi = 3 (t/t0)^(1/3) t0 (1 - (t_i/t)^(1/3))
    const double t0 = 2.0 / 3.0;
    const double chi = 3.0 * t0 * std::cbrt(t / t0) * -std::expm1(std::log(t_i / t) / 3.0);
    const double a = std::pow(t / t0, 2.0 / 3.0);
    CHECK(r == Approx(4.0 / 3.0 * chi / (a * a)).epsilon(1e-7));
    prev = r;
  }
}

TEST_CASE("curve CSV export", "[cosmology][csv]") {
  const auto m = build_model(1, 0, 0, 1);
  const auto curve = solve_scale_factor(m, 0.0, 0.1, 1.0);
  std::ostringstream out;
  write_curve_csv(out, curve);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,a,H");
  std::getline(in, line);
  CHECK(line == "0,1,1");
  std::size_t rows = 1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == curve.times().size());
  CHECK(out.str().find('\r') == std::string::npos);
}
