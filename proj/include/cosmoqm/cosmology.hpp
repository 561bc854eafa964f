#pragma once

// FLRW background: Friedmann closure for a(t), particle horizon, comoving
// volume and the holographic (entropy vs. horizon area) ratio.
//
// Conventions
//   - a = 1 at the epoch where H = hubble0; density parameters refer to it.
//   - Internally the ODE runs in dimensionless time tau = hubble0 * t, so the
//     integrands stay O(1). hubble0 and light_speed only rescale at the edges.
//   - comoving_radius chi(t) = integral_{t_i}^{t} c / a(s) ds (a length), and
//     proper_radius = a(t) * chi(t).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cosmoqm/csv.hpp"
#include "cosmoqm/error.hpp"
#include "cosmoqm/monotone_cubic.hpp"
#include "cosmoqm/numeric.hpp"
#include "cosmoqm/ode.hpp"

namespace cosmoqm {

inline constexpr double kCurvatureTolerance = 1e-12;

class CosmologyModel {
 public:
  double hubble0() const noexcept { return hubble0_; }
  double omega_m() const noexcept { return omega_m_; }
  double omega_r() const noexcept { return omega_r_; }
  double omega_lambda() const noexcept { return omega_lambda_; }
  double light_speed() const noexcept { return light_speed_; }

  /// Derived from the sum rule on every call; never stored.
  double omega_k() const noexcept { return 1.0 - omega_m_ - omega_r_ - omega_lambda_; }

  /// Sign of k in the metric: -1 open, 0 flat, +1 closed.
  int curvature_sign() const noexcept {
    const double ok = omega_k();
    if (std::abs(ok) <= kCurvatureTolerance) return 0;
    return ok > 0.0 ? -1 : +1;
  }

  double hubble_distance() const noexcept { return light_speed_ / hubble0_; }

  /// Present-day curvature radius c / (H0 sqrt|omega_k|); infinite when flat.
  double curvature_radius() const noexcept {
    if (curvature_sign() == 0) return std::numeric_limits<double>::infinity();
    return hubble_distance() / std::sqrt(std::abs(omega_k()));
  }

  /// (H(a) / H0)^2; may be negative for unsupported parameter sets.
  double e_squared(double a) const noexcept {
    const double inv = 1.0 / a;
    const double inv2 = inv * inv;
    return omega_r_ * inv2 * inv2 + omega_m_ * inv2 * inv + omega_k() * inv2 + omega_lambda_;
  }

  friend CosmologyModel build_model(double, double, double, double, double, double);

 private:
  CosmologyModel(double h0, double om, double orad, double ol, double c)
      : hubble0_(h0), omega_m_(om), omega_r_(orad), omega_lambda_(ol), light_speed_(c) {}

  double hubble0_;
  double omega_m_;
  double omega_r_;
  double omega_lambda_;
  double light_speed_;
};

inline constexpr double kDefaultMaxScaleFactor = 1e6;

/// Validates the parameters and rejects any model whose H^2 turns negative
/// on (0, max_scale_factor].
inline CosmologyModel build_model(double h0, double omega_m, double omega_r, double omega_lambda,
                                  double c = 1.0,
                                  double max_scale_factor = kDefaultMaxScaleFactor) {
  if (!(h0 > 0.0) || !std::isfinite(h0)) {
    throw Error(ErrorCode::NonPositiveHubble, "hubble0 must be positive, got " + std::to_string(h0));
  }
  if (!(omega_m >= 0.0) || !(omega_r >= 0.0)) {
    throw Error(ErrorCode::NegativeDensity, "omega_m and omega_r must be non-negative");
  }
  if (!std::isfinite(omega_lambda) || !std::isfinite(omega_m) || !std::isfinite(omega_r)) {
    throw Error(ErrorCode::NegativeDensity, "density parameters must be finite");
  }
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw Error(ErrorCode::NonPositiveHubble, "light_speed must be positive");
  }
  CosmologyModel model(h0, omega_m, omega_r, omega_lambda, c);

  // log-spaced scan of H^2(a) from deep in the past up to max_scale_factor
  constexpr double kScanFrom = 1e-12;
  constexpr int kPerDecade = 200;
  const double decades = std::log10(max_scale_factor / kScanFrom);
  const int n = static_cast<int>(std::ceil(decades * kPerDecade));
  for (int i = 0; i <= n; ++i) {
    const double a = std::min(kScanFrom * std::pow(10.0, static_cast<double>(i) / kPerDecade),
                              max_scale_factor);
    if (model.e_squared(a) < 0.0) {
      throw Error(ErrorCode::UnsupportedRecollapse,
                  "H^2 < 0 at a = " + csv::format(a) + " (recollapsing or bouncing model)");
    }
  }
  return model;
}

/// H(a) in model units.
inline double hubble_rate(const CosmologyModel& model, double a) {
  const double e2 = model.e_squared(a);
  if (!(a > 0.0) || !(e2 >= 0.0)) {
    throw Error(ErrorCode::NegativeRadicand, "H^2 < 0 at a = " + csv::format(a));
  }
  return model.hubble0() * std::sqrt(e2);
}

struct GridControl {
  ode::Tolerances ode{};
  /// Largest step allowed, as a fraction of the local Hubble time 1/H.
  double max_hubble_step = 0.005;
  double quadrature_relative = 1e-9;
  std::size_t max_steps = 50'000'000;

  GridControl halved() const {
    GridControl g = *this;
    g.ode.relative *= 0.5;
    g.ode.absolute *= 0.5;
    g.quadrature_relative *= 0.5;
    return g;
  }
};

/// Tabulated, monotone a(t) on [t_i, t_f] with a monotone-cubic interpolant
/// whose knot slopes are the exact ODE right-hand side.
class ScaleFactorCurve {
 public:
  const CosmologyModel& model() const noexcept { return model_; }
  const GridControl& grid() const noexcept { return grid_; }

  double t_initial() const noexcept { return interp_.knots().front(); }
  double t_final() const noexcept { return interp_.knots().back(); }
  std::span<const double> times() const noexcept { return interp_.knots(); }
  std::span<const double> values() const noexcept { return interp_.values(); }
  const MonotoneCubic& interpolant() const noexcept { return interp_; }

  double scale_factor(double t) const { return interp_(t); }
  double scale_factor_rate(double t) const { return interp_.derivative(t); }

  /// Sum of the accepted local error estimates plus the worst interpolation
  /// discrepancy, both relative to a. A bound on the curve's relative error.
  double relative_error_estimate() const noexcept {
    return accumulated_local_error_ + interpolation_error_;
  }
  double interpolation_error() const noexcept { return interpolation_error_; }

  /// Largest |da/dt - a H(a)| / (a H(a)) of the interpolant over the interval
  /// midpoints.
  double max_midpoint_residual() const {
    double worst = 0.0;
    const auto t = interp_.knots();
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
      const double mid = 0.5 * (t[i] + t[i + 1]);
      const double a = interp_.eval_on(i, mid);
      const double rhs = a * hubble_rate(model_, a);
      worst = std::max(worst, std::abs(interp_.derivative_on(i, mid) - rhs) / rhs);
    }
    return worst;
  }

  friend ScaleFactorCurve solve_scale_factor(const CosmologyModel&, double, double, double,
                                             const GridControl&);

 private:
  ScaleFactorCurve(CosmologyModel model, GridControl grid, MonotoneCubic interp,
                   double local_error, double interp_error)
      : model_(model),
        grid_(grid),
        interp_(std::move(interp)),
        accumulated_local_error_(local_error),
        interpolation_error_(interp_error) {}

  CosmologyModel model_;
  GridControl grid_;
  MonotoneCubic interp_;
  double accumulated_local_error_;
  double interpolation_error_;
};

/// Integrates da/dt = a H(a) from (t_i, a_i) to t_f.
inline ScaleFactorCurve solve_scale_factor(const CosmologyModel& model, double t_i, double t_f,
                                           double a_i, const GridControl& grid = {}) {
  if (!(t_i < t_f)) {
    throw Error(ErrorCode::TimeOutOfRange, "t_i must be smaller than t_f");
  }
  if (!(a_i > 0.0)) {
    throw Error(ErrorCode::TimeOutOfRange, "a_i must be positive");
  }
  const double h0 = model.hubble0();
  auto rhs = [&](double /*tau*/, double a) { return a * hubble_rate(model, a) / h0; };
  auto max_step = [&](double /*tau*/, double a) {
    return grid.max_hubble_step * h0 / hubble_rate(model, a);
  };

  std::vector<double> t{t_i};
  std::vector<double> a{a_i};
  std::vector<double> slope{a_i * hubble_rate(model, a_i)};
  double local_error = 0.0;
  double interp_error = 0.0;

  auto on_step = [&](const ode::AcceptedStep& s) {
    local_error += s.local_error / std::abs(s.y1);

    // Hermite midpoint vs. a fresh half step: measures interpolation error.
    const double h = s.t1 - s.t0;
    const double hermite_mid =
        0.5 * (s.y0 + s.y1) + 0.125 * h * (s.dydt0 - s.dydt1);
    const double half = ode::dormand_prince_step(rhs, s.t0, s.y0, s.dydt0, 0.5 * h).y;
    interp_error = std::max(interp_error, std::abs(hermite_mid - half) / std::abs(half));

    t.push_back(t_i + s.t1 / h0);
    a.push_back(s.y1);
    slope.push_back(s.dydt1 * h0);
  };

  const double tau_end = (t_f - t_i) * h0;
  ode::integrate(rhs, 0.0, a_i, tau_end, grid.ode, max_step, on_step, grid.max_steps);
  t.back() = t_f;

  return ScaleFactorCurve(model, grid, MonotoneCubic(std::move(t), std::move(a), std::move(slope)),
                          local_error, interp_error);
}

struct HorizonResult {
  double time = 0.0;
  double proper_radius = 0.0;
  double comoving_radius = 0.0;
  double quadrature_error_estimate = 0.0;
};

namespace detail {

template <typename F>
double adaptive_gauss(F&& f, double lo, double hi, double rel_tol, double& error, int depth = 0) {
  using numeric::GaussLegendre5;
  const double mid = 0.5 * (lo + hi);
  const double coarse = GaussLegendre5::integrate(f, lo, hi);
  const double fine = GaussLegendre5::integrate(f, lo, mid) + GaussLegendre5::integrate(f, mid, hi);
  const double diff = std::abs(fine - coarse);
  if (diff <= rel_tol * std::abs(fine) || depth >= 40) {
    error += diff;
    return fine;
  }
  return adaptive_gauss(f, lo, mid, rel_tol, error, depth + 1) +
         adaptive_gauss(f, mid, hi, rel_tol, error, depth + 1);
}

}  // namespace detail

/// R_P(t) = a(t) * integral_{t_i}^{t} c / a(s) ds, by knot-wise adaptive
/// Gauss-Legendre quadrature of the interpolated curve.
///
/// The error estimate adds the quadrature refinement difference to the
/// propagated curve error (a enters R_P twice, hence the factor 2).
inline HorizonResult particle_horizon(const ScaleFactorCurve& curve, double t) {
  if (!(t >= curve.t_initial() && t <= curve.t_final())) {
    throw Error(ErrorCode::TimeOutOfRange, "t = " + csv::format(t) + " outside [" +
                                               csv::format(curve.t_initial()) + ", " +
                                               csv::format(curve.t_final()) + "]");
  }
  HorizonResult out;
  out.time = t;
  if (t == curve.t_initial()) return out;

  const auto& interp = curve.interpolant();
  const auto knots = interp.knots();
  const double rel_tol = curve.grid().quadrature_relative;
  numeric::CompensatedSum integral;
  double quad_error = 0.0;

  const std::size_t last = interp.interval(t);
  for (std::size_t i = 0; i <= last; ++i) {
    const double lo = knots[i];
    const double hi = (i == last) ? t : knots[i + 1];
    if (hi <= lo) continue;
    auto inv_a = [&](double s) { return 1.0 / interp.eval_on(i, s); };
    integral.add(detail::adaptive_gauss(inv_a, lo, hi, rel_tol, quad_error));
  }

  const double c = curve.model().light_speed();
  const double a_t = interp.eval_on(last, t);
  out.comoving_radius = c * integral.value();
  out.proper_radius = a_t * out.comoving_radius;
  out.quadrature_error_estimate =
      a_t * c * quad_error + 2.0 * curve.relative_error_estimate() * out.proper_radius;
  return out;
}

/// Volume enclosed by comoving radius chi (a = 1 normalization).
inline double comoving_volume(const CosmologyModel& model, double chi) {
  if (!(chi >= 0.0)) {
    throw Error(ErrorCode::TimeOutOfRange, "comoving radius must be non-negative");
  }
  constexpr double pi = std::numbers::pi;
  switch (model.curvature_sign()) {
    case 0:
      return 4.0 * pi / 3.0 * chi * chi * chi;
    case -1: {
      const double rc = model.curvature_radius();
      const double x = chi / rc;
      if (x < 0.1) {
        // sinh(2x) - 2x cancels badly near 0; its series is (4/3)x^3 (1 + x^2/5 + ...)
        const double x2 = x * x;
        const double series =
            1.0 + x2 / 5.0 + 2.0 * x2 * x2 / 105.0 + x2 * x2 * x2 / 945.0 +
            2.0 * x2 * x2 * x2 * x2 / 51975.0;
        return 4.0 * pi / 3.0 * chi * chi * chi * series;
      }
      return pi * rc * rc * rc * (std::sinh(2.0 * x) - 2.0 * x);
    }
    default:
      throw Error(ErrorCode::ClosedUniverseUnsupported, "closed (k = +1) models are not supported");
  }
}

struct HolographicRatio {
  double ratio = 0.0;         // S / (A / 4)
  double entropy = 0.0;       // sigma * V(chi)
  double area_quarter = 0.0;  // pi R_P^2 / l_P^2
  HorizonResult horizon;

  bool satisfied() const noexcept { return ratio <= 1.0; }
};

/// Matter entropy inside the particle horizon over a quarter of its area in
/// Planck units, with a constant comoving entropy density sigma.
inline HolographicRatio holographic_ratio(const CosmologyModel& model, const ScaleFactorCurve& curve,
                                          double t, double comoving_entropy_density,
                                          double planck_length) {
  if (!(comoving_entropy_density >= 0.0)) {
    throw Error(ErrorCode::NegativeDensity, "entropy density must be non-negative");
  }
  if (!(planck_length > 0.0)) {
    throw Error(ErrorCode::NonPositiveHubble, "planck_length must be positive");
  }
  HolographicRatio out;
  out.horizon = particle_horizon(curve, t);
  const double r = out.horizon.proper_radius;
  out.entropy = comoving_entropy_density * comoving_volume(model, out.horizon.comoving_radius);
  out.area_quarter = std::numbers::pi * (r / planck_length) * (r / planck_length);
  out.ratio = out.entropy == 0.0 ? 0.0 : out.entropy / out.area_quarter;
  return out;
}

/// Exports knots as CSV with header `t,a,H` (model units).
inline void write_curve_csv(std::ostream& out, const ScaleFactorCurve& curve) {
  csv::write_header(out, {"t", "a", "H"});
  const auto t = curve.times();
  const auto a = curve.values();
  for (std::size_t i = 0; i < t.size(); ++i) {
    csv::write_row(out, t[i], a[i], hubble_rate(curve.model(), a[i]));
  }
}

}  // namespace cosmoqm
