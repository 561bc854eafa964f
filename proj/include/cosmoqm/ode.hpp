#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "cosmoqm/error.hpp"

namespace cosmoqm::ode {

struct Tolerances {
  double relative = 1e-10;
  double absolute = 1e-12;
};

/// One Dormand-Prince 5(4) step for a scalar ODE y' = f(t, y).
struct StepResult {
  double y;       // fifth-order solution
  double dydt;    // f(t + h, y), reused by the next step (FSAL)
  double error;   // |y5 - y4|
};

template <typename Rhs>
StepResult dormand_prince_step(Rhs&& f, double t, double y, double dydt, double h) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // fifth-order minus embedded fourth-order weights
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  const double k1 = dydt;
  const double k2 = f(t + c2 * h, y + h * (a21 * k1));
  const double k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
  const double k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
  const double k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  const double k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  const double y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  const double k7 = f(t + h, y5);
  const double err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  return {y5, k7, std::abs(err)};
}

struct AcceptedStep {
  double t0, y0, dydt0;
  double t1, y1, dydt1;
  double local_error;
};

struct IntegrationStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
};

/// Adaptive Dormand-Prince integration of y' = f(t, y) from (t0, y0) to t1.
///
/// `max_step(t, y)` caps each step; `on_step` receives every accepted step in
/// order. Throws StiffnessFailure when the step size underflows or the step
/// budget runs out.
template <typename Rhs, typename MaxStep, typename OnStep>
IntegrationStats integrate(Rhs&& f, double t0, double y0, double t1, const Tolerances& tol,
                           MaxStep&& max_step, OnStep&& on_step,
                           std::size_t max_steps = 50'000'000) {
  IntegrationStats stats;
  auto counted = [&](double t, double y) {
    ++stats.evaluations;
    return f(t, y);
  };

  double t = t0;
  double y = y0;
  double dydt = counted(t, y);
  const double span = t1 - t0;
  double h = std::min(max_step(t, y), span);
  {
    // initial guess from the local time scale |y / y'|
    const double scale = std::abs(y) / std::max(std::abs(dydt), 1e-300);
    h = std::min(h, 1e-3 * scale);
  }
  const double h_min = 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t0), std::abs(t1));

  while (t < t1) {
    if (stats.accepted + stats.rejected >= max_steps) {
      throw Error(ErrorCode::StiffnessFailure, "step budget exhausted");
    }
    h = std::min({h, max_step(t, y), t1 - t});
    const bool last = (t + h >= t1);
    if (last) h = t1 - t;

    const StepResult step = dormand_prince_step(counted, t, y, dydt, h);
    const double scale = tol.absolute + tol.relative * std::max(std::abs(y), std::abs(step.y));
    const double ratio = step.error / scale;

    if (ratio <= 1.0 && std::isfinite(step.y)) {
      const double t_next = last ? t1 : t + h;
      on_step(AcceptedStep{t, y, dydt, t_next, step.y, step.dydt, step.error});
      t = t_next;
      y = step.y;
      dydt = step.dydt;
      ++stats.accepted;
      const double grow = ratio == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(ratio, -0.2), 0.2, 5.0);
      h *= grow;
    } else {
      ++stats.rejected;
      const double shrink =
          std::isfinite(ratio) ? std::clamp(0.9 * std::pow(ratio, -0.2), 0.1, 0.9) : 0.1;
      h *= shrink;
      if (h < h_min) {
        throw Error(ErrorCode::StiffnessFailure, "step size underflow");
      }
    }
  }
  return stats;
}

}  // namespace cosmoqm::ode
