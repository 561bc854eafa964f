#pragma once

// Finite-cutoff diagnostics for infinite products prod_j x_j with x_j in
// (0, 1]. The product has a finite nonzero limit iff sum_j (1 - x_j)
// converges, which in particular needs x_j -> 1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cosmoqm/error.hpp"
#include "cosmoqm/quantum.hpp"

namespace cosmoqm {

/// A weight sequence given through its deficits d_j = 1 - x_j (j = 1, 2, ...),
/// which keeps full precision when x_j is close to 1.
struct WeightSequence {
  std::function<double(std::uint64_t)> deficit;
  std::string description;

  double weight(std::uint64_t j) const { return 1.0 - deficit(j); }

  static WeightSequence constant(double x) {
    return {[d = 1.0 - x](std::uint64_t) { return d; }, "constant " + std::to_string(x)};
  }
  static WeightSequence from_weights(std::function<double(std::uint64_t)> x, std::string description) {
    return {[x = std::move(x)](std::uint64_t j) { return 1.0 - x(j); }, std::move(description)};
  }
  static WeightSequence from_deficits(std::function<double(std::uint64_t)> d, std::string description) {
    return {std::move(d), std::move(description)};
  }
  /// x_j = 1 - 1/(j+1)^2; partial products telescope to (J+2)/(2(J+1)).
  static WeightSequence inverse_square() {
    return from_deficits(
        [](std::uint64_t j) {
          const double m = static_cast<double>(j) + 1.0;
          return 1.0 / (m * m);
        },
        "1 - 1/(j+1)^2");
  }
  /// x_j = 1 - 1/(j+1); partial products telescope to 1/(J+1).
  static WeightSequence harmonic() {
    return from_deficits([](std::uint64_t j) { return 1.0 / (static_cast<double>(j) + 1.0); },
                         "1 - 1/(j+1)");
  }
};

/// The replicated-observer scenario: every factor is the largest Born
/// probability max_k |alpha_k|^2, identical for all observers.
inline WeightSequence uniform_symmetric_sequence(const ObserverState& state) {
  const double p = born_probabilities(state).max();
  WeightSequence s = WeightSequence::constant(p);
  s.description = "uniform symmetric, max p = " + std::to_string(p);
  return s;
}

enum class ProductVerdict { ConvergesNonzero, DivergesToZero, IndeterminateAtCutoff };

constexpr std::string_view to_string(ProductVerdict v) noexcept {
  switch (v) {
    case ProductVerdict::ConvergesNonzero: return "ConvergesNonzero";
    case ProductVerdict::DivergesToZero: return "DivergesToZero";
    case ProductVerdict::IndeterminateAtCutoff: return "IndeterminateAtCutoff";
  }
  return "IndeterminateAtCutoff";
}

/// Decision thresholds. The verdict is only as good as these: anything that
/// does not clear one of them is reported as indeterminate.
struct ProductThresholds {
  /// Cauchy test: deficits summed over the last half window.
  double cauchy_tolerance = 1e-9;
  /// Mean deficit over the last quarter window for "bounded away from 1".
  double away_from_one_margin = 1e-6;
  /// A partial log product below this is numerically zero.
  double log_floor = -700.0;
  /// Tail decay d_j ~ j^-s: s at or below this is treated as harmonic or
  /// slower (sum diverges), s at or above converges_exponent as summable.
  double diverges_exponent = 1.05;
  double converges_exponent = 1.25;
};

struct ProductAnalysis {
  ProductVerdict verdict = ProductVerdict::IndeterminateAtCutoff;
  /// Running sums of ln x_j, j = 1..J.
  std::vector<double> partial_log_products;
  /// sum_{j <= J} (1 - x_j)
  double tail_test_statistic = 0.0;
  std::uint64_t cutoff = 0;
  /// sum of deficits over the last half window (J/2, J]
  double tail_window_sum = 0.0;
  /// fitted decay exponent s of d_j ~ j^-s over the last half window
  double effective_exponent = 0.0;
  std::string reason;

  double final_partial_log_product() const noexcept {
    return partial_log_products.empty() ? 0.0 : partial_log_products.back();
  }
  double final_partial_product() const noexcept { return std::exp(final_partial_log_product()); }
};

namespace detail {

/// ln of integral_lo^hi x^-s dx, stable through s = 1.
inline double log_power_integral(double s, double lo, double hi) {
  const double width = std::log(hi / lo);
  const double u = (1.0 - s) * width;
  const double shape = std::abs(u) < 1e-12 ? 1.0 : std::expm1(u) / u;
  return (1.0 - s) * std::log(lo) + std::log(width) + std::log(shape);
}

/// Exponent s for which a pure power law j^-s reproduces the ratio of the
/// deficit sums over two adjacent blocks (continuity-corrected edges).
inline double fit_block_exponent(double sum_near, double sum_far, double near_lo, double mid,
                                 double far_hi) {
  constexpr double kLow = -20.0;
  constexpr double kHigh = 60.0;
  if (sum_near <= 0.0) return kLow;
  if (sum_far <= 0.0) return kHigh;
  const double target = std::log(sum_far / sum_near);
  auto log_ratio = [&](double s) {
    return log_power_integral(s, mid, far_hi) - log_power_integral(s, near_lo, mid);
  };
  double lo = kLow, hi = kHigh;
  if (target >= log_ratio(lo)) return lo;
  if (target <= log_ratio(hi)) return hi;
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double m = 0.5 * (lo + hi);
    (log_ratio(m) > target ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Classifies prod_{j>=1} x_j from its first J factors.
///
/// Rules, first match wins:
///   1. partial log product below the floor           -> DivergesToZero
///   2. deficits over (J/2, J] sum below the Cauchy tol -> ConvergesNonzero
///   3. mean deficit over the last quarter >= margin and
///      decay exponent <= diverges_exponent            -> DivergesToZero
///   4. decay exponent >= converges_exponent          -> ConvergesNonzero
///   otherwise                                         -> IndeterminateAtCutoff
inline ProductAnalysis infinite_product_classify(const WeightSequence& sequence, std::uint64_t cutoff,
                                                 const ProductThresholds& th = {}) {
  if (cutoff < 10) throw Error(ErrorCode::InvalidArgument, "cutoff J must be at least 10");
  ProductAnalysis out;
  out.cutoff = cutoff;
  out.partial_log_products.reserve(cutoff);

  const std::uint64_t half = cutoff / 2;
  const std::uint64_t three_quarter = (3 * cutoff) / 4;
  long double log_acc = 0.0L;
  long double total_deficit = 0.0L;
  long double near_block = 0.0L;  // (J/2, 3J/4]
  long double far_block = 0.0L;   // (3J/4, J]

  for (std::uint64_t j = 1; j <= cutoff; ++j) {
    const double d = sequence.deficit(j);
    if (!(d >= 0.0 && d < 1.0)) {
      throw Error(ErrorCode::InvalidWeight,
                  "x_" + std::to_string(j) + " = " + std::to_string(1.0 - d) + " not in (0, 1]");
    }
    log_acc += static_cast<long double>(std::log1p(-d));
    total_deficit += d;
    if (j > three_quarter) {
      far_block += d;
    } else if (j > half) {
      near_block += d;
    }
    out.partial_log_products.push_back(static_cast<double>(log_acc));
  }

  out.tail_test_statistic = static_cast<double>(total_deficit);
  out.tail_window_sum = static_cast<double>(near_block + far_block);
  out.effective_exponent = detail::fit_block_exponent(
      static_cast<double>(near_block), static_cast<double>(far_block), static_cast<double>(half) + 0.5,
      static_cast<double>(three_quarter) + 0.5, static_cast<double>(cutoff) + 0.5);
  const double far_mean = static_cast<double>(far_block) / static_cast<double>(cutoff - three_quarter);

  if (out.final_partial_log_product() < th.log_floor) {
    out.verdict = ProductVerdict::DivergesToZero;
    out.reason = "partial log product below floor";
  } else if (out.tail_window_sum < th.cauchy_tolerance) {
    out.verdict = ProductVerdict::ConvergesNonzero;
    out.reason = "deficit tail below Cauchy tolerance";
  } else if (far_mean >= th.away_from_one_margin && out.effective_exponent <= th.diverges_exponent) {
    out.verdict = ProductVerdict::DivergesToZero;
    out.reason = "factors stay away from 1; deficits decay no faster than 1/j";
  } else if (out.effective_exponent >= th.converges_exponent) {
    out.verdict = ProductVerdict::ConvergesNonzero;
    out.reason = "deficits decay like a summable power law";
  } else {
    out.verdict = ProductVerdict::IndeterminateAtCutoff;
    out.reason = "no threshold cleared at this cutoff";
  }
  return out;
}

}  // namespace cosmoqm
