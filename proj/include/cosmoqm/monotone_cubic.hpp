#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace cosmoqm {

/// Piecewise cubic Hermite interpolant with Fritsch-Carlson slope limiting.
///
/// Knot slopes are supplied by the caller (for an ODE solution they are the
/// exact right-hand side at each knot) and are only clipped where they would
/// break monotonicity of the data.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;

  MonotoneCubic(std::vector<double> x, std::vector<double> y, std::vector<double> slopes)
      : x_(std::move(x)), y_(std::move(y)), d_(std::move(slopes)) {
    assert(x_.size() == y_.size() && y_.size() == d_.size());
    limit_slopes();
  }

  std::size_t size() const noexcept { return x_.size(); }
  std::span<const double> knots() const noexcept { return x_; }
  std::span<const double> values() const noexcept { return y_; }
  std::span<const double> slopes() const noexcept { return d_; }

  /// Index i of the interval [x_i, x_{i+1}] containing t (clamped to the ends).
  std::size_t interval(double t) const noexcept {
    const auto it = std::upper_bound(x_.begin(), x_.end(), t);
    const auto i = static_cast<std::size_t>(std::distance(x_.begin(), it));
    return std::clamp<std::size_t>(i == 0 ? 0 : i - 1, 0, x_.size() - 2);
  }

  double operator()(double t) const noexcept { return eval_on(interval(t), t); }
  double derivative(double t) const noexcept { return derivative_on(interval(t), t); }

  double eval_on(std::size_t i, double t) const noexcept {
    const double h = x_[i + 1] - x_[i];
    const double s = (t - x_[i]) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
  }

  double derivative_on(std::size_t i, double t) const noexcept {
    const double h = x_[i + 1] - x_[i];
    const double s = (t - x_[i]) / h;
    const double s2 = s * s;
    const double dh00 = (6 * s2 - 6 * s) / h;
    const double dh10 = 3 * s2 - 4 * s + 1;
    const double dh01 = (-6 * s2 + 6 * s) / h;
    const double dh11 = 3 * s2 - 2 * s;
    return dh00 * y_[i] + dh10 * d_[i] + dh01 * y_[i + 1] + dh11 * d_[i + 1];
  }

 private:
  void limit_slopes() {
    for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
      const double secant = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
      if (secant == 0.0) {
        d_[i] = 0.0;
        d_[i + 1] = 0.0;
        continue;
      }
      // slopes against the data direction would create an extremum
      if (d_[i] / secant < 0.0) d_[i] = 0.0;
      if (d_[i + 1] / secant < 0.0) d_[i + 1] = 0.0;
      const double alpha = d_[i] / secant;
      const double beta = d_[i + 1] / secant;
      const double r2 = alpha * alpha + beta * beta;
      if (r2 > 9.0) {
        const double tau = 3.0 / std::sqrt(r2);
        d_[i] = tau * alpha * secant;
        d_[i + 1] = tau * beta * secant;
      }
    }
  }

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> d_;
};

}  // namespace cosmoqm
