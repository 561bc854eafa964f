#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>

namespace cosmoqm::numeric {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// ln(sum exp(x_i)), stable for arguments far below zero. Empty or all -inf
/// input returns -inf.
inline double log_sum_exp(std::span<const double> xs) noexcept {
  double hi = kNegInf;
  for (double x : xs) hi = std::max(hi, x);
  if (hi == kNegInf) return kNegInf;
  CompensatedSum acc;
  for (double x : xs) acc.add(std::exp(x - hi));
  return hi + std::log(acc.value());
}

/// x * ln(p) with the measure-theoretic convention 0 * ln 0 = 0.
inline double xlogy(double count, double log_p) noexcept {
  return count == 0.0 ? 0.0 : count * log_p;
}

/// Exact binomial coefficient for n <= 60 (always fits in 64 bits).
constexpr std::uint64_t binomial_exact(unsigned n, unsigned k) noexcept {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t c = 1;
  for (unsigned i = 1; i <= k; ++i) {
    // c * (n - k + i) is divisible by i; split the product to stay in range.
    c = c / i * (n - k + i) + c % i * (n - k + i) / i;
  }
  return c;
}

inline constexpr unsigned kExactBinomialLimit = 60;

/// ln C(n, k): exact integer arithmetic up to n = 60, log-gamma above.
inline double log_binomial(std::uint64_t n, std::uint64_t k) noexcept {
  if (k > n) return kNegInf;
  if (n <= kExactBinomialLimit) {
    return std::log(static_cast<double>(
        binomial_exact(static_cast<unsigned>(n), static_cast<unsigned>(k))));
  }
  const auto nd = static_cast<double>(n);
  const auto kd = static_cast<double>(k);
  return std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0);
}

/// ln(n! / prod c_i!) for a counts vector summing to n.
template <typename Counts>
double log_multinomial(const Counts& counts) noexcept {
  std::uint64_t n = 0;
  for (auto c : counts) n += static_cast<std::uint64_t>(c);
  // Peel off one binomial at a time so small cases stay exact.
  double acc = 0.0;
  std::uint64_t remaining = n;
  for (auto c : counts) {
    acc += log_binomial(remaining, static_cast<std::uint64_t>(c));
    remaining -= static_cast<std::uint64_t>(c);
  }
  return acc;
}

/// Five-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre5 {
  static constexpr std::array<double, 5> nodes{
      -0.9061798459386639927976269, -0.5384693101056830910363144, 0.0,
      0.5384693101056830910363144, 0.9061798459386639927976269};
  static constexpr std::array<double, 5> weights{
      0.2369268850561890875142640, 0.4786286704993664680412915,
      0.5688888888888888888888889, 0.4786286704993664680412915,
      0.2369268850561890875142640};

  template <typename F>
  static double integrate(F&& f, double lo, double hi) {
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      acc += weights[i] * f(mid + half * nodes[i]);
    }
    return acc * half;
  }
};

}  // namespace cosmoqm::numeric
