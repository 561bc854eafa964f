#pragma once

// Pure observer states over a fixed K-outcome measurement basis.
// Outcome indices are 0-based throughout the C++ API.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "cosmoqm/error.hpp"
#include "cosmoqm/random.hpp"

namespace cosmoqm {

using Amplitude = std::complex<double>;

inline constexpr double kNormalizationTolerance = 1e-12;
inline constexpr double kRescaleWarningThreshold = 1e-9;
inline constexpr double kDefaultIndistinguishabilityTolerance = 1e-12;

/// Unit-norm vector of K >= 2 amplitudes. The same state stands for every
/// replicated observer, since only the moduli |alpha_k| enter the analysis.
class ObserverState {
 public:
  std::span<const Amplitude> amplitudes() const noexcept { return amplitudes_; }
  std::size_t dimension() const noexcept { return amplitudes_.size(); }
  const Amplitude& operator[](std::size_t k) const { return amplitudes_[k]; }

  /// True when construction had to rescale the input norm by more than 1e-9.
  bool was_rescaled() const noexcept { return was_rescaled_; }

  friend ObserverState make_state(std::span<const Amplitude>);
  friend ObserverState basis_state(std::size_t, std::size_t);

 private:
  ObserverState(std::vector<Amplitude> amplitudes, bool rescaled)
      : amplitudes_(std::move(amplitudes)), was_rescaled_(rescaled) {}

  std::vector<Amplitude> amplitudes_;
  bool was_rescaled_ = false;
};

inline ObserverState make_state(std::span<const Amplitude> amplitudes) {
  if (amplitudes.size() < 2) {
    throw Error(ErrorCode::DimensionTooSmall,
                "need K >= 2 amplitudes, got " + std::to_string(amplitudes.size()));
  }
  long double norm2 = 0.0L;
  for (const auto& z : amplitudes) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw Error(ErrorCode::ZeroVector, "amplitudes must be finite");
    }
    norm2 += static_cast<long double>(std::norm(z));
  }
  if (norm2 == 0.0L) {
    throw Error(ErrorCode::ZeroVector, "all amplitudes are zero");
  }
  const long double norm = std::sqrt(norm2);
  std::vector<Amplitude> out;
  out.reserve(amplitudes.size());
  for (const auto& z : amplitudes) {
    out.emplace_back(static_cast<double>(z.real() / norm), static_cast<double>(z.imag() / norm));
  }
  const bool rescaled = std::abs(static_cast<double>(norm) - 1.0) > kRescaleWarningThreshold;
  return ObserverState(std::move(out), rescaled);
}

inline ObserverState make_state(std::initializer_list<Amplitude> amplitudes) {
  return make_state(std::span<const Amplitude>(amplitudes.begin(), amplitudes.size()));
}

/// e_k in dimension K.
inline ObserverState basis_state(std::size_t dimension, std::size_t k) {
  if (dimension < 2) throw Error(ErrorCode::DimensionTooSmall, "need K >= 2");
  if (k >= dimension) throw Error(ErrorCode::OutcomeOutOfRange, "basis index out of range");
  std::vector<Amplitude> e(dimension, Amplitude{0.0, 0.0});
  e[k] = Amplitude{1.0, 0.0};
  return ObserverState(std::move(e), false);
}

struct OutcomeDistribution {
  std::vector<double> probabilities;

  std::size_t size() const noexcept { return probabilities.size(); }
  double operator[](std::size_t k) const { return probabilities[k]; }

  /// Index of the largest probability, lowest index on ties.
  std::size_t argmax() const noexcept {
    return static_cast<std::size_t>(
        std::distance(probabilities.begin(),
                      std::max_element(probabilities.begin(), probabilities.end())));
  }
  double max() const noexcept { return probabilities[argmax()]; }
};

/// p_k = |alpha_k|^2.
inline OutcomeDistribution born_probabilities(const ObserverState& state) {
  OutcomeDistribution d;
  d.probabilities.reserve(state.dimension());
  for (const auto& z : state.amplitudes()) d.probabilities.push_back(std::norm(z));
  return d;
}

/// Inverse-CDF sampler over the half-open intervals [c_{k-1}, c_k).
class OutcomeSampler {
 public:
  explicit OutcomeSampler(const OutcomeDistribution& dist) : cdf_(dist.size()) {
    double acc = 0.0;
    for (std::size_t k = 0; k < dist.size(); ++k) {
      acc += dist[k];
      cdf_[k] = acc;
      if (dist[k] > 0.0) last_possible_ = k;
    }
  }
  explicit OutcomeSampler(const ObserverState& state) : OutcomeSampler(born_probabilities(state)) {}

  std::size_t operator()(RngStream& rng) const noexcept { return draw(rng.uniform()); }

  std::size_t draw(double u) const noexcept {
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const auto k = static_cast<std::size_t>(std::distance(cdf_.begin(), it));
    // u can land past a cumulative total that rounded below 1
    return std::min(k, last_possible_);
  }

 private:
  std::vector<double> cdf_;
  std::size_t last_possible_ = 0;
};

inline std::size_t sample_outcome(const ObserverState& state, RngStream& rng) {
  return OutcomeSampler(state)(rng);
}

/// Projects onto e_k. The measured amplitude's phase is dropped, so the result
/// is the canonical basis vector and collapse is idempotent.
inline ObserverState collapse(const ObserverState& state, std::size_t k) {
  if (k >= state.dimension()) {
    throw Error(ErrorCode::OutcomeOutOfRange, "outcome " + std::to_string(k) + " out of range");
  }
  if (std::norm(state[k]) == 0.0) {
    throw Error(ErrorCode::ImpossibleOutcome,
                "outcome " + std::to_string(k) + " has zero probability");
  }
  return basis_state(state.dimension(), k);
}

/// 1 - |<a|b>|^2; zero iff the states agree up to a global phase.
inline double infidelity(const ObserverState& a, const ObserverState& b) {
  if (a.dimension() != b.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "states have different dimensions");
  }
  Amplitude overlap{0.0, 0.0};
  for (std::size_t k = 0; k < a.dimension(); ++k) overlap += std::conj(a[k]) * b[k];
  return std::max(0.0, 1.0 - std::norm(overlap));
}

inline bool indistinguishable(const ObserverState& a, const ObserverState& b,
                              double tolerance = kDefaultIndistinguishabilityTolerance) {
  return infidelity(a, b) <= tolerance;
}

/// A state observed at a given time.
struct TimedState {
  double time;
  ObserverState state;
};

/// Two observers are indistinguishable on [t_i, t_f] when their states agree
/// (up to `tolerance` infidelity) at every sampled time in the window. Both
/// histories must be sampled at the same times inside the window.
inline bool indistinguishable_on_window(std::span<const TimedState> a, std::span<const TimedState> b,
                                        double t_i, double t_f,
                                        double tolerance = kDefaultIndistinguishabilityTolerance) {
  auto in_window = [&](const TimedState& s) { return s.time >= t_i && s.time <= t_f; };
  std::vector<const TimedState*> wa, wb;
  for (const auto& s : a) if (in_window(s)) wa.push_back(&s);
  for (const auto& s : b) if (in_window(s)) wb.push_back(&s);
  if (wa.size() != wb.size()) {
    throw Error(ErrorCode::DimensionMismatch, "histories sample the window differently");
  }
  for (std::size_t i = 0; i < wa.size(); ++i) {
    if (wa[i]->time != wb[i]->time) {
      throw Error(ErrorCode::DimensionMismatch, "histories sample the window at different times");
    }
    if (!indistinguishable(wa[i]->state, wb[i]->state, tolerance)) return false;
  }
  return true;
}

}  // namespace cosmoqm
