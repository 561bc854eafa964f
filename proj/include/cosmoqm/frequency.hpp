#pragma once

// Relative-frequency statistics for one outcome k over N replicated
// observers in the product state. The frequency observable's spectrum is
// {m/N : m = 0..N}; on the product state its spectral measure is binomial
// in p = |alpha_k|^2, so it is handled through that measure instead of a
// 2^N-dimensional matrix.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cosmoqm/branches.hpp"
#include "cosmoqm/error.hpp"
#include "cosmoqm/numeric.hpp"
#include "cosmoqm/quantum.hpp"
#include "cosmoqm/random.hpp"

namespace cosmoqm {

struct FrequencySpectrum {
  std::vector<double> eigenvalues;  // m / N
  std::vector<double> log_weights;  // ln[C(N,m) p^m (1-p)^(N-m)]

  double weight(std::size_t m) const { return std::exp(log_weights[m]); }
};

namespace detail {

inline double outcome_probability(const ObserverState& state, std::size_t k) {
  if (k >= state.dimension()) {
    throw Error(ErrorCode::OutcomeOutOfRange, "outcome " + std::to_string(k) + " outside 0.." +
                                                  std::to_string(state.dimension() - 1));
  }
  return std::norm(state[k]);
}

}  // namespace detail

inline FrequencySpectrum frequency_spectrum(const ObserverState& state, std::size_t k, std::uint64_t N) {
  const double p = detail::outcome_probability(state, k);
  if (N < 1) throw Error(ErrorCode::InvalidArgument, "N must be positive");
  const double log_p = p > 0.0 ? std::log(p) : numeric::kNegInf;
  const double log_q = p < 1.0 ? std::log1p(-p) : numeric::kNegInf;

  FrequencySpectrum s;
  s.eigenvalues.reserve(N + 1);
  s.log_weights.reserve(N + 1);
  const auto n = static_cast<double>(N);
  for (std::uint64_t m = 0; m <= N; ++m) {
    const auto md = static_cast<double>(m);
    s.eigenvalues.push_back(md / n);
    const double lw = numeric::log_binomial(N, m) + numeric::xlogy(md, log_p) +
                      numeric::xlogy(n - md, log_q);
    s.log_weights.push_back(std::isnan(lw) ? numeric::kNegInf : lw);
  }
  return s;
}

/// Mean of the relative frequency: the binomial mean Np/N, which is |alpha_k|^2
/// for every N.
inline double frequency_expectation(const ObserverState& state, std::size_t k, std::uint64_t N) {
  if (N < 1) throw Error(ErrorCode::InvalidArgument, "N must be positive");
  return detail::outcome_probability(state, k);
}

/// p (1 - p) / N.
inline double frequency_variance(const ObserverState& state, std::size_t k, std::uint64_t N) {
  if (N < 1) throw Error(ErrorCode::InvalidArgument, "N must be positive");
  const double p = detail::outcome_probability(state, k);
  return p * (1.0 - p) / static_cast<double>(N);
}

/// Spectral moments computed by direct summation over the spectrum; used to
/// cross-check the closed forms above.
struct SpectralMoments {
  double total_weight;
  double mean;
  double central_second;
  double weight_outside;  // mass outside [p - w, p + w] for the requested w
};

inline SpectralMoments spectral_moments(const FrequencySpectrum& s, double center, double half_width) {
  numeric::CompensatedSum total, mean, second, outside;
  for (std::size_t m = 0; m < s.eigenvalues.size(); ++m) {
    const double w = s.weight(m);
    const double x = s.eigenvalues[m];
    total.add(w);
    mean.add(x * w);
    second.add((x - center) * (x - center) * w);
    if (std::abs(x - center) > half_width) outside.add(w);
  }
  return {total.value(), mean.value(), second.value(), outside.value()};
}

struct ConvergenceRow {
  std::uint64_t N;
  double analytic_variance;
  double empirical_variance;
  std::uint64_t trials;
  std::uint64_t seed;
};

/// For each N, draws `trials` independent N-observer samples and compares the
/// sample variance of the outcome-k frequency with p(1-p)/N. Sample i of
/// row r uses stream rng.split(r).split(i), so rows are reproducible
/// individually.
inline std::vector<ConvergenceRow> born_convergence_table(const ObserverState& state,
                                                          std::span<const std::uint64_t> n_list,
                                                          std::uint64_t trials, const RngStream& rng,
                                                          std::size_t k = 0) {
  if (n_list.empty()) throw Error(ErrorCode::InvalidArgument, "N list is empty");
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (n_list[i] <= n_list[i - 1]) {
      throw Error(ErrorCode::InvalidArgument, "N list must be strictly increasing");
    }
  }
  if (trials < 100) throw Error(ErrorCode::InvalidArgument, "need at least 100 trials");
  (void)detail::outcome_probability(state, k);

  const OutcomeSampler sampler(state);
  std::vector<ConvergenceRow> rows;
  rows.reserve(n_list.size());
  for (std::size_t r = 0; r < n_list.size(); ++r) {
    const std::uint64_t N = n_list[r];
    if (N < 1) throw Error(ErrorCode::InvalidArgument, "N must be positive");
    const RngStream row_stream = rng.split(r);
    // Welford update of the sample variance
    double mean = 0.0;
    double m2 = 0.0;
    for (std::uint64_t i = 0; i < trials; ++i) {
      RngStream stream = row_stream.split(i);
      std::uint64_t hits = 0;
      for (std::uint64_t j = 0; j < N; ++j) hits += (sampler(stream) == k);
      const double freq = static_cast<double>(hits) / static_cast<double>(N);
      const double delta = freq - mean;
      mean += delta / static_cast<double>(i + 1);
      m2 += delta * (freq - mean);
    }
    rows.push_back({N, frequency_variance(state, k, N), m2 / static_cast<double>(trials - 1), trials,
                    rng.seed()});
  }
  return rows;
}

}  // namespace cosmoqm
