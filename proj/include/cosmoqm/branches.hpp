#pragma once

// Branch assignments f_N : {observers} -> {outcomes}, their Born weights and
// the counts-vector compression licensed by all observers sharing the same
// amplitude moduli. Every probability is carried as a natural log.

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cosmoqm/error.hpp"
#include "cosmoqm/numeric.hpp"
#include "cosmoqm/quantum.hpp"
#include "cosmoqm/random.hpp"

namespace cosmoqm {

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;
inline constexpr std::uint64_t kDefaultTableCap = 10'000'000;

/// One outcome (0-based) per observer.
struct BranchAssignment {
  std::vector<std::uint32_t> outcomes;

  std::size_t observers() const noexcept { return outcomes.size(); }
  friend bool operator==(const BranchAssignment&, const BranchAssignment&) = default;
};

/// How many observers saw each outcome; sums to N.
using OutcomeCounts = std::vector<std::uint64_t>;

struct BranchWeight {
  /// ln |p^{f_N}_N|^2; -inf marks a zero-probability branch.
  double log_probability = 0.0;
  std::variant<BranchAssignment, OutcomeCounts> branch;

  bool impossible() const noexcept { return log_probability == numeric::kNegInf; }
  double probability() const noexcept { return std::exp(log_probability); }
  double log10_probability() const noexcept { return log_probability / std::numbers::ln10; }
};

inline OutcomeCounts count_outcomes(std::span<const std::uint32_t> outcomes, std::size_t K) {
  OutcomeCounts counts(K, 0);
  for (auto k : outcomes) {
    if (k >= K) {
      throw Error(ErrorCode::OutcomeOutOfRange,
                  "outcome " + std::to_string(k) + " outside 0.." + std::to_string(K - 1));
    }
    ++counts[k];
  }
  return counts;
}

/// K^N, saturating at cap + 1.
inline std::uint64_t capped_power(std::uint64_t K, std::uint64_t N, std::uint64_t cap) {
  std::uint64_t total = 1;
  for (std::uint64_t i = 0; i < N; ++i) {
    if (total > cap / K) return cap + 1;
    total *= K;
  }
  return total;
}

/// Every f_N in lexicographic order (observer 0 most significant).
inline std::vector<BranchAssignment> enumerate_branches(std::size_t K, std::size_t N,
                                                        std::uint64_t cap = kDefaultEnumerationCap) {
  if (K < 1 || N < 1) throw Error(ErrorCode::InvalidArgument, "K and N must be positive");
  const std::uint64_t total = capped_power(K, N, cap);
  if (total > cap) {
    throw Error(ErrorCode::EnumerationTooLarge,
                std::to_string(K) + "^" + std::to_string(N) + " exceeds cap " + std::to_string(cap));
  }
  std::vector<BranchAssignment> out;
  out.reserve(total);
  std::vector<std::uint32_t> odometer(N, 0);
  for (std::uint64_t b = 0; b < total; ++b) {
    out.push_back({odometer});
    for (std::size_t i = N; i-- > 0;) {
      if (++odometer[i] < K) break;
      odometer[i] = 0;
    }
  }
  return out;
}

namespace detail {

inline std::vector<double> log_probabilities(const ObserverState& state) {
  std::vector<double> out;
  for (double p : born_probabilities(state).probabilities) {
    out.push_back(p > 0.0 ? std::log(p) : numeric::kNegInf);
  }
  return out;
}

/// sum_k c_k ln p_k in a fixed order, so any permutation of the observers
/// gives a bit-identical result.
inline double log_weight_of_counts(const OutcomeCounts& counts, std::span<const double> log_p) {
  long double acc = 0.0L;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0) continue;
    if (log_p[k] == numeric::kNegInf) return numeric::kNegInf;
    acc += static_cast<long double>(counts[k]) * static_cast<long double>(log_p[k]);
  }
  return static_cast<double>(acc);
}

}  // namespace detail

inline BranchWeight branch_log_probability(const ObserverState& state,
                                           const BranchAssignment& assignment) {
  if (assignment.outcomes.empty()) {
    throw Error(ErrorCode::InvalidArgument, "assignment must cover at least one observer");
  }
  const auto counts = count_outcomes(assignment.outcomes, state.dimension());
  const auto log_p = detail::log_probabilities(state);
  return {detail::log_weight_of_counts(counts, log_p), assignment};
}

enum class SumPath { Auto, BruteForce, Compressed };

struct CompressedEntry {
  OutcomeCounts counts;
  double log_multiplicity;  // ln(N! / prod c_k!)
  double log_probability;   // per-branch: sum_k c_k ln p_k

  /// Total probability of all branches sharing these counts.
  double probability() const noexcept { return std::exp(log_multiplicity + log_probability); }
};

struct CompressedEnsemble {
  std::size_t K = 0;
  std::size_t N = 0;
  std::vector<CompressedEntry> entries;

  double log_total_probability() const {
    std::vector<double> terms;
    terms.reserve(entries.size());
    for (const auto& e : entries) terms.push_back(e.log_multiplicity + e.log_probability);
    return numeric::log_sum_exp(terms);
  }
  double total_probability() const { return std::exp(log_total_probability()); }
};

/// C(N + K - 1, K - 1): number of counts vectors.
inline double log_table_size(std::size_t K, std::size_t N) {
  return numeric::log_binomial(N + K - 1, K - 1);
}

/// Groups the K^N branches by counts vector, in descending lexicographic
/// order of counts: (N,0,..,0) first, (0,..,0,N) last.
inline CompressedEnsemble compress_branches(const ObserverState& state, std::size_t N,
                                            std::uint64_t table_cap = kDefaultTableCap) {
  const std::size_t K = state.dimension();
  if (N < 1) throw Error(ErrorCode::InvalidArgument, "N must be positive");
  const double log_size = log_table_size(K, N);
  if (log_size > std::log(static_cast<double>(table_cap)) + 1e-9) {
    throw Error(ErrorCode::TableTooLarge, "counts table for K=" + std::to_string(K) +
                                              ", N=" + std::to_string(N) + " exceeds cap " +
                                              std::to_string(table_cap));
  }
  const auto log_p = detail::log_probabilities(state);

  CompressedEnsemble out{K, N, {}};
  out.entries.reserve(static_cast<std::size_t>(std::llround(std::exp(log_size))));
  OutcomeCounts c(K, 0);
  c[0] = N;
  while (true) {
    out.entries.push_back({c, numeric::log_multinomial(c), detail::log_weight_of_counts(c, log_p)});
    // rightmost movable unit among the first K-1 slots
    std::size_t i = K - 1;
    for (std::size_t j = K - 1; j-- > 0;) {
      if (c[j] > 0) {
        i = j;
        break;
      }
    }
    if (i == K - 1) break;  // reached (0, .., 0, N)
    std::uint64_t tail = 0;
    for (std::size_t j = i + 1; j < K; ++j) {
      tail += c[j];
      c[j] = 0;
    }
    --c[i];
    c[i + 1] = tail + 1;
  }
  return out;
}

/// Sum over all K^N branches of |p^{f_N}_N|^2.
///
/// The brute-force path multiplies Born weights branch by branch without
/// touching the compression code; the compressed path sums the counts table.
inline double branch_probability_sum(const ObserverState& state, std::size_t N,
                                     SumPath path = SumPath::Auto,
                                     std::uint64_t enumeration_cap = kDefaultEnumerationCap,
                                     std::uint64_t table_cap = kDefaultTableCap) {
  const std::size_t K = state.dimension();
  if (N < 1) throw Error(ErrorCode::InvalidArgument, "N must be positive");
  const std::uint64_t total = capped_power(K, N, enumeration_cap);
  const bool fits = total <= enumeration_cap;
  if (path == SumPath::BruteForce && !fits) {
    throw Error(ErrorCode::EnumerationTooLarge,
                std::to_string(K) + "^" + std::to_string(N) + " exceeds cap");
  }
  if (path == SumPath::Compressed || (path == SumPath::Auto && !fits)) {
    return compress_branches(state, N, table_cap).total_probability();
  }

  const auto p = born_probabilities(state).probabilities;
  numeric::CompensatedSum sum;
  std::vector<std::uint32_t> odometer(N, 0);
  for (std::uint64_t b = 0; b < total; ++b) {
    double w = 1.0;
    for (auto k : odometer) w *= p[k];
    sum.add(w);
    for (std::size_t i = N; i-- > 0;) {
      if (++odometer[i] < K) break;
      odometer[i] = 0;
    }
  }
  return sum.value();
}

/// The single most probable branch: every observer sees argmax_k p_k (lowest
/// index on ties), probability (max_k p_k)^N.
inline BranchWeight max_branch_probability(const ObserverState& state, std::size_t N) {
  if (N < 1) throw Error(ErrorCode::InvalidArgument, "N must be positive");
  const auto dist = born_probabilities(state);
  const std::size_t k = dist.argmax();
  OutcomeCounts counts(state.dimension(), 0);
  counts[k] = N;
  return {static_cast<double>(N) * std::log(dist[k]), std::move(counts)};
}

struct DecayRow {
  std::uint64_t N;
  double log10_max_branch_probability;
};

/// N * log10(max_k p_k) for each N: the largest branch probability of the
/// N-observer truncation, which vanishes as N grows whenever max p_k < 1.
inline std::vector<DecayRow> collapse_decay_curve(const ObserverState& state,
                                                  std::span<const std::uint64_t> n_list) {
  if (n_list.empty()) throw Error(ErrorCode::InvalidArgument, "N list is empty");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1 || (i > 0 && n_list[i] <= n_list[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "N list must be positive and strictly increasing");
    }
  }
  const double slope = std::log10(born_probabilities(state).max());
  std::vector<DecayRow> rows;
  rows.reserve(n_list.size());
  for (auto n : n_list) rows.push_back({n, static_cast<double>(n) * slope});
  return rows;
}

enum class CollapseMode {
  Correlated,   // one Born draw shared by every observer
  Independent,  // one Born draw per observer
};

inline std::vector<std::uint32_t> simulate_finite_collapse(const ObserverState& state, std::size_t N,
                                                           RngStream& rng, CollapseMode mode) {
  if (N < 1) throw Error(ErrorCode::InvalidArgument, "N must be positive");
  const OutcomeSampler sampler(state);
  if (mode == CollapseMode::Correlated) {
    return std::vector<std::uint32_t>(N, static_cast<std::uint32_t>(sampler(rng)));
  }
  std::vector<std::uint32_t> out(N);
  for (auto& o : out) o = static_cast<std::uint32_t>(sampler(rng));
  return out;
}

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t degrees_of_freedom = 0;
  double p_value = 1.0;
};

/// Pearson goodness of fit of observed counts against a distribution.
/// Outcomes with zero expected count are skipped (and must be unobserved).
inline ChiSquareResult chi_square_test(const OutcomeCounts& observed, const OutcomeDistribution& dist) {
  if (observed.size() != dist.size()) {
    throw Error(ErrorCode::DimensionMismatch, "counts and distribution differ in length");
  }
  std::uint64_t n = 0;
  for (auto c : observed) n += c;
  ChiSquareResult r;
  std::size_t cells = 0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    const double expected = static_cast<double>(n) * dist[k];
    if (expected == 0.0) {
      if (observed[k] != 0) {
        r.statistic = std::numeric_limits<double>::infinity();
        r.p_value = 0.0;
        return r;
      }
      continue;
    }
    const double diff = static_cast<double>(observed[k]) - expected;
    r.statistic += diff * diff / expected;
    ++cells;
  }
  if (cells < 2) return r;
  r.degrees_of_freedom = cells - 1;
  r.p_value = boost::math::gamma_q(0.5 * static_cast<double>(r.degrees_of_freedom), 0.5 * r.statistic);
  return r;
}

}  // namespace cosmoqm
