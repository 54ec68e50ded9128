// oracle.hpp
//
// Exhaustive optimizers used to check the strategies on small instances.
// Every size-M subset is enumerated; ties resolve to the lexicographically
// smallest index sequence no matter how the enumeration is split across
// worker threads.
#pragma once

#include <atomic>
#include <cstddef>
#include <limits>
#include <optional>
#include <thread>
#include <vector>

#include "aks/core.hpp"
#include "aks/coverage.hpp"
#include "aks/strategies.hpp"

namespace aks {

struct OracleConfig {
  std::size_t max_subsets = 2'000'000;  // enumeration cap on C(T, M)
  unsigned workers = 0;                  // 0: hardware concurrency
};

struct OracleResult {
  KeyframeSelection selection;
  double value = 0.0;      // objective at the oracle's lambda / L
  double coverage = 0.0;   // c(I) at L
};

/// C(n, k), saturating at SIZE_MAX.
inline std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 c = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    c = c * (n - k + i) / i;
    if (c > std::numeric_limits<std::size_t>::max()) return std::numeric_limits<std::size_t>::max();
  }
  return static_cast<std::size_t>(c);
}

namespace detail {

// Best subset under `better(key_a, key_b)` among subsets whose first element
// is `first`, visiting them in lexicographic order.
template <typename Key, typename Eval>
std::optional<std::pair<Key, std::vector<Index>>> best_with_first(std::size_t horizon, std::size_t m, Index first,
                                                                  const Eval& eval) {
  if (first + m > horizon) return std::nullopt;
  std::vector<Index> cur(m);
  for (std::size_t i = 0; i < m; ++i) cur[i] = first + i;
  std::optional<std::pair<Key, std::vector<Index>>> best;
  while (true) {
    Key key = eval(cur);
    if (!best || best->first < key) best.emplace(key, cur);
    // advance positions 1..m-1, keeping cur[0] fixed
    std::size_t pos = m;
    while (pos > 1) {
      --pos;
      if (cur[pos] < horizon - (m - pos)) break;
      if (pos == 1) return best;
    }
    if (m == 1 || pos == 0) return best;
    ++cur[pos];
    for (std::size_t j = pos + 1; j < m; ++j) cur[j] = cur[j - 1] + 1;
  }
}

template <typename Key, typename Eval>
std::pair<Key, std::vector<Index>> exhaustive(std::size_t horizon, std::size_t m, const OracleConfig& cfg,
                                              const Eval& eval) {
  const std::size_t count = binomial(horizon, m);
  if (count > cfg.max_subsets)
    throw Error("instance has " + std::to_string(count) + " subsets, above the enumeration cap of " +
                std::to_string(cfg.max_subsets));
  const std::size_t firsts = horizon - m + 1;
  std::vector<std::optional<std::pair<Key, std::vector<Index>>>> per_first(firsts);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t f = next++; f < firsts; f = next++) per_first[f] = best_with_first<Key>(horizon, m, f, eval);
  };
  unsigned workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, firsts));
  if (workers <= 1 || count < 4096) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  // ascending first element, strict improvement: canonical lexicographic tie-break
  std::optional<std::pair<Key, std::vector<Index>>> best;
  for (auto& cand : per_first)
    if (cand && (!best || best->first < cand->first)) best = std::move(cand);
  return std::move(*best);
}

inline std::size_t oracle_budget(std::size_t horizon, std::size_t m) {
  if (horizon < 1) throw Error("empty score series");
  if (m < 1) throw Error("M must be >= 1");
  return std::min(m, horizon);
}

}  // namespace detail

/// Maximizes sum(s) + lambda * c(I) over every size-min(M, T) subset.
inline OracleResult brute_force(const ScoreSeries& series, std::size_t m, double lambda, int max_level,
                                const OracleConfig& cfg = {}) {
  if (!(lambda >= 0.0)) throw Error("lambda must be >= 0");
  if (max_level < 0) throw Error("max_level must be >= 0");
  const auto scores = series.scores();
  const std::size_t k = detail::oracle_budget(series.size(), m);
  auto [value, best] = detail::exhaustive<double>(series.size(), k, cfg, [&](const std::vector<Index>& subset) {
    return objective(scores, subset, lambda, max_level);
  });
  SelectionParams p;
  p.m = m;
  p.max_level = max_level;
  p.lambda = lambda;
  p.s_thr = 0.0;
  const double cov = coverage(best, series.size(), max_level);
  return {KeyframeSelection{std::move(best), Strategy::ORACLE, p, series.size(), series.id()}, value, cov};
}

/// The lambda -> infinity limit: maximize c(I) first, then sum(s).
inline OracleResult lexicographic(const ScoreSeries& series, std::size_t m, int max_level,
                                  const OracleConfig& cfg = {}) {
  if (max_level < 0) throw Error("max_level must be >= 0");
  const auto scores = series.scores();
  const std::size_t k = detail::oracle_budget(series.size(), m);
  using Key = std::pair<double, double>;  // (coverage, score sum)
  auto [key, best] = detail::exhaustive<Key>(series.size(), k, cfg, [&](const std::vector<Index>& subset) {
    return Key{coverage(subset, scores.size(), max_level), objective(scores, subset, 0.0, max_level)};
  });
  SelectionParams p;
  p.m = m;
  p.max_level = max_level;
  p.s_thr = 0.0;
  return {KeyframeSelection{std::move(best), Strategy::ORACLE, p, series.size(), series.id()}, key.second,
          key.first};
}

}  // namespace aks
