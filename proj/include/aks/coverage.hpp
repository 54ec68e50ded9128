// coverage.hpp
//
// Recursive binning of the time axis and the coverage term c(I).
//
// The axis [0, T) is halved recursively; a node [lo, hi) has children
// [lo, mid) and [mid, hi) with mid = lo + (hi - lo) / 2, so the left child
// gets the smaller half of an odd range. c(I) is the negated sum, over levels
// 1..L and over sibling pairs at that level, of |m_left - m_right| where m is
// the number of selected indices inside each sibling.
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <span>
#include <vector>

#include "aks/core.hpp"

namespace aks {

/// Half-open index range [lo, hi).
struct Range {
  Index lo = 0;
  Index hi = 0;

  std::size_t size() const noexcept { return hi - lo; }
  bool empty() const noexcept { return hi <= lo; }
  Index mid() const noexcept { return lo + (hi - lo) / 2; }
  bool contains(Index i) const noexcept { return i >= lo && i < hi; }

  friend bool operator==(const Range&, const Range&) = default;
};

/// Every node of the halving hierarchy down to max_level. Level l holds 2^l
/// ranges, some of them empty when T < 2^l.
class BinTree {
public:
  static constexpr int kMaxMaterializedLevel = 22;

  BinTree(std::size_t horizon, int max_level) : horizon_(horizon), max_level_(max_level) {
    if (max_level < 0) throw Error("max_level must be >= 0");
    if (max_level > kMaxMaterializedLevel)
      throw Error("BinTree level " + std::to_string(max_level) + " too deep to materialize");
    levels_.push_back({Range{0, horizon}});
    for (int l = 0; l < max_level; ++l) {
      std::vector<Range> next;
      next.reserve(levels_.back().size() * 2);
      for (const auto& r : levels_.back()) {
        next.push_back({r.lo, r.mid()});
        next.push_back({r.mid(), r.hi});
      }
      levels_.push_back(std::move(next));
    }
  }

  std::size_t horizon() const noexcept { return horizon_; }
  int max_level() const noexcept { return max_level_; }
  const std::vector<Range>& level(int l) const {
    if (l < 0 || l > max_level_) throw Error("level " + std::to_string(l) + " out of range");
    return levels_[static_cast<std::size_t>(l)];
  }

private:
  std::size_t horizon_;
  int max_level_;
  std::vector<std::vector<Range>> levels_;
};

/// Non-empty ranges at `level` in left-to-right order, without materializing
/// the full tree. When T <= 2^level every returned range has length 1.
inline std::vector<Range> level_ranges(std::size_t horizon, int level) {
  std::vector<Range> out;
  std::vector<std::pair<Range, int>> stack{{Range{0, horizon}, 0}};
  while (!stack.empty()) {
    auto [r, depth] = stack.back();
    stack.pop_back();
    if (r.empty()) continue;
    if (depth == level || r.size() == 1) {
      out.push_back(r);
      continue;
    }
    // right pushed first so the left child is visited first
    stack.push_back({Range{r.mid(), r.hi}, depth + 1});
    stack.push_back({Range{r.lo, r.mid()}, depth + 1});
  }
  return out;
}

namespace detail {

inline std::size_t count_in(std::span<const Index> sorted, Range r) {
  auto lo = std::lower_bound(sorted.begin(), sorted.end(), r.lo);
  auto hi = std::lower_bound(lo, sorted.end(), r.hi);
  return static_cast<std::size_t>(hi - lo);
}

// Penalty of the subtree rooted at `r`; `sorted` holds exactly the indices in r.
inline long long coverage_penalty(std::span<const Index> sorted, Range r, int depth, int max_level) {
  if (depth >= max_level || sorted.size() == 0) return 0;
  const Index mid = r.mid();
  auto split = std::lower_bound(sorted.begin(), sorted.end(), mid);
  const auto left = static_cast<long long>(split - sorted.begin());
  const auto right = static_cast<long long>(sorted.end() - split);
  return std::llabs(left - right) +
         coverage_penalty(sorted.first(static_cast<std::size_t>(left)), {r.lo, mid}, depth + 1, max_level) +
         coverage_penalty(sorted.last(static_cast<std::size_t>(right)), {mid, r.hi}, depth + 1, max_level);
}

inline void check_indices(std::span<const Index> indices, std::size_t horizon) {
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= horizon)
      throw Error("index " + std::to_string(indices[i]) + " out of range for T=" + std::to_string(horizon));
    if (i > 0 && indices[i] <= indices[i - 1]) throw Error("indices must be strictly increasing");
  }
}

}  // namespace detail

/// Number of selected indices in each bin at `level` (1 <= level <= L),
/// left to right.
inline std::vector<std::size_t> bin_counts(std::span<const Index> indices, const BinTree& tree, int level) {
  if (level < 1 || level > tree.max_level())
    throw Error("level " + std::to_string(level) + " outside 1.." + std::to_string(tree.max_level()));
  detail::check_indices(indices, tree.horizon());
  std::vector<std::size_t> counts;
  for (const auto& r : tree.level(level)) counts.push_back(detail::count_in(indices, r));
  return counts;
}

inline std::vector<std::size_t> bin_counts(const KeyframeSelection& sel, const BinTree& tree, int level) {
  return bin_counts(sel.indices, tree, level);
}

/// c(I) for strictly increasing indices over [0, T); always <= 0.
/// Subtrees holding no selected index contribute nothing and are not visited,
/// so deep L is cheap.
inline double coverage(std::span<const Index> indices, std::size_t horizon, int max_level) {
  if (max_level < 0) throw Error("max_level must be >= 0");
  detail::check_indices(indices, horizon);
  return -static_cast<double>(detail::coverage_penalty(indices, {0, horizon}, 0, max_level));
}

inline double coverage(const KeyframeSelection& sel, std::size_t horizon, int max_level) {
  return coverage(sel.indices, horizon, max_level);
}

/// Unordered pairs (i < j) of selected indices closer than r; the raw pair
/// count behind Ripley's K-function estimate.
inline std::size_t ripley_k(std::span<const Index> indices, double r) {
  if (!(r > 0.0)) throw Error("ripley_k radius must be > 0");
  std::vector<Index> sorted(indices.begin(), indices.end());
  std::sort(sorted.begin(), sorted.end());
  std::size_t pairs = 0;
  std::size_t lo = 0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    while (static_cast<double>(sorted[j] - sorted[lo]) >= r) ++lo;
    pairs += j - lo;
  }
  return pairs;
}

inline std::size_t ripley_k(const KeyframeSelection& sel, double r) { return ripley_k(sel.indices, r); }

}  // namespace aks
