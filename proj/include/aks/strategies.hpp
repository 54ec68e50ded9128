// strategies.hpp
//
// Keyframe selection strategies and the relevance + coverage objective
//
//   J(I) = sum_{t in I} s_t + lambda * c(I)
//
//   UNI  evenly spaced frames, ignores scores
//   TOP  the M highest scores (lambda = 0)
//   BIN  per-bin champions over the level-L bins (lambda -> infinity)
//   ADA  adaptive judge-and-split: a segment whose top-quota mean exceeds its
//        overall mean by at least s_thr keeps its top frames; otherwise it is
//        halved and the quota is split between the halves.
//
// Ties always go to the smaller frame index.
#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "aks/core.hpp"
#include "aks/coverage.hpp"

namespace aks {

namespace detail {

// Strict "better" ordering on frames: higher score, then smaller index.
struct BetterFrame {
  std::span<const double> scores;
  bool operator()(Index a, Index b) const {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  }
};

// Appends to `out` the k best frames in r (unordered).
inline void append_top(std::span<const double> scores, Range r, std::size_t k, std::vector<Index>& out) {
  k = std::min(k, r.size());
  if (k == 0) return;
  std::vector<Index> idx(r.size());
  std::iota(idx.begin(), idx.end(), r.lo);
  if (k < idx.size())
    std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), BetterFrame{scores});
  out.insert(out.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
}

inline Index best_in(std::span<const double> scores, Range r) {
  Index best = r.lo;
  for (Index i = r.lo + 1; i < r.hi; ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

inline KeyframeSelection make_selection(std::vector<Index> indices, Strategy strategy,
                                        const SelectionParams& params, std::size_t horizon,
                                        std::string source = {}) {
  std::sort(indices.begin(), indices.end());
  return KeyframeSelection{std::move(indices), strategy, params, horizon, std::move(source)};
}

inline std::size_t clamp_budget(std::size_t m, std::size_t horizon) {
  if (m > horizon) {
    warn("budget M=" + std::to_string(m) + " exceeds T=" + std::to_string(horizon) +
         "; selecting all frames");
    return horizon;
  }
  return m;
}

}  // namespace detail

/// Top-k frames of the whole series, sorted ascending.
inline std::vector<Index> top_indices(std::span<const double> scores, std::size_t k) {
  std::vector<Index> out;
  detail::append_top(scores, {0, scores.size()}, k, out);
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// UNI

/// floor((i + 0.5) * T / M) for i < min(M, T).
inline std::vector<Index> uniform_indices(std::size_t horizon, std::size_t m) {
  if (horizon < 1) throw Error("T must be >= 1");
  if (m < 1) throw Error("M must be >= 1");
  if (m >= horizon) {
    std::vector<Index> all(horizon);
    std::iota(all.begin(), all.end(), Index{0});
    return all;
  }
  std::vector<bool> used(horizon, false);
  std::vector<Index> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    Index t = ((2 * i + 1) * horizon) / (2 * m);
    if (used[t]) {
      // nearest unused index, lower side first on equal distance
      for (std::size_t d = 1; d < horizon; ++d) {
        if (t >= d && !used[t - d]) { t -= d; break; }
        if (t + d < horizon && !used[t + d]) { t += d; break; }
      }
    }
    used[t] = true;
    out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline KeyframeSelection select_uni(std::size_t horizon, std::size_t m) {
  SelectionParams p;
  p.m = m;
  return detail::make_selection(uniform_indices(horizon, detail::clamp_budget(m, horizon)),
                                Strategy::UNI, p, horizon);
}

// ---------------------------------------------------------------------------
// TOP

inline KeyframeSelection select_top(const ScoreSeries& series, std::size_t m) {
  if (m < 1) throw Error("M must be >= 1");
  SelectionParams p;
  p.m = m;
  const auto k = detail::clamp_budget(m, series.size());
  return detail::make_selection(top_indices(series.scores(), k), Strategy::TOP, p, series.size(), series.id());
}

// ---------------------------------------------------------------------------
// BIN

/// Champion-per-bin selection over the non-empty level-L bins
/// (B = min(2^L, T) of them).
///   B >= M: the M best champions.
///   B <  M: every bin gets M / B, the leftmost M % B bins one more; a bin
///           that cannot hold its quota passes the excess to the leftmost
///           bins with room. Each bin contributes its top-quota frames.
inline std::vector<Index> bin_indices(std::span<const double> scores, std::size_t m, int max_level) {
  if (scores.empty()) throw Error("empty score series");
  if (m < 1) throw Error("M must be >= 1");
  const std::size_t horizon = scores.size();
  if (m >= horizon) return top_indices(scores, horizon);
  const auto bins = level_ranges(horizon, max_level);
  const std::size_t b = bins.size();
  std::vector<Index> out;
  if (b >= m) {
    std::vector<Index> champions;
    champions.reserve(b);
    for (const auto& r : bins) champions.push_back(detail::best_in(scores, r));
    if (b > m)
      std::nth_element(champions.begin(), champions.begin() + static_cast<std::ptrdiff_t>(m), champions.end(),
                       detail::BetterFrame{scores});
    champions.resize(m);
    out = std::move(champions);
  } else {
    std::vector<std::size_t> quota(b, m / b);
    for (std::size_t i = 0; i < m % b; ++i) ++quota[i];
    std::size_t excess = 0;
    for (std::size_t i = 0; i < b; ++i) {
      if (quota[i] > bins[i].size()) {
        excess += quota[i] - bins[i].size();
        quota[i] = bins[i].size();
      }
    }
    for (std::size_t i = 0; i < b && excess > 0; ++i) {
      const std::size_t room = std::min(excess, bins[i].size() - quota[i]);
      quota[i] += room;
      excess -= room;
    }
    for (std::size_t i = 0; i < b; ++i) detail::append_top(scores, bins[i], quota[i], out);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline KeyframeSelection select_bin(const ScoreSeries& series, std::size_t m, int max_level) {
  if (max_level < 0) throw Error("max_level must be >= 0");
  SelectionParams p;
  p.m = m;
  p.max_level = max_level;
  detail::clamp_budget(m, series.size());
  return detail::make_selection(bin_indices(series.scores(), m, max_level), Strategy::BIN, p, series.size(),
                                series.id());
}

// ---------------------------------------------------------------------------
// ADA

/// A node of the adaptive split recursion.
struct Segment {
  Range range;
  int depth = 0;
  std::size_t quota_hint = 1;  // top-k size used when judging the segment
  bool completed = false;
  double s_all = 0.0;          // mean score of the segment
  double s_top = 0.0;          // mean of its quota_hint best scores

  double gap() const noexcept { return s_top - s_all; }
};

/// Judge-and-split recursion from the root [0, T) at depth 0 with quota M.
///
/// A segment is completed when any of these holds:
///   quota_hint == 1, length == 1, s_top - s_all >= s_thr, depth == L.
/// Otherwise it is halved; both children get depth + 1 and quota
/// max(1, quota_hint / 2). Returns the completed segments left to right;
/// their ranges partition [0, T).
inline std::vector<Segment> segment_tree(std::span<const double> scores, const SelectionParams& params) {
  params.validate();
  if (scores.empty()) throw Error("empty score series");
  std::vector<Segment> done;
  std::vector<Segment> stack{Segment{{0, scores.size()}, 0, params.m, false}};
  std::vector<double> buf;
  while (!stack.empty()) {
    Segment seg = stack.back();
    stack.pop_back();
    const auto len = seg.range.size();
    const auto first = scores.begin() + static_cast<std::ptrdiff_t>(seg.range.lo);
    buf.assign(first, first + static_cast<std::ptrdiff_t>(len));
    const std::size_t k = std::min(seg.quota_hint, len);
    double total = 0.0;
    for (double v : buf) total += v;
    std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(k - 1), buf.end(), std::greater<>{});
    double top = 0.0;
    for (std::size_t i = 0; i < k; ++i) top += buf[i];
    seg.s_all = total / static_cast<double>(len);
    seg.s_top = top / static_cast<double>(k);
    // mean of the top k never falls below the mean; absorb rounding
    seg.s_top = std::max(seg.s_top, seg.s_all);

    if (seg.quota_hint == 1 || len == 1 || seg.gap() >= params.s_thr || seg.depth >= params.max_level) {
      seg.completed = true;
      done.push_back(seg);
      continue;
    }
    const std::size_t child_quota = std::max<std::size_t>(1, seg.quota_hint / 2);
    const Index mid = seg.range.mid();
    stack.push_back(Segment{{mid, seg.range.hi}, seg.depth + 1, child_quota, false});
    stack.push_back(Segment{{seg.range.lo, mid}, seg.depth + 1, child_quota, false});
  }
  return done;
}

inline std::vector<Segment> segment_tree(const ScoreSeries& series, const SelectionParams& params) {
  return segment_tree(series.scores(), params);
}

/// Length-proportional quotas: floor(M * len_i / T) clamped to len_i, then
/// the shortfall goes one frame at a time to the largest fractional
/// remainders (ties to the left), skipping full segments. Sums to M.
inline std::vector<std::size_t> allocate_quotas(std::span<const std::size_t> lengths, std::size_t m) {
  const std::size_t total = std::accumulate(lengths.begin(), lengths.end(), std::size_t{0});
  if (total < m)
    throw Error("cannot allocate " + std::to_string(m) + " frames over " + std::to_string(total));
  if (total == 0) return std::vector<std::size_t>(lengths.size(), 0);
  std::vector<std::size_t> quota(lengths.size());
  std::vector<std::size_t> rem(lengths.size());  // numerator of the fractional part, over `total`
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    const std::size_t scaled = m * lengths[i];
    quota[i] = std::min(scaled / total, lengths[i]);
    rem[i] = scaled % total;
    assigned += quota[i];
  }
  std::vector<std::size_t> order(lengths.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  while (assigned < m) {
    bool progressed = false;
    for (auto i : order) {
      if (assigned == m) break;
      if (quota[i] < lengths[i]) {
        ++quota[i];
        ++assigned;
        progressed = true;
      }
    }
    if (!progressed) throw Error("quota allocation stalled");
  }
  return quota;
}

inline std::vector<std::size_t> allocate_quotas(std::span<const Segment> segments, std::size_t m) {
  std::vector<std::size_t> lengths;
  lengths.reserve(segments.size());
  for (const auto& s : segments) lengths.push_back(s.range.size());
  return allocate_quotas(lengths, m);
}

inline std::vector<Index> ada_indices(std::span<const double> scores, const SelectionParams& params) {
  const auto segments = segment_tree(scores, params);
  const auto quotas = allocate_quotas(segments, std::min(params.m, scores.size()));
  std::vector<Index> out;
  out.reserve(std::min(params.m, scores.size()));
  for (std::size_t i = 0; i < segments.size(); ++i) detail::append_top(scores, segments[i].range, quotas[i], out);
  std::sort(out.begin(), out.end());
  return out;
}

inline KeyframeSelection select_ada(const ScoreSeries& series, const SelectionParams& params) {
  params.validate();
  detail::clamp_budget(params.m, series.size());
  return detail::make_selection(ada_indices(series.scores(), params), Strategy::ADA, params, series.size(),
                                series.id());
}

// ---------------------------------------------------------------------------
// objective

/// sum of selected scores + lambda * c(I), coverage over L levels.
inline double objective(std::span<const double> scores, std::span<const Index> indices, double lambda,
                        int max_level) {
  if (!(lambda >= 0.0)) throw Error("lambda must be >= 0");
  const double cov = coverage(indices, scores.size(), max_level);
  double sum = 0.0;
  for (auto i : indices) sum += scores[i];
  return lambda == 0.0 ? sum : sum + lambda * cov;
}

inline double objective(const ScoreSeries& series, const KeyframeSelection& sel, double lambda, int max_level) {
  if (sel.horizon != series.size()) throw Error("selection horizon does not match the score series");
  return objective(series.scores(), sel.indices, lambda, max_level);
}

// ---------------------------------------------------------------------------
// dispatch

/// Runs one strategy on the series as given.
inline KeyframeSelection select(const ScoreSeries& series, Strategy strategy, const SelectionParams& params) {
  params.validate();
  KeyframeSelection sel;
  switch (strategy) {
    case Strategy::UNI: sel = select_uni(series.size(), params.m); break;
    case Strategy::TOP: sel = select_top(series, params.m); break;
    case Strategy::BIN: sel = select_bin(series, params.m, params.max_level); break;
    case Strategy::ADA: sel = select_ada(series, params); break;
    case Strategy::ORACLE: throw Error("ORACLE is not a selection strategy; use the oracle module");
  }
  sel.params = params;
  sel.source_series_id = series.id();
  return sel;
}

/// Resamples to target_fps, selects, and maps the chosen frames back to the
/// indices of the original series.
inline KeyframeSelection select_keyframes(const ScoreSeries& series, Strategy strategy,
                                          const SelectionParams& params, double target_fps) {
  const std::size_t stride = resample_stride(series.native_fps(), target_fps);
  const ScoreSeries candidates = resample_candidates(series, target_fps);
  KeyframeSelection sel = select(candidates, strategy, params);
  for (auto& i : sel.indices) i *= stride;
  sel.horizon = series.size();
  return sel;
}

}  // namespace aks
