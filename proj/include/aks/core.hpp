// core.hpp
//
// Domain types shared by every module: the per-frame relevance score series,
// selection parameters, keyframe selections and frame manifests, plus
// candidate-rate resampling.
//
// Frame indices are 0-based everywhere in this library.
#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aks/error.hpp"

namespace aks {

using Index = std::size_t;

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw Error("cannot format number");
  std::string out(buf, ptr);
  // keep the value recognisable as a real in JSON/CSV output
  if (out.find_first_of(".eEn") == std::string::npos) out += ".0";
  return out;
}

struct ScoreEntry {
  Index index = 0;
  double timestamp_s = 0.0;
  double score = 0.0;

  friend bool operator==(const ScoreEntry&, const ScoreEntry&) = default;
};

/// Ordered relevance scores s(Q, F_t) for the candidate frames of one video
/// and one query. Immutable once constructed.
class ScoreSeries {
public:
  /// Validates the invariants: non-empty, indices 0..T-1 in order,
  /// strictly increasing timestamps, finite scores, positive frame rate.
  ScoreSeries(std::vector<ScoreEntry> entries, double native_fps,
              std::optional<std::string> query_id = std::nullopt)
      : entries_(std::move(entries)), native_fps_(native_fps), query_id_(std::move(query_id)) {
    if (entries_.empty()) throw Error("score series is empty");
    if (!(std::isfinite(native_fps_) && native_fps_ > 0.0))
      throw Error("native_fps must be positive and finite");
    scores_.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      if (e.index != i)
        throw Error("entry " + std::to_string(i) + ": index " + std::to_string(e.index) +
                    " breaks the contiguous 0-based sequence");
      if (!std::isfinite(e.timestamp_s))
        throw Error("entry " + std::to_string(i) + ": non-finite timestamp");
      if (i > 0 && !(e.timestamp_s > entries_[i - 1].timestamp_s))
        throw Error("entry " + std::to_string(i) + ": timestamps must be strictly increasing");
      if (!std::isfinite(e.score)) throw Error("entry " + std::to_string(i) + ": non-finite score");
      scores_.push_back(e.score);
    }
  }

  /// Series with timestamps i / fps.
  static ScoreSeries from_scores(std::span<const double> scores, double fps = 1.0,
                                 std::optional<std::string> query_id = std::nullopt) {
    std::vector<ScoreEntry> entries;
    entries.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i)
      entries.push_back({i, static_cast<double>(i) / fps, scores[i]});
    return ScoreSeries(std::move(entries), fps, std::move(query_id));
  }

  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<ScoreEntry>& entries() const noexcept { return entries_; }
  std::span<const double> scores() const noexcept { return scores_; }
  double native_fps() const noexcept { return native_fps_; }
  const std::optional<std::string>& query_id() const noexcept { return query_id_; }
  std::string id() const { return query_id_.value_or(""); }

  friend bool operator==(const ScoreSeries& a, const ScoreSeries& b) {
    return a.entries_ == b.entries_ && a.native_fps_ == b.native_fps_ && a.query_id_ == b.query_id_;
  }

private:
  std::vector<ScoreEntry> entries_;
  std::vector<double> scores_;
  double native_fps_;
  std::optional<std::string> query_id_;
};

enum class Strategy { UNI, TOP, BIN, ADA, ORACLE };

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::UNI: return "UNI";
    case Strategy::TOP: return "TOP";
    case Strategy::BIN: return "BIN";
    case Strategy::ADA: return "ADA";
    case Strategy::ORACLE: return "ORACLE";
  }
  return "?";
}

inline Strategy parse_strategy(std::string_view text) {
  std::string up(text);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  for (auto s : {Strategy::UNI, Strategy::TOP, Strategy::BIN, Strategy::ADA, Strategy::ORACLE})
    if (up == to_string(s)) return s;
  throw Error("unknown strategy '" + std::string(text) + "'");
}

/// ceil(log2(m)) for m >= 1.
inline int ceil_log2(std::size_t m) {
  int l = 0;
  while ((std::size_t{1} << l) < m) ++l;
  return l;
}

/// Knobs of the selection objective and of the adaptive splitter.
struct SelectionParams {
  std::size_t m = 64;      // keyframe budget M
  int max_level = 5;       // L
  double s_thr = 0.8;      // split threshold on s_top - s_all
  double lambda = 1.0;     // coverage weight, objective evaluation only

  void validate() const {
    if (m < 1) throw Error("m must be >= 1");
    if (max_level < 0) throw Error("max_level must be >= 0");
    if (max_level > 30) throw Error("max_level must be <= 30");
    if (!(std::isfinite(s_thr) && s_thr >= 0.0)) throw Error("s_thr must be finite and >= 0");
    if (!(std::isfinite(lambda) && lambda >= 0.0)) throw Error("lambda must be finite and >= 0");
  }

  /// The conventional bound L <= ceil(log2 M); exceeding it is allowed.
  void warn_if_unusual() const {
    if (max_level > ceil_log2(m))
      warn("max_level " + std::to_string(max_level) + " exceeds ceil(log2 M) = " +
           std::to_string(ceil_log2(m)));
  }

  friend bool operator==(const SelectionParams&, const SelectionParams&) = default;
};

/// Index set I chosen from a series of `horizon` frames.
struct KeyframeSelection {
  std::vector<Index> indices;  // strictly increasing
  Strategy strategy = Strategy::TOP;
  SelectionParams params;
  std::size_t horizon = 0;     // T of the source series
  std::string source_series_id;

  /// Throws unless indices are strictly increasing and inside [0, horizon).
  void validate() const {
    for (std::size_t i = 0; i < indices.size(); ++i) {
      if (indices[i] >= horizon)
        throw Error("selection index " + std::to_string(indices[i]) + " out of range for T=" +
                    std::to_string(horizon));
      if (i > 0 && indices[i] <= indices[i - 1])
        throw Error("selection indices must be strictly increasing");
    }
  }

  friend bool operator==(const KeyframeSelection&, const KeyframeSelection&) = default;
};

struct FrameRef {
  Index index = 0;
  double timestamp_s = 0.0;
  std::string asset;  // opaque locator handed to the scorer

  friend bool operator==(const FrameRef&, const FrameRef&) = default;
};

/// Candidate frames of one video and where their pixels live.
struct FrameManifest {
  std::string video_id;
  std::vector<FrameRef> frames;
  std::optional<int> width;
  std::optional<int> height;
  std::optional<int> channels;

  void validate() const {
    for (std::size_t i = 0; i < frames.size(); ++i) {
      if (frames[i].index != i)
        throw Error("manifest frame " + std::to_string(i) + ": indices must be contiguous from 0");
      if (!std::isfinite(frames[i].timestamp_s) ||
          (i > 0 && !(frames[i].timestamp_s > frames[i - 1].timestamp_s)))
        throw Error("manifest frame " + std::to_string(i) +
                    ": timestamps must be strictly increasing");
    }
  }

  friend bool operator==(const FrameManifest&, const FrameManifest&) = default;
};

/// Frame rate implied by the median spacing of strictly increasing timestamps;
/// 1.0 when fewer than two timestamps are given.
inline double infer_fps(std::span<const double> timestamps) {
  if (timestamps.size() < 2) return 1.0;
  std::vector<double> gaps;
  gaps.reserve(timestamps.size() - 1);
  for (std::size_t i = 1; i < timestamps.size(); ++i) gaps.push_back(timestamps[i] - timestamps[i - 1]);
  std::sort(gaps.begin(), gaps.end());
  const std::size_t n = gaps.size();
  const double median = n % 2 ? gaps[n / 2] : 0.5 * (gaps[n / 2 - 1] + gaps[n / 2]);
  return 1.0 / median;
}

/// Decimation stride used when resampling native_fps down to target_fps.
inline std::size_t resample_stride(double native_fps, double target_fps) {
  if (!(std::isfinite(target_fps) && target_fps > 0.0))
    throw Error("target_fps must be positive and finite");
  if (target_fps >= native_fps) return 1;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(native_fps / target_fps)));
}

/// Keeps every k-th candidate starting at index 0, k = round(native/target).
/// Original timestamps are kept; indices are renumbered from 0. Asking for a
/// rate above native_fps returns the input unchanged with a warning.
inline ScoreSeries resample_candidates(const ScoreSeries& series, double target_fps) {
  const std::size_t k = resample_stride(series.native_fps(), target_fps);
  if (target_fps > series.native_fps()) {
    warn("target_fps " + format_double(target_fps) + " >= native_fps " +
         format_double(series.native_fps()) + "; series left unchanged");
    return series;
  }
  if (k == 1) return series;
  std::vector<ScoreEntry> out;
  out.reserve((series.size() + k - 1) / k);
  for (std::size_t i = 0, j = 0; i < series.size(); i += k, ++j) {
    const auto& e = series.entries()[i];
    out.push_back({j, e.timestamp_s, e.score});
  }
  return ScoreSeries(std::move(out), series.native_fps() / static_cast<double>(k), series.query_id());
}

}  // namespace aks
