// synthetic.hpp
//
// Seeded synthetic score curves with planted relevant intervals, used as
// ground truth by the benchmark harness.
//
// score(t) = baseline + shape(t) + noise_sigma * N(0, 1)
//   plateau        : peak_height on [start, end)
//   gaussian-bump  : peak_height * exp(-((t - c) / w)^2 / 2) on [start, end),
//                    c = (start + end - 1) / 2, w = max(0.5, (end - start) / 4)
// Outside planted intervals shape(t) = 0.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "aks/core.hpp"
#include "aks/coverage.hpp"
#include "aks/random.hpp"

namespace aks {

enum class BumpShape { plateau, gaussian };

inline std::string_view to_string(BumpShape s) { return s == BumpShape::plateau ? "plateau" : "gaussian"; }

inline BumpShape parse_shape(std::string_view text) {
  if (text == "plateau") return BumpShape::plateau;
  if (text == "gaussian" || text == "gaussian-bump") return BumpShape::gaussian;
  throw Error("unknown bump shape '" + std::string(text) + "'");
}

struct PlantedInterval {
  Index start = 0;
  Index end = 0;  // exclusive
  double peak_height = 1.0;
  BumpShape shape = BumpShape::plateau;

  Range range() const noexcept { return {start, end}; }
  friend bool operator==(const PlantedInterval&, const PlantedInterval&) = default;
};

struct SyntheticSpec {
  std::size_t horizon = 100;  // T
  std::vector<PlantedInterval> planted;
  double noise_sigma = 0.0;
  double baseline = 0.0;
  std::uint64_t seed = 0;
  double fps = 1.0;

  void validate() const {
    if (horizon < 1) throw Error("synthetic T must be >= 1");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw Error("noise_sigma must be >= 0");
    if (!std::isfinite(baseline)) throw Error("baseline must be finite");
    if (!(fps > 0.0)) throw Error("fps must be > 0");
    for (std::size_t i = 0; i < planted.size(); ++i) {
      const auto& p = planted[i];
      if (p.start >= p.end || p.end > horizon)
        throw Error("planted interval [" + std::to_string(p.start) + "," + std::to_string(p.end) +
                    ") is empty or outside [0," + std::to_string(horizon) + ")");
      if (!(p.peak_height > 0.0)) throw Error("planted peak_height must be > 0");
      if (i > 0 && p.start < planted[i - 1].end)
        throw Error("planted intervals overlap or are unsorted at interval " + std::to_string(i));
    }
  }
};

struct SyntheticVideo {
  ScoreSeries series;
  std::vector<Range> truth;
};

inline double bump_value(const PlantedInterval& p, Index t) {
  if (p.shape == BumpShape::plateau) return p.peak_height;
  const double c = 0.5 * static_cast<double>(p.start + p.end - 1);
  const double w = std::max(0.5, static_cast<double>(p.end - p.start) / 4.0);
  const double z = (static_cast<double>(t) - c) / w;
  return p.peak_height * std::exp(-0.5 * z * z);
}

/// Deterministic for a given spec; noise draws come from Rng(seed) in frame order.
inline SyntheticVideo generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::vector<double> scores(spec.horizon, spec.baseline);
  for (const auto& p : spec.planted)
    for (Index t = p.start; t < p.end; ++t) scores[t] += bump_value(p, t);
  if (spec.noise_sigma > 0.0) {
    Rng rng(spec.seed);
    for (auto& s : scores) s += spec.noise_sigma * rng.gaussian();
  }
  std::vector<Range> truth;
  truth.reserve(spec.planted.size());
  for (const auto& p : spec.planted) truth.push_back(p.range());
  return {ScoreSeries::from_scores(scores, spec.fps, "synthetic-" + std::to_string(spec.seed)), std::move(truth)};
}

}  // namespace aks
