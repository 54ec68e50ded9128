// bench.hpp
//
// Synthetic benchmark harness: runs strategies over a grid of
// (M, L, s_thr, fps) cells on a corpus of score curves with known relevant
// intervals, and reports keyframe recall, coverage and objective per cell.
//
// Configuration is a plain `key = value` file, `#` starts a comment, list
// values are comma separated:
//
//   preset     = multi-moment      # single-moment | multi-moment | mixed | ablation-grid
//   videos     = 100               # synthetic corpus size
//   frames     = 256               # synthetic T
//   noise      = 0.05
//   video      = a.jsonl, a.truth  # score file + truth file; repeatable
//   strategies = top, bin, ada
//   m          = 4
//   max_level  = 2
//   s_thr      = 0.6
//   fps        = 1.0
//   lambda     = 1
//   seed       = 1
//   workers    = 0                 # 0: hardware concurrency
//   output_dir = bench_out
//
// A truth file holds one half-open interval per line: `start end`.
//
// Results go to <output_dir>/results.csv with columns
//   video,strategy,M,L,s_thr,fps,recall,coverage,objective
// and an aligned per-cell summary to <output_dir>/summary.txt.
#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <variant>
#include <vector>

#include "aks/core.hpp"
#include "aks/coverage.hpp"
#include "aks/io.hpp"
#include "aks/random.hpp"
#include "aks/strategies.hpp"
#include "aks/synthetic.hpp"

namespace aks {

/// Fraction of truth intervals holding at least one selected index.
inline double keyframe_recall(std::span<const Index> indices, std::span<const Range> truth) {
  if (truth.empty()) throw Error("keyframe_recall needs at least one truth interval");
  std::size_t hit = 0;
  for (const auto& r : truth) {
    if (r.empty()) throw Error("empty truth interval [" + std::to_string(r.lo) + "," + std::to_string(r.hi) + ")");
    auto it = std::lower_bound(indices.begin(), indices.end(), r.lo);
    if (it != indices.end() && *it < r.hi) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

inline double keyframe_recall(const KeyframeSelection& sel, std::span<const Range> truth) {
  return keyframe_recall(sel.indices, truth);
}

// ---------------------------------------------------------------------------
// corpus

struct FileVideo {
  std::filesystem::path scores;
  std::filesystem::path truth;
};

struct CorpusItem {
  std::string name;
  std::variant<SyntheticSpec, FileVideo> source;
};

inline std::vector<Range> load_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::vector<Range> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    long long lo = 0, hi = 0;
    if (!(ls >> lo >> hi) || lo < 0 || hi <= lo)
      throw Error(path.string() + ":" + std::to_string(n) + ": expected 'start end' with 0 <= start < end");
    out.push_back({static_cast<Index>(lo), static_cast<Index>(hi)});
  }
  return out;
}

inline SyntheticVideo materialize(const CorpusItem& item) {
  if (const auto* spec = std::get_if<SyntheticSpec>(&item.source)) return generate_synthetic(*spec);
  const auto& f = std::get<FileVideo>(item.source);
  auto series = load_scores(f.scores);
  auto truth = load_truth(f.truth);
  for (const auto& r : truth)
    if (r.hi > series.size()) throw Error(f.truth.string() + ": interval beyond the series length");
  return {std::move(series), std::move(truth)};
}

/// Named corpus generators.
///
///   single-moment  two short plateaus (width 4, gap 4, height 0.8) inside one
///                  event window; the question hinges on one moment.
///   multi-moment   six plateaus of width T/12 with heights in [0.4, 0.9],
///                  spread over the whole video.
/// Both use baseline 0.1; interval layout and noise derive from
/// mix_seed(seed, video).
inline SyntheticSpec preset_video(std::string_view preset, std::size_t video, std::size_t frames, double noise,
                                  std::uint64_t seed) {
  Rng rng(mix_seed(seed, 2 * video));
  SyntheticSpec spec;
  spec.horizon = frames;
  spec.noise_sigma = noise;
  spec.baseline = 0.1;
  spec.seed = mix_seed(seed, 2 * video + 1);
  if (preset == "single-moment") {
    constexpr std::size_t width = 4, gap = 4, span = 2 * width + gap;
    if (frames < span) throw Error("single-moment preset needs at least 12 frames");
    const Index start = rng.integer(0, frames - span);
    spec.planted = {{start, start + width, 0.8, BumpShape::plateau},
                    {start + width + gap, start + span, 0.8, BumpShape::plateau}};
  } else if (preset == "multi-moment") {
    constexpr std::size_t bumps = 6;
    const std::size_t slot = frames / bumps;
    const std::size_t width = std::max<std::size_t>(1, frames / 12);
    if (slot < width + 1) throw Error("multi-moment preset needs at least 24 frames");
    for (std::size_t b = 0; b < bumps; ++b) {
      const Index start = b * slot + rng.integer(0, slot - width);
      spec.planted.push_back({start, start + width, rng.uniform(0.4, 0.9), BumpShape::plateau});
    }
  } else {
    throw Error("unknown corpus preset '" + std::string(preset) + "'");
  }
  return spec;
}

// ---------------------------------------------------------------------------
// configuration

struct BenchConfig {
  std::vector<CorpusItem> corpus;
  std::vector<Strategy> strategies;
  std::vector<std::size_t> ms;
  std::vector<int> levels;
  std::vector<double> s_thrs;
  std::vector<double> fps;
  double lambda = 1.0;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::filesystem::path output_dir;

  void validate() const {
    if (corpus.empty()) throw Error("bench config: corpus is empty");
    if (strategies.empty()) throw Error("bench config: strategy list is empty");
    if (ms.empty() || levels.empty() || s_thrs.empty() || fps.empty())
      throw Error("bench config: every grid axis (m, max_level, s_thr, fps) needs at least one value");
    for (auto s : strategies)
      if (s == Strategy::ORACLE) throw Error("bench config: ORACLE is not a benchmark strategy");
    for (auto m : ms)
      if (m < 1) throw Error("bench config: m must be >= 1");
    for (auto l : levels)
      if (l < 0 || l > 30) throw Error("bench config: max_level must be in 0..30");
    for (auto s : s_thrs)
      if (!(s >= 0.0)) throw Error("bench config: s_thr must be >= 0");
    for (auto f : fps)
      if (!(f > 0.0)) throw Error("bench config: fps must be > 0");
    if (!(lambda >= 0.0)) throw Error("bench config: lambda must be >= 0");
  }
};

/// Adds `videos` generated videos of `preset` to the corpus. `mixed`
/// alternates single-moment and multi-moment.
inline void add_preset_corpus(BenchConfig& cfg, std::string_view preset, std::size_t videos, std::size_t frames,
                              double noise) {
  for (std::size_t v = 0; v < videos; ++v) {
    std::string_view kind = preset;
    if (preset == "mixed" || preset == "ablation-grid") kind = v % 2 ? "multi-moment" : "single-moment";
    cfg.corpus.push_back({std::string(kind) + "-" + std::to_string(v), preset_video(kind, v, frames, noise, cfg.seed)});
  }
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  for (auto part : split(s, ',')) {
    auto t = trim(part);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    T v{};
    if constexpr (std::is_floating_point_v<T>) {
      v = static_cast<T>(std::stod(text, &used));
    } else if constexpr (std::is_signed_v<T>) {
      v = static_cast<T>(std::stoll(text, &used));
    } else {
      if (!text.empty() && text[0] == '-') throw std::invalid_argument("negative");
      v = static_cast<T>(std::stoull(text, &used));
    }
    if (used != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw Error("bench config: bad value '" + text + "' for '" + key + "'");
  }
}

template <typename T>
std::vector<T> parse_numbers(const std::string& key, const std::string& text) {
  std::vector<T> out;
  for (const auto& item : split_list(text)) out.push_back(parse_number<T>(key, item));
  return out;
}

}  // namespace detail

/// Parses the key-value configuration text. Relative paths resolve against
/// `base_dir`. Grid axes left unset take the preset's defaults. A seed
/// override replaces the file's seed before the preset corpus is generated.
inline BenchConfig parse_bench_config(const std::string& text, const std::filesystem::path& base_dir = {},
                                      std::optional<std::uint64_t> seed_override = std::nullopt) {
  BenchConfig cfg;
  std::string preset;
  std::size_t videos = 100, frames = 256;
  double noise = 0.05;
  bool has_strategies = false;
  std::istringstream in(text);
  std::string raw;
  for (std::size_t n = 1; std::getline(in, raw); ++n) {
    std::string line = raw.substr(0, raw.find('#'));
    if (detail::trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("bench config line " + std::to_string(n) + ": expected 'key = value'");
    const std::string key = detail::trim(std::string_view(line).substr(0, eq));
    const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    if (key == "preset") preset = value;
    else if (key == "videos") videos = detail::parse_number<std::size_t>(key, value);
    else if (key == "frames") frames = detail::parse_number<std::size_t>(key, value);
    else if (key == "noise") noise = detail::parse_number<double>(key, value);
    else if (key == "video") {
      auto parts = detail::split_list(value);
      if (parts.size() != 2) throw Error("bench config line " + std::to_string(n) + ": video = <scores>, <truth>");
      FileVideo fv{base_dir / parts[0], base_dir / parts[1]};
      cfg.corpus.push_back({std::filesystem::path(parts[0]).stem().string(), fv});
    } else if (key == "strategies") {
      has_strategies = true;
      for (const auto& s : detail::split_list(value)) cfg.strategies.push_back(parse_strategy(s));
    } else if (key == "m") cfg.ms = detail::parse_numbers<std::size_t>(key, value);
    else if (key == "max_level") cfg.levels = detail::parse_numbers<int>(key, value);
    else if (key == "s_thr") cfg.s_thrs = detail::parse_numbers<double>(key, value);
    else if (key == "fps") cfg.fps = detail::parse_numbers<double>(key, value);
    else if (key == "lambda") cfg.lambda = detail::parse_number<double>(key, value);
    else if (key == "seed") cfg.seed = detail::parse_number<std::uint64_t>(key, value);
    else if (key == "workers") cfg.workers = detail::parse_number<unsigned>(key, value);
    else if (key == "output_dir") cfg.output_dir = value.empty() ? std::filesystem::path() : base_dir / value;
    else throw Error("bench config line " + std::to_string(n) + ": unknown key '" + key + "'");
  }
  if (seed_override) cfg.seed = *seed_override;
  if (!preset.empty()) {
    add_preset_corpus(cfg, preset, videos, frames, noise);
    if (preset == "ablation-grid") {
      if (cfg.ms.empty()) cfg.ms = {16};
      if (cfg.levels.empty()) cfg.levels = {1, 2, 3, 4, 5, 6};
      if (cfg.s_thrs.empty()) cfg.s_thrs = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
      if (!has_strategies) cfg.strategies = {Strategy::ADA};
    }
  }
  if (!has_strategies && cfg.strategies.empty())
    cfg.strategies = {Strategy::UNI, Strategy::TOP, Strategy::BIN, Strategy::ADA};
  if (cfg.ms.empty()) cfg.ms = {4};
  if (cfg.levels.empty()) cfg.levels = {2};
  if (cfg.s_thrs.empty()) cfg.s_thrs = {0.6};
  if (cfg.fps.empty()) cfg.fps = {1.0};
  return cfg;
}

inline BenchConfig load_bench_config(const std::filesystem::path& path,
                                     std::optional<std::uint64_t> seed_override = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_bench_config(ss.str(), path.parent_path(), seed_override);
}

// ---------------------------------------------------------------------------
// grid

struct BenchRow {
  std::string video;
  Strategy strategy;
  std::size_t m;
  int max_level;
  double s_thr;
  double fps;
  double recall;
  double coverage;
  double objective;
};

struct BenchCell {
  Strategy strategy;
  std::size_t m;
  int max_level;
  double s_thr;
  double fps;
  std::size_t videos = 0;
  double recall = 0.0;
  double coverage = 0.0;
  double objective = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;   // video-major, then fps, strategy, M, L, s_thr
  std::vector<BenchCell> cells; // means over the corpus, in first-seen order
  std::string results_csv;
  std::string summary;
};

namespace detail {

inline std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

inline std::vector<BenchRow> run_video(const BenchConfig& cfg, const CorpusItem& item) {
  const auto video = materialize(item);
  std::vector<BenchRow> rows;
  for (double fps : cfg.fps) {
    const std::size_t stride = resample_stride(video.series.native_fps(), fps);
    const auto candidates = resample_candidates(video.series, fps);
    for (auto strategy : cfg.strategies)
      for (auto m : cfg.ms)
        for (auto level : cfg.levels)
          for (double s_thr : cfg.s_thrs) {
            try {
              SelectionParams p{m, level, s_thr, cfg.lambda};
              const auto sel = select(candidates, strategy, p);
              std::vector<Index> original(sel.indices);
              for (auto& i : original) i *= stride;
              rows.push_back({item.name, strategy, m, level, s_thr, fps, keyframe_recall(original, video.truth),
                              coverage(sel.indices, candidates.size(), level),
                              objective(candidates.scores(), sel.indices, cfg.lambda, level)});
            } catch (const std::exception& e) {
              throw Error("bench cell (video=" + item.name + ", strategy=" + std::string(to_string(strategy)) +
                          ", M=" + std::to_string(m) + ", L=" + std::to_string(level) +
                          ", s_thr=" + format_double(s_thr) + ", fps=" + format_double(fps) + "): " + e.what());
            }
          }
  }
  return rows;
}

inline std::string render_csv(const std::vector<BenchRow>& rows) {
  std::string out = "video,strategy,M,L,s_thr,fps,recall,coverage,objective\n";
  for (const auto& r : rows)
    out += r.video + "," + std::string(to_string(r.strategy)) + "," + std::to_string(r.m) + "," +
           std::to_string(r.max_level) + "," + format_double(r.s_thr) + "," + format_double(r.fps) + "," +
           fixed(r.recall) + "," + fixed(r.coverage) + "," + fixed(r.objective) + "\n";
  return out;
}

inline std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

inline std::string render_summary(const BenchConfig& cfg, const std::vector<BenchCell>& cells) {
  const std::vector<std::string> header{"strategy", "M", "L", "s_thr", "fps", "videos", "recall", "coverage", "objective"};
  std::vector<std::vector<std::string>> table{header};
  for (const auto& c : cells)
    table.push_back({std::string(to_string(c.strategy)), std::to_string(c.m), std::to_string(c.max_level),
                     format_double(c.s_thr), format_double(c.fps), std::to_string(c.videos), fixed(c.recall, 4),
                     fixed(c.coverage, 3), fixed(c.objective, 4)});
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : table)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  std::string out = "corpus: " + std::to_string(cfg.corpus.size()) + " videos, lambda " + format_double(cfg.lambda) +
                    ", seed " + std::to_string(cfg.seed) + "\n\n";
  for (const auto& row : table) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "  " : "") + pad(row[i], width[i]);
    out += "\n";
  }
  // L x s_thr recall matrix per (strategy, M, fps) when both axes vary
  if (cfg.levels.size() > 1 && cfg.s_thrs.size() > 1) {
    for (auto strategy : cfg.strategies) {
      if (strategy != Strategy::ADA) continue;
      for (auto m : cfg.ms)
        for (double f : cfg.fps) {
          out += "\nmean recall, " + std::string(to_string(strategy)) + " M=" + std::to_string(m) +
                 " fps=" + format_double(f) + " (rows L, columns s_thr)\n";
          out += pad("L\\s_thr", 8);
          for (double s : cfg.s_thrs) out += pad(format_double(s), 8);
          out += "\n";
          for (int l : cfg.levels) {
            out += pad(std::to_string(l), 8);
            for (double s : cfg.s_thrs)
              for (const auto& c : cells)
                if (c.strategy == strategy && c.m == m && c.fps == f && c.max_level == l && c.s_thr == s)
                  out += pad(fixed(c.recall, 4), 8);
            out += "\n";
          }
        }
    }
  }
  return out;
}

}  // namespace detail

/// Runs every (video, fps, strategy, M, L, s_thr) cell. Videos are processed
/// in parallel; rows, aggregates and files do not depend on the worker count.
inline BenchReport run_grid(const BenchConfig& cfg) {
  cfg.validate();
  if (!cfg.output_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec || !std::filesystem::is_directory(cfg.output_dir))
      throw Error("cannot create output_dir '" + cfg.output_dir.string() + "'");
  }
  std::vector<std::vector<BenchRow>> per_video(cfg.corpus.size());
  std::vector<std::string> errors(cfg.corpus.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (std::size_t v = next++; v < cfg.corpus.size() && !failed; v = next++) {
      try {
        per_video[v] = detail::run_video(cfg, cfg.corpus[v]);
      } catch (const std::exception& e) {
        errors[v] = e.what();
        failed = true;
      }
    }
  };
  unsigned workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, cfg.corpus.size()));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (const auto& e : errors)
    if (!e.empty()) throw Error(e);

  BenchReport report;
  for (auto& rows : per_video)
    for (auto& r : rows) report.rows.push_back(std::move(r));

  using Key = std::tuple<int, std::size_t, int, double, double>;
  std::map<Key, std::size_t> slot;
  for (const auto& r : report.rows) {
    Key key{static_cast<int>(r.strategy), r.m, r.max_level, r.s_thr, r.fps};
    auto [it, inserted] = slot.emplace(key, report.cells.size());
    if (inserted) report.cells.push_back({r.strategy, r.m, r.max_level, r.s_thr, r.fps});
    auto& c = report.cells[it->second];
    ++c.videos;
    c.recall += r.recall;
    c.coverage += r.coverage;
    c.objective += r.objective;
  }
  for (auto& c : report.cells) {
    const auto n = static_cast<double>(c.videos);
    c.recall /= n;
    c.coverage /= n;
    c.objective /= n;
  }
  report.results_csv = detail::render_csv(report.rows);
  report.summary = detail::render_summary(cfg, report.cells);
  if (!cfg.output_dir.empty()) {
    detail::write_file(cfg.output_dir / "results.csv", report.results_csv);
    detail::write_file(cfg.output_dir / "summary.txt", report.summary);
  }
  return report;
}

}  // namespace aks
