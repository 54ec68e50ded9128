// io.hpp
//
// Score files, frame manifests and selection files.
//
// Score file, line-delimited (one JSON object per line):
//   {"native_fps":1.0,"query_id":"q1"}                 optional header
//   {"index":0,"timestamp_s":0.0,"score":0.12}
// Score file, comma-separated:
//   # native_fps=1.0                                    optional
//   # query_id=q1                                       optional
//   index,timestamp_s,score
//   0,0.0,0.12
// When native_fps is absent it is inferred from the median timestamp spacing.
//
// Manifest (line-delimited):
//   {"video_id":"v","width":640,"height":360,"channels":3}
//   {"index":0,"timestamp_s":0.0,"asset":"frames/000000.jpg"}
//
// Selection (line-delimited):
//   {"type":"selection","strategy":"ADA","m":64,"max_level":5,"s_thr":0.8,
//    "lambda":1.0,"T":3600,"source":"q1"}
//   {"index":17,"timestamp_s":17.0,"score":0.93}
#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "aks/core.hpp"

namespace aks {

enum class ScoreFormat { jsonl, csv };

/// `.csv` selects the comma-separated format, anything else line-delimited JSON.
inline ScoreFormat format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? ScoreFormat::csv : ScoreFormat::jsonl;
}

namespace detail {

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

inline bool is_blank(const std::string& s) {
  return s.find_first_not_of(" \t") == std::string::npos;
}

[[noreturn]] inline void fail_at(const std::filesystem::path& path, std::size_t line,
                                 const std::string& what) {
  throw Error(path.string() + ":" + std::to_string(line) + ": " + what);
}

inline double parse_real(std::string_view text, bool& ok) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  ok = ec == std::errc{} && ptr == text.data() + text.size() && !text.empty();
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

struct RawRecord {
  std::size_t line;
  long long index;
  double timestamp_s;
  double score;
};

inline nlohmann::json parse_json_line(const std::filesystem::path& path, std::size_t line_no,
                                      const std::string& line) {
  try {
    auto j = nlohmann::json::parse(line);
    if (!j.is_object()) fail_at(path, line_no, "malformed record: expected a JSON object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    fail_at(path, line_no, std::string("malformed record: ") + e.what());
  }
}

inline ScoreSeries build_series(const std::filesystem::path& path, std::vector<RawRecord> recs,
                                std::optional<double> fps, std::optional<std::string> query_id) {
  if (recs.empty()) throw Error(path.string() + ": empty score file");
  std::vector<ScoreEntry> entries;
  entries.reserve(recs.size());
  std::vector<double> ts;
  ts.reserve(recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    if (r.index < 0 || static_cast<std::size_t>(r.index) != i)
      fail_at(path, r.line, "index " + std::to_string(r.index) + " expected " + std::to_string(i));
    if (!std::isfinite(r.timestamp_s)) fail_at(path, r.line, "non-finite timestamp");
    if (i > 0 && r.timestamp_s == recs[i - 1].timestamp_s)
      fail_at(path, r.line, "duplicate timestamp " + format_double(r.timestamp_s));
    if (i > 0 && r.timestamp_s < recs[i - 1].timestamp_s)
      fail_at(path, r.line, "non-monotonic timestamp " + format_double(r.timestamp_s));
    if (!std::isfinite(r.score)) fail_at(path, r.line, "non-finite score");
    entries.push_back({i, r.timestamp_s, r.score});
    ts.push_back(r.timestamp_s);
  }
  const double native = fps ? *fps : infer_fps(ts);
  if (!(std::isfinite(native) && native > 0.0))
    throw Error(path.string() + ": native_fps must be positive");
  return ScoreSeries(std::move(entries), native, std::move(query_id));
}

inline double json_real(const std::filesystem::path& path, std::size_t line_no,
                        const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail_at(path, line_no, std::string("malformed record: missing '") + key + "'");
  if (!it->is_number()) fail_at(path, line_no, std::string("malformed record: '") + key + "' is not a number");
  return it->get<double>();
}

inline long long json_int(const std::filesystem::path& path, std::size_t line_no,
                          const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail_at(path, line_no, std::string("malformed record: missing '") + key + "'");
  if (!it->is_number_integer())
    fail_at(path, line_no, std::string("malformed record: '") + key + "' is not an integer");
  return it->get<long long>();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

inline std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

inline std::string entry_line(const ScoreEntry& e) {
  return "{\"index\":" + std::to_string(e.index) + ",\"timestamp_s\":" + format_double(e.timestamp_s) +
         ",\"score\":" + format_double(e.score) + "}\n";
}

}  // namespace detail

inline ScoreSeries parse_scores_jsonl(const std::filesystem::path& path) {
  auto lines = detail::read_lines(path);
  std::optional<double> fps;
  std::optional<std::string> qid;
  std::vector<detail::RawRecord> recs;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::size_t line_no = n + 1;
    if (detail::is_blank(lines[n])) continue;
    auto j = detail::parse_json_line(path, line_no, lines[n]);
    if (!j.contains("index")) {
      if (!recs.empty()) detail::fail_at(path, line_no, "malformed record: missing 'index'");
      if (j.contains("native_fps")) fps = detail::json_real(path, line_no, j, "native_fps");
      if (j.contains("query_id")) {
        if (!j["query_id"].is_string()) detail::fail_at(path, line_no, "query_id must be a string");
        qid = j["query_id"].get<std::string>();
      }
      if (!j.contains("native_fps") && !j.contains("query_id"))
        detail::fail_at(path, line_no, "malformed record: missing 'index'");
      continue;
    }
    recs.push_back({line_no, detail::json_int(path, line_no, j, "index"),
                    detail::json_real(path, line_no, j, "timestamp_s"),
                    detail::json_real(path, line_no, j, "score")});
  }
  return detail::build_series(path, std::move(recs), fps, std::move(qid));
}

inline ScoreSeries parse_scores_csv(const std::filesystem::path& path) {
  auto lines = detail::read_lines(path);
  std::optional<double> fps;
  std::optional<std::string> qid;
  std::vector<detail::RawRecord> recs;
  bool header_seen = false;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::size_t line_no = n + 1;
    const std::string& line = lines[n];
    if (detail::is_blank(line)) continue;
    if (!header_seen && line.front() == '#') {
      std::string_view body(line);
      body.remove_prefix(1);
      while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
      auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      auto key = body.substr(0, eq);
      auto value = body.substr(eq + 1);
      if (key == "native_fps") {
        bool ok = false;
        fps = detail::parse_real(value, ok);
        if (!ok) detail::fail_at(path, line_no, "malformed native_fps");
      } else if (key == "query_id") {
        qid = std::string(value);
      }
      continue;
    }
    if (!header_seen) {
      if (line != "index,timestamp_s,score")
        detail::fail_at(path, line_no, "expected header 'index,timestamp_s,score'");
      header_seen = true;
      continue;
    }
    auto fields = detail::split(line, ',');
    if (fields.size() != 3) detail::fail_at(path, line_no, "malformed record: expected 3 fields");
    bool ok_i = false, ok_t = false, ok_s = false;
    const double idx = detail::parse_real(fields[0], ok_i);
    const double ts = detail::parse_real(fields[1], ok_t);
    const double sc = detail::parse_real(fields[2], ok_s);
    if (!ok_i || idx != std::floor(idx) || !std::isfinite(idx))
      detail::fail_at(path, line_no, "malformed record: bad index");
    if (!ok_t) detail::fail_at(path, line_no, "malformed record: bad timestamp_s");
    if (!ok_s) detail::fail_at(path, line_no, "malformed record: bad score");
    recs.push_back({line_no, static_cast<long long>(idx), ts, sc});
  }
  return detail::build_series(path, std::move(recs), fps, std::move(qid));
}

/// Reads and validates a score file; errors carry the offending line number.
inline ScoreSeries load_scores(const std::filesystem::path& path, ScoreFormat format) {
  return format == ScoreFormat::csv ? parse_scores_csv(path) : parse_scores_jsonl(path);
}

inline ScoreSeries load_scores(const std::filesystem::path& path) {
  return load_scores(path, format_for_path(path));
}

inline std::string render_scores(const ScoreSeries& series, ScoreFormat format) {
  std::string out;
  if (format == ScoreFormat::csv) {
    out += "# native_fps=" + format_double(series.native_fps()) + "\n";
    if (series.query_id()) out += "# query_id=" + *series.query_id() + "\n";
    out += "index,timestamp_s,score\n";
    for (const auto& e : series.entries())
      out += std::to_string(e.index) + "," + format_double(e.timestamp_s) + "," + format_double(e.score) + "\n";
  } else {
    out += "{\"native_fps\":" + format_double(series.native_fps());
    if (series.query_id()) out += ",\"query_id\":" + detail::json_string(*series.query_id());
    out += "}\n";
    for (const auto& e : series.entries()) out += detail::entry_line(e);
  }
  return out;
}

inline void save_scores(const ScoreSeries& series, const std::filesystem::path& path, ScoreFormat format) {
  detail::write_file(path, render_scores(series, format));
}

inline void save_scores(const ScoreSeries& series, const std::filesystem::path& path) {
  save_scores(series, path, format_for_path(path));
}

// ---------------------------------------------------------------------------
// manifests

inline FrameManifest load_manifest(const std::filesystem::path& path) {
  auto lines = detail::read_lines(path);
  FrameManifest m;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::size_t line_no = n + 1;
    if (detail::is_blank(lines[n])) continue;
    auto j = detail::parse_json_line(path, line_no, lines[n]);
    if (!j.contains("index")) {
      if (!m.frames.empty()) detail::fail_at(path, line_no, "malformed record: missing 'index'");
      if (j.contains("video_id") && j["video_id"].is_string()) m.video_id = j["video_id"].get<std::string>();
      if (j.contains("width")) m.width = static_cast<int>(detail::json_int(path, line_no, j, "width"));
      if (j.contains("height")) m.height = static_cast<int>(detail::json_int(path, line_no, j, "height"));
      if (j.contains("channels")) m.channels = static_cast<int>(detail::json_int(path, line_no, j, "channels"));
      continue;
    }
    const auto idx = detail::json_int(path, line_no, j, "index");
    if (idx < 0 || static_cast<std::size_t>(idx) != m.frames.size())
      detail::fail_at(path, line_no, "index " + std::to_string(idx) + " expected " + std::to_string(m.frames.size()));
    const double ts = detail::json_real(path, line_no, j, "timestamp_s");
    if (!m.frames.empty() && !(ts > m.frames.back().timestamp_s))
      detail::fail_at(path, line_no, "timestamps must be strictly increasing");
    if (!j.contains("asset") || !j["asset"].is_string())
      detail::fail_at(path, line_no, "malformed record: missing string 'asset'");
    m.frames.push_back({static_cast<std::size_t>(idx), ts, j["asset"].get<std::string>()});
  }
  return m;
}

inline void save_manifest(const FrameManifest& m, const std::filesystem::path& path) {
  std::string out = "{\"video_id\":" + detail::json_string(m.video_id);
  if (m.width) out += ",\"width\":" + std::to_string(*m.width);
  if (m.height) out += ",\"height\":" + std::to_string(*m.height);
  if (m.channels) out += ",\"channels\":" + std::to_string(*m.channels);
  out += "}\n";
  for (const auto& f : m.frames)
    out += "{\"index\":" + std::to_string(f.index) + ",\"timestamp_s\":" + format_double(f.timestamp_s) +
           ",\"asset\":" + detail::json_string(f.asset) + "}\n";
  detail::write_file(path, out);
}

// ---------------------------------------------------------------------------
// selections

/// Selection file contents; records carry the timestamp and score of each
/// selected frame taken from `series`.
inline std::string render_selection(const KeyframeSelection& sel, const ScoreSeries& series) {
  sel.validate();
  if (sel.horizon != series.size()) throw Error("selection horizon does not match the score series");
  std::string out = "{\"type\":\"selection\",\"strategy\":\"" + std::string(to_string(sel.strategy)) +
                    "\",\"m\":" + std::to_string(sel.params.m) +
                    ",\"max_level\":" + std::to_string(sel.params.max_level) +
                    ",\"s_thr\":" + format_double(sel.params.s_thr) +
                    ",\"lambda\":" + format_double(sel.params.lambda) +
                    ",\"T\":" + std::to_string(sel.horizon) +
                    ",\"source\":" + detail::json_string(sel.source_series_id) + "}\n";
  for (auto i : sel.indices) out += detail::entry_line(series.entries()[i]);
  return out;
}

inline void save_selection(const KeyframeSelection& sel, const ScoreSeries& series,
                           const std::filesystem::path& path) {
  detail::write_file(path, render_selection(sel, series));
}

inline KeyframeSelection load_selection(const std::filesystem::path& path) {
  auto lines = detail::read_lines(path);
  KeyframeSelection sel;
  bool header = false;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::size_t line_no = n + 1;
    if (detail::is_blank(lines[n])) continue;
    auto j = detail::parse_json_line(path, line_no, lines[n]);
    if (!header) {
      if (j.value("type", "") != "selection") detail::fail_at(path, line_no, "missing selection header");
      try {
        sel.strategy = parse_strategy(j.at("strategy").get<std::string>());
        sel.params.m = j.at("m").get<std::size_t>();
        sel.params.max_level = j.at("max_level").get<int>();
        sel.params.s_thr = j.at("s_thr").get<double>();
        sel.params.lambda = j.at("lambda").get<double>();
        sel.horizon = j.at("T").get<std::size_t>();
        sel.source_series_id = j.value("source", "");
      } catch (const nlohmann::json::exception& e) {
        detail::fail_at(path, line_no, std::string("malformed selection header: ") + e.what());
      }
      header = true;
      continue;
    }
    const auto idx = detail::json_int(path, line_no, j, "index");
    if (idx < 0) detail::fail_at(path, line_no, "negative index");
    sel.indices.push_back(static_cast<std::size_t>(idx));
  }
  if (!header) throw Error(path.string() + ": empty selection file");
  try {
    sel.validate();
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
  return sel;
}

}  // namespace aks
