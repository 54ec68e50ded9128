// scorer.hpp
//
// Relevance scorers: s(Q, F_t) for every frame of a manifest.
//
// Built-in kinds are `constant`, `file` (scores read from a score file) and
// `synthetic`; the `remote` kind talks to an external image-text matching
// process over a line-oriented JSON protocol, either through the stdin/stdout
// of a spawned command or over HTTP.
//
//   -> {"type":"hello","protocol":1}                         stdio only
//   <- {"type":"ready","protocol":1}
//   -> {"type":"score","query":"...","frames":[{"index":0,"asset":"..."}]}
//   <- {"type":"scores","scores":[{"index":0,"score":0.42}]}
//   <- {"type":"error","message":"...","fatal":false}
//
// Over HTTP the request is POSTed to /score and liveness is GET /healthz.
// Responses are matched by index, never by position. Error replies are
// retried unless marked fatal; a stdio sidecar that times out is restarted.
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "httplib.h"
#include "json.hpp"

#include "aks/core.hpp"
#include "aks/io.hpp"
#include "aks/synthetic.hpp"

namespace aks {

inline constexpr int kProtocolVersion = 1;

enum class Transport { stdio, http };

inline Transport parse_transport(std::string_view text) {
  if (text == "stdio" || text == "stdio-pipe") return Transport::stdio;
  if (text == "http") return Transport::http;
  throw Error("unknown transport '" + std::string(text) + "'");
}

struct ConstantScorer {
  double value = 0.0;
};

struct FileScorer {
  std::filesystem::path path;
};

struct SyntheticScorer {
  SyntheticSpec spec;
};

struct RemoteScorer {
  std::string endpoint;  // command line (stdio) or base URL (http)
  Transport transport = Transport::stdio;
  std::size_t batch_size = 32;
  double timeout_s = 30.0;
  int max_retries = 3;

  void validate() const {
    if (endpoint.empty()) throw Error("remote scorer endpoint is empty");
    if (batch_size < 1) throw Error("batch_size must be >= 1");
    if (!(timeout_s > 0.0)) throw Error("timeout_s must be > 0");
    if (max_retries < 0) throw Error("max_retries must be >= 0");
  }
};

using ScorerSpec = std::variant<ConstantScorer, FileScorer, SyntheticScorer, RemoteScorer>;

// ---------------------------------------------------------------------------
// protocol messages

namespace protocol {

inline std::string hello() { return R"({"type":"hello","protocol":1})"; }

inline std::string score_request(const std::string& query, std::span<const FrameRef> frames) {
  nlohmann::json j;
  j["type"] = "score";
  j["query"] = query;
  j["frames"] = nlohmann::json::array();
  for (const auto& f : frames) j["frames"].push_back({{"index", f.index}, {"asset", f.asset}});
  return j.dump();
}

enum class ReplyKind { scores, error, ready };

struct Reply {
  ReplyKind kind = ReplyKind::error;
  std::vector<std::pair<long long, double>> scores;  // (index, score); NaN when not a finite number
  std::string message;
  bool fatal = false;
  int protocol = 0;
};

/// Parses one reply. Bare NaN / Infinity tokens, which some JSON encoders
/// emit, are read as non-finite scores rather than as malformed JSON.
inline Reply parse_reply(const std::string& text) {
  static const std::regex non_finite(R"(:\s*-?(NaN|Infinity)\b)");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(std::regex_replace(text, non_finite, ":null"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed scorer reply: ") + e.what());
  }
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
    throw Error("malformed scorer reply: missing 'type'");
  Reply r;
  const auto type = j["type"].get<std::string>();
  if (type == "ready") {
    r.kind = ReplyKind::ready;
    r.protocol = j.value("protocol", 0);
  } else if (type == "error") {
    r.kind = ReplyKind::error;
    r.message = j.value("message", "");
    r.fatal = j.value("fatal", false);
  } else if (type == "scores") {
    r.kind = ReplyKind::scores;
    if (!j.contains("scores") || !j["scores"].is_array()) throw Error("malformed scorer reply: missing 'scores'");
    for (const auto& item : j["scores"]) {
      if (!item.is_object() || !item.contains("index") || !item["index"].is_number_integer())
        throw Error("malformed scorer reply: score entry without integer 'index'");
      const auto& s = item.contains("score") ? item["score"] : nlohmann::json();
      const double v = s.is_number() ? s.get<double>() : std::nan("");
      r.scores.emplace_back(item["index"].get<long long>(), v);
    }
  } else {
    throw Error("malformed scorer reply: unknown type '" + type + "'");
  }
  return r;
}

}  // namespace protocol

// ---------------------------------------------------------------------------
// transports

/// Failure that a retry may cure (timeout, dropped connection, non-fatal error reply).
class TransientError : public Error {
public:
  using Error::Error;
};

/// Child process whose stdin/stdout are connected to this process through a
/// socket pair, so a dead child yields EPIPE instead of SIGPIPE.
class Subprocess {
public:
  explicit Subprocess(const std::vector<std::string>& argv) {
    if (argv.empty()) throw Error("empty command");
    int sv[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0) throw Error("socketpair failed");
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    pid_ = ::fork();
    if (pid_ < 0) {
      ::close(sv[0]);
      ::close(sv[1]);
      throw Error("fork failed");
    }
    if (pid_ == 0) {
      ::dup2(sv[1], STDIN_FILENO);
      ::dup2(sv[1], STDOUT_FILENO);
      ::execvp(args[0], args.data());
      ::_exit(127);
    }
    ::close(sv[1]);
    fd_ = sv[0];
  }

  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  ~Subprocess() {
    if (fd_ >= 0) ::close(fd_);
    if (pid_ > 0) {
      ::kill(pid_, SIGTERM);
      ::waitpid(pid_, nullptr, 0);
    }
  }

  void write_line(const std::string& line) {
    std::string data = line + "\n";
    std::size_t off = 0;
    while (off < data.size()) {
      const auto n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransientError("scorer process closed its input");
      }
      off += static_cast<std::size_t>(n);
    }
  }

  /// Next line (without '\n'), or nullopt on timeout.
  std::optional<std::string> read_line(std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true) {
      if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) return std::nullopt;
      pollfd p{fd_, POLLIN, 0};
      const int rc = ::poll(&p, 1, static_cast<int>(left.count()));
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw TransientError("poll failed on scorer process");
      }
      if (rc == 0) return std::nullopt;
      char chunk[65536];
      const auto n = ::read(fd_, chunk, sizeof(chunk));
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransientError("read failed on scorer process");
      }
      if (n == 0) throw TransientError("scorer process exited");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

private:
  pid_t pid_ = -1;
  int fd_ = -1;
  std::string buffer_;
};

inline std::vector<std::string> split_command(const std::string& cmd) {
  std::istringstream in(cmd);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

/// One request/reply exchange per call; implementations restart or reconnect
/// internally as needed.
class ScorerTransport {
public:
  virtual ~ScorerTransport() = default;
  virtual std::string exchange(const std::string& request) = 0;
};

class StdioTransport final : public ScorerTransport {
public:
  StdioTransport(std::string command, std::chrono::milliseconds timeout)
      : argv_(split_command(command)), timeout_(timeout) {}

  std::string exchange(const std::string& request) override {
    ensure_started();
    proc_->write_line(request);
    auto line = proc_->read_line(timeout_);
    if (!line) {
      proc_.reset();  // a late reply must not be read as the answer to the next request
      throw TransientError("scorer timed out");
    }
    return *line;
  }

private:
  void ensure_started() {
    if (proc_) return;
    proc_ = std::make_unique<Subprocess>(argv_);
    try {
      proc_->write_line(protocol::hello());
      auto line = proc_->read_line(timeout_);
      if (!line) throw TransientError("scorer handshake timed out");
      auto reply = protocol::parse_reply(*line);
      if (reply.kind != protocol::ReplyKind::ready) throw Error("scorer handshake: expected a ready message");
      if (reply.protocol != kProtocolVersion)
        throw Error("scorer speaks protocol " + std::to_string(reply.protocol) + ", expected 1");
    } catch (...) {
      proc_.reset();
      throw;
    }
  }

  std::vector<std::string> argv_;
  std::chrono::milliseconds timeout_;
  std::unique_ptr<Subprocess> proc_;
};

class HttpTransport final : public ScorerTransport {
public:
  HttpTransport(const std::string& url, std::chrono::milliseconds timeout) : client_(url) {
    const auto sec = timeout.count() / 1000;
    const auto usec = (timeout.count() % 1000) * 1000;
    client_.set_connection_timeout(sec, usec);
    client_.set_read_timeout(sec, usec);
    client_.set_write_timeout(sec, usec);
  }

  std::string exchange(const std::string& request) override {
    if (!healthy_) {
      auto res = client_.Get("/healthz");
      if (!res) throw TransientError("scorer health check failed: " + httplib::to_string(res.error()));
      if (res->status != 200) throw TransientError("scorer health check returned " + std::to_string(res->status));
      healthy_ = true;
    }
    auto res = client_.Post("/score", request, "application/json");
    if (!res) {
      healthy_ = false;
      throw TransientError("scorer request failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200 && res->body.empty())
      throw TransientError("scorer returned HTTP " + std::to_string(res->status));
    return res->body;
  }

private:
  httplib::Client client_;
  bool healthy_ = false;
};

inline std::unique_ptr<ScorerTransport> make_transport(const RemoteScorer& spec) {
  const auto timeout = std::chrono::milliseconds(static_cast<long long>(std::ceil(spec.timeout_s * 1000.0)));
  if (spec.transport == Transport::stdio) return std::make_unique<StdioTransport>(spec.endpoint, timeout);
  return std::make_unique<HttpTransport>(spec.endpoint, timeout);
}

namespace detail {

// Scores one batch, retrying transient failures. Each frame's score is taken
// from the single reply that is accepted for its batch.
inline std::vector<double> score_batch(ScorerTransport& transport, const RemoteScorer& spec,
                                       const std::string& query, std::span<const FrameRef> batch) {
  const std::string request = protocol::score_request(query, batch);
  std::string last_error;
  for (int attempt = 0; attempt <= spec.max_retries; ++attempt) {
    protocol::Reply reply;
    try {
      reply = protocol::parse_reply(transport.exchange(request));
    } catch (const TransientError& e) {
      last_error = e.what();
      continue;
    }
    if (reply.kind == protocol::ReplyKind::error) {
      if (reply.fatal)
        throw Error("scorer reported a fatal error for frames starting at index " +
                    std::to_string(batch.front().index) + ": " + reply.message);
      last_error = "scorer error: " + reply.message;
      continue;
    }
    if (reply.kind != protocol::ReplyKind::scores) throw Error("unexpected scorer reply type");
    std::map<long long, double> by_index;
    for (auto [idx, v] : reply.scores) {
      if (!by_index.emplace(idx, v).second)
        throw Error("scorer reply index mismatch: index " + std::to_string(idx) + " returned twice");
    }
    std::vector<double> out;
    out.reserve(batch.size());
    for (const auto& f : batch) {
      auto it = by_index.find(static_cast<long long>(f.index));
      if (it == by_index.end())
        throw Error("scorer reply index mismatch: frame index " + std::to_string(f.index) + " missing");
      if (!std::isfinite(it->second))
        throw Error("scorer returned a non-finite score for frame index " + std::to_string(f.index));
      out.push_back(it->second);
      by_index.erase(it);
    }
    if (!by_index.empty())
      throw Error("scorer reply index mismatch: unrequested frame index " + std::to_string(by_index.begin()->first));
    return out;
  }
  throw Error("scorer failed for frames starting at index " + std::to_string(batch.front().index) + " after " +
              std::to_string(spec.max_retries) + " retries: " + last_error);
}

inline ScoreSeries series_from(const FrameManifest& manifest, const std::vector<double>& scores,
                               const std::string& query) {
  std::vector<ScoreEntry> entries;
  std::vector<double> ts;
  entries.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i]))
      throw Error("non-finite score for frame index " + std::to_string(i));
    entries.push_back({i, manifest.frames[i].timestamp_s, scores[i]});
    ts.push_back(manifest.frames[i].timestamp_s);
  }
  return ScoreSeries(std::move(entries), infer_fps(ts), query);
}

}  // namespace detail

/// Scores every frame of `manifest` for `query` with a remote scorer reached
/// through `transport` (useful to keep one sidecar alive across videos).
inline ScoreSeries score_frames(const FrameManifest& manifest, const std::string& query, const RemoteScorer& spec,
                                ScorerTransport& transport) {
  spec.validate();
  std::vector<double> scores;
  scores.reserve(manifest.frames.size());
  for (std::size_t lo = 0; lo < manifest.frames.size(); lo += spec.batch_size) {
    const std::size_t n = std::min(spec.batch_size, manifest.frames.size() - lo);
    auto batch = std::span<const FrameRef>(manifest.frames).subspan(lo, n);
    auto part = detail::score_batch(transport, spec, query, batch);
    scores.insert(scores.end(), part.begin(), part.end());
  }
  return detail::series_from(manifest, scores, query);
}

/// One finite score per manifest frame, in manifest order.
inline ScoreSeries score_frames(const FrameManifest& manifest, const std::string& query, const ScorerSpec& scorer) {
  if (manifest.frames.empty()) throw Error("empty manifest");
  manifest.validate();
  const std::size_t n = manifest.frames.size();
  return std::visit(
      [&](const auto& s) -> ScoreSeries {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ConstantScorer>) {
          return detail::series_from(manifest, std::vector<double>(n, s.value), query);
        } else if constexpr (std::is_same_v<S, FileScorer>) {
          const auto src = load_scores(s.path);
          if (src.size() != n)
            throw Error("score file '" + s.path.string() + "' has " + std::to_string(src.size()) +
                        " frames, manifest has " + std::to_string(n));
          return detail::series_from(manifest, {src.scores().begin(), src.scores().end()}, query);
        } else if constexpr (std::is_same_v<S, SyntheticScorer>) {
          SyntheticSpec spec = s.spec;
          spec.horizon = n;
          const auto video = generate_synthetic(spec);
          return detail::series_from(manifest, {video.series.scores().begin(), video.series.scores().end()}, query);
        } else {
          s.validate();
          auto transport = make_transport(s);
          return score_frames(manifest, query, s, *transport);
        }
      },
      scorer);
}

}  // namespace aks
