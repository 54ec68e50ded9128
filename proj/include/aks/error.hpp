#pragma once

#include <functional>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>

namespace aks {

/// Runtime failure raised by every library operation (bad input, I/O, protocol).
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

using WarningHandler = std::function<void(const std::string&)>;

namespace detail {

struct WarningSink {
  std::mutex mu;
  WarningHandler handler = [](const std::string& msg) {
    std::cerr << "aks: warning: " << msg << '\n';
  };
};

inline WarningSink& warning_sink() {
  static WarningSink sink;
  return sink;
}

}  // namespace detail

/// Replace the process-wide warning handler; returns the previous one.
inline WarningHandler set_warning_handler(WarningHandler handler) {
  auto& sink = detail::warning_sink();
  std::lock_guard lock(sink.mu);
  return std::exchange(sink.handler, std::move(handler));
}

inline void warn(const std::string& msg) {
  auto& sink = detail::warning_sink();
  std::lock_guard lock(sink.mu);
  if (sink.handler) sink.handler(msg);
}

}  // namespace aks
