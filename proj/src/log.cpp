#include "divfree/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string_view>

namespace divfree {

namespace {

LogLevel from_env() {
  const char* v = std::getenv("DIVFREE_LOG");
  if (!v) return LogLevel::info;
  const std::string_view s(v);
  if (s == "quiet") return LogLevel::quiet;
  if (s == "debug") return LogLevel::debug;
  return LogLevel::info;
}

std::atomic<int>& level_ref() {
  static std::atomic<int> level{static_cast<int>(from_env())};
  return level;
}

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

void emit(const char* tag, const std::string& message) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  std::cerr << "[divfree " << tag << "] " << message << '\n';
}

}  // namespace

LogLevel log_level() { return static_cast<LogLevel>(level_ref().load()); }
void set_log_level(LogLevel level) { level_ref().store(static_cast<int>(level)); }

void log_info(const std::string& message) {
  if (log_level() >= LogLevel::info) emit("info", message);
}

void log_debug(const std::string& message) {
  if (log_level() >= LogLevel::debug) emit("debug", message);
}

void log_warn(const std::string& message) {
  if (log_level() >= LogLevel::info) emit("warn", message);
}

}  // namespace divfree
