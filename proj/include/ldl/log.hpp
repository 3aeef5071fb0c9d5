#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

namespace ldl {

enum class LogLevel { kOff = 0, kInfo = 1, kTrace = 2 };

inline LogLevel log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("LDL_LOG");
    if (!env) return LogLevel::kOff;
    std::string v(env);
    if (v == "trace") return LogLevel::kTrace;
    if (v == "info") return LogLevel::kInfo;
    return LogLevel::kOff;
  }();
  return level;
}

inline void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::kInfo) std::fprintf(stderr, "[ldl] %s\n", msg.c_str());
}

inline void log_trace(const std::string& msg) {
  if (log_level() >= LogLevel::kTrace) std::fprintf(stderr, "[ldl] %s\n", msg.c_str());
}

}  // namespace ldl
