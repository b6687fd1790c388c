#ifndef MI2GAN_CORE_LOG_HPP
#define MI2GAN_CORE_LOG_HPP

#include <cstdio>
#include <cstdlib>
#include <string>

namespace mi2gan {

enum class LogLevel { kDebug = 0, kInfo = 1, kWarn = 2 };

// Threshold comes from MI2GAN_LOG in {debug, info, warn}; default info.
inline LogLevel log_threshold() {
  static LogLevel lvl = [] {
    const char* env = std::getenv("MI2GAN_LOG");
    if (env) {
      std::string s(env);
      if (s == "debug") return LogLevel::kDebug;
      if (s == "warn") return LogLevel::kWarn;
    }
    return LogLevel::kInfo;
  }();
  return lvl;
}

inline void log(LogLevel lvl, const std::string& msg) {
  if (static_cast<int>(lvl) < static_cast<int>(log_threshold())) return;
  const char* tag = lvl == LogLevel::kDebug ? "debug" : lvl == LogLevel::kInfo ? "info" : "warn";
  std::fprintf(stderr, "[mi2gan][%s] %s\n", tag, msg.c_str());
}

inline void log_debug(const std::string& msg) { log(LogLevel::kDebug, msg); }
inline void log_info(const std::string& msg) { log(LogLevel::kInfo, msg); }
inline void log_warn(const std::string& msg) { log(LogLevel::kWarn, msg); }

}  // namespace mi2gan

#endif
