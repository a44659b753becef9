#pragma once

#include <string>

namespace transco {

enum class LogLevel { Off = 0, Info = 1, Debug = 2 };

/// Level from the TRANSCO_LOG environment variable (off | info | debug), read once; default off.
LogLevel log_level();
void set_log_level(LogLevel level);

/// Writes to stderr when `level` is enabled. Thread safe.
void log_message(LogLevel level, const std::string& message);

inline void log_info(const std::string& m) { log_message(LogLevel::Info, m); }
inline void log_debug(const std::string& m) { log_message(LogLevel::Debug, m); }

}  // namespace transco
