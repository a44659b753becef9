#include "transco/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>

namespace transco {

namespace {

LogLevel from_env() {
    const char* v = std::getenv("TRANSCO_LOG");
    if (!v) return LogLevel::Off;
    const std::string s(v);
    if (s == "debug") return LogLevel::Debug;
    if (s == "info") return LogLevel::Info;
    return LogLevel::Off;
}

std::atomic<int>& level_storage() {
    static std::atomic<int> level{static_cast<int>(from_env())};
    return level;
}

std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

LogLevel log_level() { return static_cast<LogLevel>(level_storage().load()); }

void set_log_level(LogLevel level) { level_storage().store(static_cast<int>(level)); }

void log_message(LogLevel level, const std::string& message) {
    if (level == LogLevel::Off || static_cast<int>(level) > level_storage().load()) return;
    std::lock_guard<std::mutex> lock(sink_mutex());
    std::cerr << (level == LogLevel::Debug ? "[debug] " : "[info] ") << message << '\n';
}

}  // namespace transco
