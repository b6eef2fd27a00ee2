#pragma once

#include <atomic>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>

namespace relay::log {

enum class Level { DEBUG = 0, INFO = 1, WARN = 2, ERROR = 3, OFF = 4 };

inline std::atomic<Level>& threshold() {
    static std::atomic<Level> lvl{Level::WARN};
    return lvl;
}

inline void write(Level lvl, const std::string& msg) {
    if (lvl < threshold().load()) return;
    static std::mutex mu;
    static const char* names[] = {"debug", "info", "warn", "error"};
    std::lock_guard lock(mu);
    std::cerr << "[" << names[static_cast<int>(lvl)] << "] " << msg << '\n';
}

template <class... Args>
void warn(const Args&... args) {
    if (Level::WARN < threshold().load()) return;
    std::ostringstream os;
    (os << ... << args);
    write(Level::WARN, os.str());
}

template <class... Args>
void info(const Args&... args) {
    if (Level::INFO < threshold().load()) return;
    std::ostringstream os;
    (os << ... << args);
    write(Level::INFO, os.str());
}

}  // namespace relay::log
