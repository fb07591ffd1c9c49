#pragma once

#include <string>

namespace divfree {

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

/// Read once from DIVFREE_LOG={quiet,info,debug}; default info.
LogLevel log_level();
void set_log_level(LogLevel level);

void log_info(const std::string& message);
void log_debug(const std::string& message);
void log_warn(const std::string& message);

}  // namespace divfree
