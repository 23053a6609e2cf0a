#pragma once

// Minimal stderr logger. The DISTOPT_LOG environment variable selects the
// level: "error" (default), "info", or "debug".

#include <string>

namespace distopt::log {

enum class Level : int {
  kError = 0,
  kInfo = 1,
  kDebug = 2,
};

Level level();

void error(const std::string& msg);
void info(const std::string& msg);
void debug(const std::string& msg);

}  // namespace distopt::log
