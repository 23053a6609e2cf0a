#include "distopt/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>

namespace distopt::log {

Level level() {
  static const Level lvl = [] {
    const char* env = std::getenv("DISTOPT_LOG");
    if (!env) return Level::kError;
    if (std::strcmp(env, "debug") == 0) return Level::kDebug;
    if (std::strcmp(env, "info") == 0) return Level::kInfo;
    return Level::kError;
  }();
  return lvl;
}

namespace {

std::mutex mu;

void emit(const char* tag, const std::string& msg) {
  std::lock_guard<std::mutex> lock(mu);
  std::fprintf(stderr, "[%s] %s\n", tag, msg.c_str());
}

}  // namespace

void error(const std::string& msg) { emit("error", msg); }

void info(const std::string& msg) {
  if (level() >= Level::kInfo) emit("info", msg);
}

void debug(const std::string& msg) {
  if (level() >= Level::kDebug) emit("debug", msg);
}

}  // namespace distopt::log
