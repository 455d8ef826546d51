#include "common/log.hpp"

#include <cstdio>
#include <mutex>

namespace comira {

namespace {

void stderr_sink(LogLevel level, const char* message, void*) {
  std::fprintf(stderr, "%s: %s\n", level == LogLevel::warning ? "warning" : "info", message);
}

std::mutex g_mutex;
LogSink g_sink = &stderr_sink;
void* g_user = nullptr;

}  // namespace

void set_log_sink(LogSink sink, void* user) noexcept {
  std::lock_guard lock(g_mutex);
  g_sink = sink != nullptr ? sink : &stderr_sink;
  g_user = user;
}

void log_message(LogLevel level, const std::string& message) {
  std::lock_guard lock(g_mutex);
  g_sink(level, message.c_str(), g_user);
}

}  // namespace comira
