#pragma once

#include <string>

namespace comira {

enum class LogLevel { info, warning };

using LogSink = void (*)(LogLevel level, const char* message, void* user);

// Process-wide sink; the default writes "warning: ..." lines to stderr.
void set_log_sink(LogSink sink, void* user) noexcept;
void log_message(LogLevel level, const std::string& message);
inline void log_warning(const std::string& message) { log_message(LogLevel::warning, message); }
inline void log_info(const std::string& message) { log_message(LogLevel::info, message); }

}  // namespace comira
