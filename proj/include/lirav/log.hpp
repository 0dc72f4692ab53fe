#pragma once

#include <functional>
#include <string_view>

namespace lirav::log {

enum class Level { Debug, Info, Warn, Error };

using Sink = std::function<void(Level, std::string_view)>;

/// Replaces the process-wide sink (default: stderr, Info and above).
/// Passing an empty function restores the default.
void set_sink(Sink sink);
void set_level(Level level);
Level level();

void write(Level level, std::string_view message);

inline void debug(std::string_view m) { write(Level::Debug, m); }
inline void info(std::string_view m) { write(Level::Info, m); }
inline void warn(std::string_view m) { write(Level::Warn, m); }
inline void error(std::string_view m) { write(Level::Error, m); }

std::string_view to_string(Level level) noexcept;

}  // namespace lirav::log
