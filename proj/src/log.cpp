#include "lirav/log.hpp"

#include <cstdio>
#include <mutex>

namespace lirav::log {

namespace {

std::mutex g_mutex;
Sink g_sink;
Level g_level = Level::Info;

void default_sink(Level lvl, std::string_view message) {
  std::fprintf(stderr, "[%.*s] %.*s\n", static_cast<int>(to_string(lvl).size()), to_string(lvl).data(),
               static_cast<int>(message.size()), message.data());
}

}  // namespace

void set_sink(Sink sink) {
  std::lock_guard lock(g_mutex);
  g_sink = std::move(sink);
}

void set_level(Level lvl) {
  std::lock_guard lock(g_mutex);
  g_level = lvl;
}

Level level() {
  std::lock_guard lock(g_mutex);
  return g_level;
}

void write(Level lvl, std::string_view message) {
  std::lock_guard lock(g_mutex);
  if (lvl < g_level) return;
  if (g_sink) g_sink(lvl, message);
  else default_sink(lvl, message);
}

std::string_view to_string(Level lvl) noexcept {
  switch (lvl) {
    case Level::Debug: return "debug";
    case Level::Info: return "info";
    case Level::Warn: return "warn";
    case Level::Error: return "error";
  }
  return "?";
}

}  // namespace lirav::log
