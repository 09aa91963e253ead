#include "log.hpp"

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <string>

namespace psd::cli {

namespace {

bool use_color() {
  static const bool enabled = std::getenv("PSD_NO_COLOR") == nullptr && ::isatty(STDERR_FILENO);
  return enabled;
}

void emit(const char* color, std::string_view tag, std::string_view msg) {
  if (use_color()) {
    std::fprintf(stderr, "%s%.*s\033[0m %.*s\n", color, static_cast<int>(tag.size()), tag.data(),
                 static_cast<int>(msg.size()), msg.data());
  } else {
    std::fprintf(stderr, "%.*s %.*s\n", static_cast<int>(tag.size()), tag.data(),
                 static_cast<int>(msg.size()), msg.data());
  }
}

}  // namespace

void log_info(std::string_view msg) { emit("\033[32m", "info", msg); }
void log_warn(std::string_view msg) { emit("\033[33m", "warn", msg); }

void log_error(std::string_view kind, std::string_view msg) {
  std::string flat(msg);
  for (char& c : flat) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  // Kept uncolored so scripts can match it verbatim.
  std::fprintf(stderr, "error kind=%.*s message=%s\n", static_cast<int>(kind.size()), kind.data(),
               flat.c_str());
}

}  // namespace psd::cli
