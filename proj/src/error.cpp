#include "harp/error.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace harp {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::invalid_dimension: return "invalid-dimension";
    case Errc::invalid_input: return "invalid-input";
    case Errc::singular_system: return "singular-system";
    case Errc::invalid_radix: return "invalid-radix";
    case Errc::no_table_available: return "no-table-available";
    case Errc::assumption_violated: return "assumption-violated";
    case Errc::too_large: return "too-large";
    case Errc::invalid_tape: return "invalid-tape";
    case Errc::invalid_block: return "invalid-block";
    case Errc::format_error: return "format-error";
    case Errc::undefined_metric: return "undefined-metric";
    case Errc::non_finite: return "non-finite";
    case Errc::io_error: return "io-error";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code), message_(what) {}

void fail(Errc code, const std::string& what) { throw Error(code, what); }

namespace {

std::mutex g_warn_mutex;

WarningHandler& handler_slot() {
  static WarningHandler handler = [](std::string_view msg) {
    std::cerr << "harp: warning: " << msg << '\n';
  };
  return handler;
}

}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(g_warn_mutex);
  return std::exchange(handler_slot(), std::move(handler));
}

void warn(std::string_view message) {
  std::lock_guard lock(g_warn_mutex);
  if (handler_slot()) handler_slot()(message);
}

}  // namespace harp
