#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace harp {

enum class Errc {
  invalid_dimension,
  invalid_input,
  singular_system,
  invalid_radix,
  no_table_available,
  assumption_violated,
  too_large,
  invalid_tape,
  invalid_block,
  format_error,
  undefined_metric,
  non_finite,
  io_error,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }
  /// what() without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  Errc code_;
  std::string message_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

// Non-fatal diagnostics (clipped block sizes, oversized radices). The default
// handler writes to stderr.
using WarningHandler = std::function<void(std::string_view)>;
WarningHandler set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

}  // namespace harp
