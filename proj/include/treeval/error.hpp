#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace treeval {

/// Coarse failure class. The CLI prints it as a single machine-parsable
/// token on stderr and maps it to the exit code.
enum class ErrorKind {
  Precondition,  // caller violated an operation's precondition
  Dimension,     // shapes of inputs disagree
  Config,        // bad configuration value or unknown key
  Numeric,       // non-finite data, tolerance not reached
  Io,            // unreadable or unwritable file
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) throw Error(kind, msg);
}

}  // namespace treeval
