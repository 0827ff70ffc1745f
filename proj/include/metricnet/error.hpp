#pragma once

#include <stdexcept>
#include <string>

namespace metricnet {

enum class ErrorKind {
  invalid_parameter,
  invalid_network,
  empty_network,
  incompatible_operands,
  degenerate_matrix,
  internal_inconsistency,
  incompatible_source,
  numerical_failure,
  stability,
  invalid_character,
  io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_parameter: return "invalid parameter";
    case ErrorKind::invalid_network: return "invalid network";
    case ErrorKind::empty_network: return "empty network";
    case ErrorKind::incompatible_operands: return "incompatible operands";
    case ErrorKind::degenerate_matrix: return "degenerate matrix";
    case ErrorKind::internal_inconsistency: return "internal inconsistency";
    case ErrorKind::incompatible_source: return "incompatible source";
    case ErrorKind::numerical_failure: return "numerical failure";
    case ErrorKind::stability: return "stability";
    case ErrorKind::invalid_character: return "invalid character";
    case ErrorKind::io: return "i/o";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the kinds above so the
/// CLI can map it to a distinct exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace metricnet
